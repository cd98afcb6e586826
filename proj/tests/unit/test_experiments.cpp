// SPDX-License-Identifier: Apache-2.0
//
// dsim: double-SIM massive MIMO uplink modelling and phase-shift optimization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include <dsim/experiments.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace dsim;

namespace
{
    ExperimentConfig small_experiment()
    {
        ExperimentConfig c;
        apply_validation_scale(c);
        c.starts = 2;
        c.optimizer.max_iters = 8;
        c.run.random_baselines = 3;
        c.run.seed = 5;
        return c;
    }

    std::string sweep_csv(const ExperimentConfig &c, const std::vector<double> &values, int threads)
    {
        std::ostringstream os;
        write_sweep_csv(os, run_sweep(c, "K", values, threads), c);
        return os.str();
    }
} // namespace

TEST(Output, FormatDoubleRoundTrips)
{
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300})
        EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Output, CsvQuoting)
{
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"a", "b,c", "say \"hi\"", ""});
    EXPECT_EQ(os.str(), "a,\"b,c\",\"say \"\"hi\"\"\",\n");
}

TEST(Output, SidecarCarriesProvenance)
{
    const ExperimentConfig c = small_experiment();
    RunMetadata m;
    m.command = "sweep";
    m.threads = 3;
    const auto j = sidecar_json(c, m);
    EXPECT_EQ(j["seed"], 5u);
    EXPECT_EQ(j["config_hash"], config_hash(c));
    EXPECT_EQ(j["command"], "sweep");
    EXPECT_EQ(j["config"]["scenario"]["K"], 2);
}

TEST(SweepScenario, AppliesValues)
{
    const SystemConfig base;
    EXPECT_EQ(sweep_scenario(base, "M", 49).bsim_x, 7);
    EXPECT_EQ(sweep_scenario(base, "N", 16).csim_y, 4);
    EXPECT_EQ(sweep_scenario(base, "K", 6).users, 6);
    EXPECT_EQ(sweep_scenario(base, "S", 0).csim_layers, 0);
    EXPECT_EQ(sweep_scenario(base, "snr_db", 10).snr_pilot_db, 10.0);
    EXPECT_THROW(sweep_scenario(base, "M", 50), ContractViolation);
    EXPECT_THROW(sweep_scenario(base, "K", 2.5), ContractViolation);
    EXPECT_THROW(sweep_scenario(base, "K", 0), ContractViolation);
    EXPECT_THROW(sweep_scenario(base, "Q", 1), ContractViolation);
}

TEST(BalanceCascade, SetsRequestedRatio)
{
    const ExperimentConfig c = small_experiment();
    Scenario sc = build_scenario(c.scenario);
    const PhaseProfile p = random_profile(sc, 1, 0);
    balance_cascade(sc, p, {0.5, 4.0});
    const double t = cascade_trace_factor(sc.r_csim.entries, csim_response(sc.stack, p).matrix);
    EXPECT_NEAR(sc.losses.beta_hat[0] * t / sc.losses.beta_bar[0], 0.5, 1e-12);
    EXPECT_NEAR(sc.losses.beta_hat[1] * t / sc.losses.beta_bar[1], 4.0, 1e-12);
    EXPECT_THROW(balance_cascade(sc, p, {1.0}), ContractViolation);
}

TEST(Designs, BaselinesAreWhatTheySay)
{
    const ExperimentConfig c = small_experiment();
    const Scenario sc = build_scenario(c.scenario);
    const DesignComparison d = compare_designs(sc, c, 1);
    EXPECT_EQ(d.equal_se, objective(PhaseProfile(2, 9, 2, 9), sc));
    EXPECT_EQ(d.optimized_se, d.optimized.best_run().trace.final_objective());
    EXPECT_GT(d.optimized_se, d.random_se);
    EXPECT_EQ(d.optimized_nmse.size(), 2u);
}

TEST(Sweep, SingleValueMatchesMultiStart)
{
    const ExperimentConfig c = small_experiment();
    const std::vector<SweepRow> rows = run_sweep(c, "K", {2}, 1);
    const Scenario sc = build_scenario(c.scenario);
    const MultiStartResult m = multi_start(sc, c.optimizer, c.starts, c.run.seed, c.method, 1);
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows[0].design, "optimized");
    EXPECT_EQ(rows[0].metric, "sum_se");
    EXPECT_EQ(rows[0].result, m.best_run().trace.final_objective());
}

TEST(Sweep, InfeasiblePointBecomesErrorRow)
{
    const ExperimentConfig c = small_experiment();
    const std::vector<SweepRow> rows = run_sweep(c, "K", {0, 300, 1}, 1);
    int errors = 0;
    for (const SweepRow &r : rows)
        if (r.status != "ok")
        {
            ++errors;
            EXPECT_TRUE(std::isnan(r.result));
            EXPECT_EQ(r.status.rfind("error: ", 0), 0u);
        }
    EXPECT_EQ(errors, 2);
    EXPECT_EQ(rows.back().value, 1.0);
}

TEST(Sweep, CsvIndependentOfThreadCount)
{
    const ExperimentConfig c = small_experiment();
    const std::string a = sweep_csv(c, {1, 2, 3}, 1);
    EXPECT_EQ(a, sweep_csv(c, {1, 2, 3}, 3));
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "experiment,parameter,value,design,metric,user,result,status,seed,config_hash");
}

TEST(Convergence, AoStaysWithinPgamBudget)
{
    ExperimentConfig c = small_experiment();
    const Scenario sc = build_scenario(c.scenario);
    for (const ConvergenceRun &r : run_convergence(sc, c, 1))
    {
        EXPECT_LE(r.ao.trace.total_gradient_evals, r.pgam.trace.total_gradient_evals);
        EXPECT_TRUE(r.pgam.trace.non_decreasing());
        EXPECT_TRUE(r.ao.trace.non_decreasing());
        EXPECT_EQ(r.pgam.trace.objective.front(), r.ao.trace.objective.front());
    }
}

TEST(GradientCheck, PassesAndCatchesCorruption)
{
    const ExperimentConfig c = small_experiment();
    GradientCheckOptions opt;
    const GradientCheckRow good = gradient_check_instance(c.scenario, c.run.seed, 0, opt);
    EXPECT_LE(good.max_rel_err, 1e-5);
    opt.corrupt_gradient = true;
    const GradientCheckRow bad = gradient_check_instance(c.scenario, c.run.seed, 0, opt);
    EXPECT_GT(bad.max_rel_err, 1e-5);
    EXPECT_GT(bad.max_rel_err_bsim, 1e-5);
}

TEST(Validation, CorruptedGradientFailsNamedCheck)
{
    ExperimentConfig c = small_experiment();
    c.run.instances = 2;
    c.run.covariance_draws = 500;
    c.run.estimation_trials = 500;
    c.run.trials = 500;
    auto gradient_row = [](const std::vector<ValidationCheck> &v) {
        for (const ValidationCheck &x : v)
            if (x.name == "gradient_vs_finite_difference")
                return x;
        return ValidationCheck{};
    };
    EXPECT_TRUE(gradient_row(run_validation(c, false, 1)).passed);
    const ValidationCheck bad = gradient_row(run_validation(c, true, 1));
    EXPECT_EQ(bad.name, "gradient_vs_finite_difference");
    EXPECT_FALSE(bad.passed);
}

TEST(Nmse, MonteCarloColumnOptional)
{
    ExperimentConfig c = small_experiment();
    c.run.estimation_trials = 20000;
    const std::vector<NmseRow> rows = run_nmse(c, {0.0, 10.0}, true, 1);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_GT(rows[0].closed_form, rows[2].closed_form);
    for (const NmseRow &r : rows)
        EXPECT_NEAR(r.monte_carlo / r.closed_form, 1.0, 0.05);
    EXPECT_TRUE(std::isnan(run_nmse(c, {0.0}, false, 1)[0].monte_carlo));
}
