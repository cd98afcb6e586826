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


#ifndef DSIM_EXPERIMENTS_HPP
#define DSIM_EXPERIMENTS_HPP

// Experiment drivers behind the command-line tool and the acceptance runs.
// Every driver is deterministic in (config, seed); parallel work is merged
// in index order, and wall times go only to the JSON sidecar.

#include "config.hpp"
#include "estimation.hpp"
#include "monte_carlo.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "scenario.hpp"

#include <json.hpp> // nlohmann/json

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace dsim
{
    inline constexpr int csv_schema_version = 1;

    // ---- output helpers ----

    inline std::string format_double(double x)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return buf;
    }

    class CsvWriter
    {
    public:
        explicit CsvWriter(std::ostream &os) : os_(os) {}

        void row(const std::vector<std::string> &cells)
        {
            for (std::size_t i = 0; i < cells.size(); ++i)
            {
                if (i)
                    os_ << ',';
                write_cell(cells[i]);
            }
            os_ << '\n';
        }

    private:
        void write_cell(const std::string &c)
        {
            if (c.find_first_of(",\"\n") == std::string::npos)
            {
                os_ << c;
                return;
            }
            os_ << '"';
            for (char ch : c)
            {
                if (ch == '"')
                    os_ << '"';
                os_ << ch;
            }
            os_ << '"';
        }

        std::ostream &os_;
    };

    struct RunMetadata
    {
        std::string command;
        double wall_seconds = 0.0;
        int threads = 1;
        nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    };

    inline nlohmann::ordered_json sidecar_json(const ExperimentConfig &cfg, const RunMetadata &meta)
    {
        nlohmann::ordered_json j;
        j["tool"] = "dsim";
        j["csv_schema_version"] = csv_schema_version;
        j["command"] = meta.command;
        j["seed"] = cfg.run.seed;
        j["config_hash"] = config_hash(cfg);
        j["config"] = to_json(cfg);
        j["threads"] = meta.threads;
        j["wall_seconds"] = meta.wall_seconds;
        if (!meta.extra.empty())
            j["results"] = meta.extra;
        return j;
    }

    inline void write_sidecar(const std::string &csv_path, const ExperimentConfig &cfg, const RunMetadata &meta)
    {
        std::ofstream os(csv_path + ".json");
        if (!os)
            throw std::runtime_error("cannot write '" + csv_path + ".json'");
        os << sidecar_json(cfg, meta).dump(2) << '\n';
    }

    // ---- scenario variants ----

    /// Scenario for one sweep value. Throws ContractViolation for infeasible values.
    inline SystemConfig sweep_scenario(const SystemConfig &base, const std::string &parameter, double value)
    {
        SystemConfig s = base;
        auto as_int = [&](double v) {
            require(std::isfinite(v) && v == std::floor(v) && v >= 0.0 && v <= 1e6,
                    parameter + " must be a nonnegative integer");
            return static_cast<int>(v);
        };
        auto square = [&](double v) {
            const int n = as_int(v);
            const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
            require(side * side == n && n > 0, parameter + "=" + std::to_string(n) + " is not a square grid");
            return side;
        };
        if (parameter == "M")
            s.bsim_x = s.bsim_y = square(value);
        else if (parameter == "N")
            s.csim_x = s.csim_y = square(value);
        else if (parameter == "L")
            s.bsim_layers = as_int(value);
        else if (parameter == "S")
            s.csim_layers = as_int(value);
        else if (parameter == "K")
            s.users = as_int(value);
        else if (parameter == "snr_db")
            s.snr_pilot_db = s.snr_data_db = value;
        else if (parameter == "M_BS")
            s.bs_antennas = as_int(value);
        else
            throw ContractViolation("unknown sweep parameter '" + parameter + "'");
        s.validate();
        return s;
    }

    /// Sets beta_hat_k so that the cascaded share of R_k equals ratio_k times
    /// the direct share at `profile`. Gradient checks use this to make both
    /// stacks matter; with the default geometry the cascade is ~1e-5 of the direct link.
    inline void balance_cascade(Scenario &sc, const PhaseProfile &profile, const std::vector<double> &ratio)
    {
        require(static_cast<int>(ratio.size()) == sc.users(), "one ratio per user expected");
        if (!sc.has_csim())
            return;
        const double t = cascade_trace_factor(sc.r_csim.entries, csim_response(sc.stack, profile).matrix);
        require(t > 0.0, "cascade trace factor vanishes");
        for (int k = 0; k < sc.users(); ++k)
            sc.losses.beta_hat[k] = ratio[k] * sc.losses.beta_bar[k] / t;
    }

    // ---- phase designs ----

    inline constexpr std::uint64_t baseline_stream_offset = 1ull << 20;

    struct DesignComparison
    {
        MultiStartResult optimized;
        double optimized_se = 0.0;
        double random_se = 0.0; // mean over the random profiles
        double equal_se = 0.0;  // all angles zero
        std::vector<double> optimized_se_per_user;
        std::vector<double> optimized_nmse;
    };

    inline DesignComparison compare_designs(const Scenario &sc, const ExperimentConfig &cfg, int threads = 0)
    {
        DesignComparison out;
        out.optimized = multi_start(sc, cfg.optimizer, cfg.starts, cfg.run.seed, cfg.method, threads);
        const OptimizeResult &best = out.optimized.best_run();
        const Evaluation ev = evaluate(sc, best.profile);
        out.optimized_se = ev.se.sum_se;
        out.optimized_se_per_user = ev.se.se_per_user;
        for (int k = 0; k < sc.users(); ++k)
            out.optimized_nmse.push_back(nmse(ev.stats.psi[k], ev.stats.r_hat[k]));
        double sum = 0.0;
        for (int i = 0; i < cfg.run.random_baselines; ++i)
            sum += objective(random_profile(sc, cfg.run.seed, baseline_stream_offset + i), sc);
        out.random_se = sum / cfg.run.random_baselines;
        const PhaseProfile flat(sc.stack.bsim_layers(), sc.stack.bsim_atoms(), sc.stack.csim_layers(),
                                sc.has_csim() ? sc.stack.csim_atoms() : 0);
        out.equal_se = objective(flat, sc);
        return out;
    }

    // ---- sweep ----

    struct SweepRow
    {
        std::string parameter;
        double value = 0.0;
        std::string design; // optimized, random, equal
        std::string metric; // sum_se, se, nmse
        int user = 0;       // 1-based, 0 for sums
        double result = 0.0;
        std::string status = "ok";
    };

    inline std::vector<SweepRow> run_sweep(const ExperimentConfig &cfg, const std::string &parameter,
                                           const std::vector<double> &values, int threads = 0)
    {
        std::vector<std::vector<SweepRow>> per_point(values.size());
        parallel_for(
            values.size(),
            [&](std::size_t i) {
                std::vector<SweepRow> &rows = per_point[i];
                const double v = values[i];
                Scenario sc;
                try
                {
                    sc = build_scenario(sweep_scenario(cfg.scenario, parameter, v));
                }
                catch (const std::exception &e)
                {
                    rows.push_back({parameter, v, "", "", 0, std::nan(""), std::string("error: ") + e.what()});
                    return;
                }
                // one thread per point; the points themselves run in parallel
                const DesignComparison d = compare_designs(sc, cfg, 1);
                rows.push_back({parameter, v, "optimized", "sum_se", 0, d.optimized_se});
                rows.push_back({parameter, v, "random", "sum_se", 0, d.random_se});
                rows.push_back({parameter, v, "equal", "sum_se", 0, d.equal_se});
                for (std::size_t k = 0; k < d.optimized_se_per_user.size(); ++k)
                    rows.push_back({parameter, v, "optimized", "se", static_cast<int>(k + 1),
                                    d.optimized_se_per_user[k]});
                for (std::size_t k = 0; k < d.optimized_nmse.size(); ++k)
                    rows.push_back({parameter, v, "optimized", "nmse", static_cast<int>(k + 1), d.optimized_nmse[k]});
            },
            threads);
        std::vector<SweepRow> out;
        for (auto &p : per_point)
            out.insert(out.end(), p.begin(), p.end());
        return out;
    }

    inline void write_sweep_csv(std::ostream &os, const std::vector<SweepRow> &rows, const ExperimentConfig &cfg)
    {
        CsvWriter w(os);
        w.row({"experiment", "parameter", "value", "design", "metric", "user", "result", "status", "seed",
               "config_hash"});
        const std::string seed = std::to_string(cfg.run.seed), hash = config_hash(cfg);
        for (const SweepRow &r : rows)
            w.row({"sweep", r.parameter, format_double(r.value), r.design, r.metric, std::to_string(r.user),
                   format_double(r.result), r.status, seed, hash});
    }

    // ---- optimize ----

    inline void write_trace_csv(std::ostream &os, const OptimizerTrace &t, const ExperimentConfig &cfg)
    {
        CsvWriter w(os);
        w.row({"iter", "objective", "mu", "backtracks", "accepted", "gradient_evals", "seed", "config_hash"});
        const std::string seed = std::to_string(cfg.run.seed), hash = config_hash(cfg);
        for (std::size_t i = 0; i < t.objective.size(); ++i)
            w.row({std::to_string(i), format_double(t.objective[i]), format_double(t.mu[i]),
                   std::to_string(t.backtracks[i]), t.accepted[i] ? "1" : "0", std::to_string(t.gradient_evals[i]),
                   seed, hash});
    }

    // ---- convergence ----

    struct ConvergenceRun
    {
        int start = 0;
        OptimizeResult pgam;
        OptimizeResult ao;
    };

    /// PGAM and AO from identical initial points. AO gets the gradient-evaluation
    /// budget PGAM used on the same start.
    inline std::vector<ConvergenceRun> run_convergence(const Scenario &sc, const ExperimentConfig &cfg,
                                                       int threads = 0)
    {
        std::vector<ConvergenceRun> runs(cfg.starts);
        parallel_for(
            runs.size(),
            [&](std::size_t s) {
                const PhaseProfile init = random_profile(sc, cfg.run.seed, s);
                runs[s].start = static_cast<int>(s);
                runs[s].pgam = pgam_optimize(init, sc, cfg.optimizer);
                LineSearchParams budget = cfg.optimizer;
                budget.max_gradient_evals = runs[s].pgam.trace.total_gradient_evals;
                runs[s].ao = ao_optimize(init, sc, budget);
            },
            threads);
        return runs;
    }

    inline void write_convergence_csv(std::ostream &os, const std::vector<ConvergenceRun> &runs,
                                      const ExperimentConfig &cfg)
    {
        CsvWriter w(os);
        w.row({"method", "start", "iter", "objective", "mu", "backtracks", "gradient_evals", "seed", "config_hash"});
        const std::string seed = std::to_string(cfg.run.seed), hash = config_hash(cfg);
        for (const ConvergenceRun &r : runs)
            for (const auto &[name, res] : {std::pair<const char *, const OptimizeResult *>{"pgam", &r.pgam},
                                            std::pair<const char *, const OptimizeResult *>{"ao", &r.ao}})
            {
                const OptimizerTrace &t = res->trace;
                for (std::size_t i = 0; i < t.objective.size(); ++i)
                    w.row({name, std::to_string(r.start), std::to_string(i), format_double(t.objective[i]),
                           format_double(t.mu[i]), std::to_string(t.backtracks[i]),
                           std::to_string(t.gradient_evals[i]), seed, hash});
            }
    }

    // ---- Monte Carlo SINR ----

    struct SinrComparison
    {
        int user = 0; // 1-based
        double gamma_closed = 0.0;
        double gamma_mc = 0.0;
        double rel_err = 0.0;
    };

    /// Closed form against sampling at the first random start profile.
    inline std::vector<SinrComparison> run_mc_validate(const Scenario &sc, const ExperimentConfig &cfg,
                                                       int threads = 0)
    {
        const PhaseProfile p = random_profile(sc, cfg.run.seed, 0);
        const Evaluation ev = evaluate(sc, p);
        const std::vector<SinrBreakdown> mc = monte_carlo_sinr(sc, p, cfg.run.trials, cfg.run.seed, threads);
        std::vector<SinrComparison> out;
        for (int k = 0; k < sc.users(); ++k)
        {
            SinrComparison c;
            c.user = k + 1;
            c.gamma_closed = ev.sinr[k].gamma;
            c.gamma_mc = mc[k].gamma;
            c.rel_err = c.gamma_closed > 0.0 ? std::abs(c.gamma_mc - c.gamma_closed) / c.gamma_closed
                                             : std::abs(c.gamma_mc);
            out.push_back(c);
        }
        return out;
    }

    inline void write_mc_csv(std::ostream &os, const std::vector<SinrComparison> &rows, const ExperimentConfig &cfg)
    {
        CsvWriter w(os);
        w.row({"user", "gamma_closed", "gamma_mc", "rel_err", "trials", "seed", "config_hash"});
        const std::string seed = std::to_string(cfg.run.seed), hash = config_hash(cfg);
        for (const SinrComparison &r : rows)
            w.row({std::to_string(r.user), format_double(r.gamma_closed), format_double(r.gamma_mc),
                   format_double(r.rel_err), std::to_string(cfg.run.trials), seed, hash});
    }

    // ---- NMSE ----

    struct NmseRow
    {
        double snr_db = 0.0;
        int user = 0;
        double closed_form = 0.0;
        double monte_carlo = std::nan(""); // only when requested
    };

    /// NMSE per user versus the pilot SNR at the first random start profile.
    inline std::vector<NmseRow> run_nmse(const ExperimentConfig &cfg, const std::vector<double> &snr_db,
                                         bool with_monte_carlo, int threads = 0)
    {
        std::vector<NmseRow> out;
        for (double snr : snr_db)
        {
            SystemConfig s = cfg.scenario;
            s.snr_pilot_db = snr;
            const Scenario sc = build_scenario(s);
            const PhaseProfile p = random_profile(sc, cfg.run.seed, 0);
            const ProfileStatistics st = evaluate_statistics(sc, p);
            std::vector<EstimationSample> mc;
            if (with_monte_carlo)
                mc = monte_carlo_estimation(sc, p, cfg.run.estimation_trials, cfg.run.seed, threads);
            for (int k = 0; k < sc.users(); ++k)
            {
                NmseRow r;
                r.snr_db = snr;
                r.user = k + 1;
                r.closed_form = nmse(st.psi[k], st.r_hat[k]);
                if (with_monte_carlo)
                    r.monte_carlo = mc[k].nmse;
                out.push_back(r);
            }
        }
        return out;
    }

    inline void write_nmse_csv(std::ostream &os, const std::vector<NmseRow> &rows, const ExperimentConfig &cfg)
    {
        CsvWriter w(os);
        w.row({"snr_db", "user", "nmse_closed_form", "nmse_monte_carlo", "seed", "config_hash"});
        const std::string seed = std::to_string(cfg.run.seed), hash = config_hash(cfg);
        for (const NmseRow &r : rows)
            w.row({format_double(r.snr_db), std::to_string(r.user), format_double(r.closed_form),
                   std::isnan(r.monte_carlo) ? "" : format_double(r.monte_carlo), seed, hash});
    }

    // ---- gradient check ----

    struct GradientCheckRow
    {
        int instance = 0;
        double objective = 0.0;
        double max_rel_err_bsim = 0.0;
        double max_rel_err_csim = 0.0;
        double max_rel_err = 0.0;
    };

    struct GradientCheckOptions
    {
        double step = 1e-6;
        bool balance_links = true;     // random cascade/direct ratio in [0.1, 10] per user
        bool corrupt_gradient = false; // negative control: perturb one analytic entry
    };

    inline GradientCheckRow gradient_check_instance(const SystemConfig &base, std::uint64_t seed, int instance,
                                                    const GradientCheckOptions &opt)
    {
        Scenario sc = build_scenario(base);
        const PhaseProfile p = random_profile(sc, seed, static_cast<std::uint64_t>(instance));
        if (opt.balance_links && sc.has_csim())
        {
            std::mt19937_64 engine = make_stream(seed, (1ull << 50) + static_cast<std::uint64_t>(instance));
            std::uniform_real_distribution<double> exponent(-1.0, 1.0);
            std::vector<double> ratio(sc.users());
            for (double &r : ratio)
                r = std::pow(10.0, exponent(engine));
            balance_cascade(sc, p, ratio);
        }
        ObjectiveGradient og = objective_and_gradient(p, sc);
        if (opt.corrupt_gradient)
            og.grad.grad_phi(0, 0) *= 1.001;
        const AngleGradient analytic = angle_gradient(og.grad, p);
        const AngleGradient fd = finite_difference_angles(
            p, [&sc](const PhaseProfile &q) { return objective_in<long double>(q, sc); }, opt.step);
        GradientCheckRow row;
        row.instance = instance;
        row.objective = og.objective;
        row.max_rel_err_bsim = max_relative_error({analytic.bsim, RMatrix()}, {fd.bsim, RMatrix()}, 0.0);
        row.max_rel_err_csim = max_relative_error({RMatrix(), analytic.csim}, {RMatrix(), fd.csim}, 0.0);
        row.max_rel_err = std::max(row.max_rel_err_bsim, row.max_rel_err_csim);
        return row;
    }

    inline std::vector<GradientCheckRow> run_gradient_check(const ExperimentConfig &cfg,
                                                            const GradientCheckOptions &opt, int threads = 0)
    {
        std::vector<GradientCheckRow> rows(cfg.run.instances);
        parallel_for(
            rows.size(),
            [&](std::size_t i) {
                rows[i] = gradient_check_instance(cfg.scenario, cfg.run.seed, static_cast<int>(i), opt);
            },
            threads);
        return rows;
    }

    inline void write_gradient_csv(std::ostream &os, const std::vector<GradientCheckRow> &rows,
                                   const GradientCheckOptions &opt, double tolerance, const ExperimentConfig &cfg)
    {
        CsvWriter w(os);
        w.row({"instance", "objective", "max_rel_err_bsim", "max_rel_err_csim", "max_rel_err", "step", "tolerance",
               "pass", "seed", "config_hash"});
        const std::string seed = std::to_string(cfg.run.seed), hash = config_hash(cfg);
        for (const GradientCheckRow &r : rows)
            w.row({std::to_string(r.instance), format_double(r.objective), format_double(r.max_rel_err_bsim),
                   format_double(r.max_rel_err_csim), format_double(r.max_rel_err), format_double(opt.step),
                   format_double(tolerance), r.max_rel_err <= tolerance ? "1" : "0", seed, hash});
    }

    // ---- validation suite ----

    struct ValidationCheck
    {
        std::string name;
        int user = 0; // 0: not per user
        double measured = 0.0;
        double tolerance = 0.0;
        bool passed = false;
    };

    struct ValidationTolerances
    {
        double gradient = 1e-5;
        double covariance = 0.02;
        double estimator = 0.02;
        double estimator_identity = 1e-12;
        double orthogonality = 0.02;
        double nmse = 0.03;
        double sinr = 0.05;
    };

    inline std::vector<ValidationCheck> run_validation(const ExperimentConfig &cfg, bool corrupt_gradient = false,
                                                       int threads = 0, const ValidationTolerances &tol = {})
    {
        std::vector<ValidationCheck> out;
        auto add = [&](const std::string &name, int user, double measured, double limit) {
            out.push_back({name, user, measured, limit, measured <= limit});
        };

        GradientCheckOptions gopt;
        gopt.step = cfg.run.fd_step;
        gopt.corrupt_gradient = corrupt_gradient;
        double worst = 0.0;
        for (const GradientCheckRow &r : run_gradient_check(cfg, gopt, threads))
            worst = std::max(worst, r.max_rel_err);
        add("gradient_vs_finite_difference", 0, worst, tol.gradient);

        const Scenario sc = build_scenario(cfg.scenario);
        const PhaseProfile p = random_profile(sc, cfg.run.seed, 0);
        const ProfileStatistics st = evaluate_statistics(sc, p);

        const std::vector<CMatrix> hcov =
            monte_carlo_channel_covariance(sc, p, cfg.run.covariance_draws, cfg.run.seed, threads);
        for (int k = 0; k < sc.users(); ++k)
            add("channel_covariance", k + 1, relative_frobenius_error(hcov[k], user_covariance(sc, st, k)),
                tol.covariance);

        const std::vector<EstimationSample> est =
            monte_carlo_estimation(sc, p, cfg.run.estimation_trials, cfg.run.seed, threads);
        for (int k = 0; k < sc.users(); ++k)
        {
            const EstimateCovariances ec = estimate_covariances(st.r_hat[k], st.q[k]);
            add("estimate_covariance", k + 1, relative_frobenius_error(est[k].estimate_cov, ec.psi), tol.estimator);
            add("error_covariance", k + 1, relative_frobenius_error(est[k].error_cov, ec.psi_tilde), tol.estimator);
            add("estimate_plus_error_identity", k + 1, relative_frobenius_error(ec.psi + ec.psi_tilde, st.r_hat[k]),
                tol.estimator_identity);
            add("estimate_error_orthogonality", k + 1, est[k].cross_cov.norm() / ec.psi.norm(), tol.orthogonality);
            const double cf = nmse(ec.psi, st.r_hat[k]);
            add("nmse_closed_vs_monte_carlo", k + 1, std::abs(est[k].nmse - cf) / cf, tol.nmse);
        }

        for (const SinrComparison &c : run_mc_validate(sc, cfg, threads))
            add("sinr_closed_vs_monte_carlo", c.user, c.rel_err, tol.sinr);
        return out;
    }

    inline void write_validation_csv(std::ostream &os, const std::vector<ValidationCheck> &checks,
                                     const ExperimentConfig &cfg)
    {
        CsvWriter w(os);
        w.row({"check", "user", "measured", "tolerance", "pass", "seed", "config_hash"});
        const std::string seed = std::to_string(cfg.run.seed), hash = config_hash(cfg);
        for (const ValidationCheck &c : checks)
            w.row({c.name, std::to_string(c.user), format_double(c.measured), format_double(c.tolerance),
                   c.passed ? "1" : "0", seed, hash});
    }

} // namespace dsim

#endif // DSIM_EXPERIMENTS_HPP
