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


// dsim: command-line experiments for the double-SIM uplink model.
//
//   dsim optimize | sweep | convergence | gradient-check | mc-validate | nmse | validate
//
// Exit codes: 0 success, 1 validation failure or runtime error, 2 configuration error.

#include <dsim/config.hpp>
#include <dsim/experiments.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{
    using namespace dsim;

    constexpr int exit_ok = 0;
    constexpr int exit_failed = 1;
    constexpr int exit_config = 2;

    struct GlobalOptions
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::string out;
        bool full = false;
        int threads = 0;
        std::vector<std::string> overrides;
        std::string dump_stack;
    };

    enum class Scale
    {
        desk,
        validation,
    };

    ExperimentConfig resolve_config(const GlobalOptions &g, std::vector<std::string> extra, Scale scale)
    {
        ExperimentConfig cfg;
        if (!g.config_path.empty())
            cfg = load_config(g.config_path);
        std::vector<std::string> all = g.overrides;
        if (g.seed)
            all.push_back("run.seed=" + std::to_string(*g.seed));
        all.insert(all.end(), extra.begin(), extra.end());
        apply_overrides(cfg, all);
        if (!g.full)
        {
            if (scale == Scale::validation)
                apply_validation_scale(cfg);
            else
                apply_desk_scale(cfg);
        }
        if (g.threads > 0)
            cfg.run.threads = g.threads;
        if (!g.out.empty())
            cfg.run.out = g.out;
        return cfg;
    }

    // Writes the CSV produced by `emit` to --out (plus sidecar) or stdout.
    template <typename Emit>
    void write_output(const ExperimentConfig &cfg, RunMetadata meta, Emit &&emit)
    {
        if (cfg.run.out.empty())
        {
            emit(std::cout);
            return;
        }
        std::ofstream os(cfg.run.out);
        if (!os)
            throw std::runtime_error("cannot write '" + cfg.run.out + "'");
        emit(os);
        meta.threads = thread_count();
        write_sidecar(cfg.run.out, cfg, meta);
        std::cerr << "wrote " << cfg.run.out << " and " << cfg.run.out << ".json\n";
    }

    double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::vector<double> parse_values(const std::string &key, const std::string &raw)
    {
        return detail::parse_list(key, raw);
    }

    void maybe_dump_stack(const GlobalOptions &g, const Scenario &sc)
    {
        if (g.dump_stack.empty())
            return;
        std::ofstream os(g.dump_stack);
        if (!os)
            throw std::runtime_error("cannot write '" + g.dump_stack + "'");
        sc.stack.dump(os);
    }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Double-SIM massive MIMO uplink: phase-shift optimization and validation experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--config", g.config_path, "INI file with [scenario], [optimizer], [run], [sweep] sections");
    app.add_option("--seed", g.seed, "Base seed for every random stream");
    app.add_option("--out", g.out, "CSV output path (a .json sidecar is written next to it)");
    app.add_flag("--full", g.full, "Use the configured sizes as given (default: 7x7 atoms, 2 layers per stack)");
    app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)");
    app.add_option("--set", g.overrides, "Override a key, e.g. --set scenario.K=6")->take_all();
    app.add_option("--dump-stack", g.dump_stack, "Write the transmission matrices as text to this path");

    // optimize
    auto *opt = app.add_subcommand("optimize", "Multi-start phase-shift optimization");
    std::string method, profile_out;
    std::optional<int> starts, max_iters;
    std::optional<double> tol, mu_init, kappa;
    opt->add_option("--method", method, "pgam or ao");
    opt->add_option("--starts", starts, "Random initial points");
    opt->add_option("--tol", tol, "Stop when the objective improves by less");
    opt->add_option("--max-iters", max_iters, "Iteration cap");
    opt->add_option("--mu-init", mu_init, "Initial step size");
    opt->add_option("--kappa", kappa, "Backtracking shrink factor");
    opt->add_option("--profile-out", profile_out, "Final phase profile (default: <out>.profile)");

    // sweep
    auto *sweep = app.add_subcommand("sweep", "Sum SE of optimized, random and equal phases over one parameter");
    std::string sweep_param, sweep_values;
    sweep->add_option("--param", sweep_param, "One of M, N, L, S, K, snr_db, M_BS");
    sweep->add_option("--values", sweep_values, "Comma-separated values");

    // convergence
    auto *conv = app.add_subcommand("convergence", "PGAM and AO traces from identical initial points");

    // gradient-check
    auto *grad = app.add_subcommand("gradient-check", "Analytic gradient against central differences");
    std::optional<int> instances;
    std::optional<double> step;
    bool corrupt = false, raw_links = false;
    grad->add_option("--instances", instances, "Random instances");
    grad->add_option("--step", step, "Finite-difference step in radians");
    grad->add_flag("--raw-links", raw_links, "Keep the geometric path losses (default: rebalance the cascade)");
    grad->add_flag("--corrupt-gradient", corrupt, "Test hook: perturb the analytic gradient");

    // mc-validate
    auto *mc = app.add_subcommand("mc-validate", "Closed-form SINR against Monte Carlo");
    std::optional<long long> trials;
    mc->add_option("--trials", trials, "Monte Carlo trials");

    // nmse
    auto *nm = app.add_subcommand("nmse", "Channel-estimation NMSE versus pilot SNR");
    std::string snr_values = "-10,-5,0,5,10,15,20,25,30";
    bool nmse_mc = false;
    nm->add_option("--snr-values", snr_values, "Comma-separated pilot SNRs in dB");
    nm->add_flag("--monte-carlo", nmse_mc, "Add the sampled NMSE column");

    // validate
    auto *val = app.add_subcommand("validate", "All oracle checks; nonzero exit on any failure");
    bool val_corrupt = false;
    val->add_flag("--corrupt-gradient", val_corrupt, "Test hook: perturb the analytic gradient");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_config;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        if (g.threads > 0)
            set_thread_count(g.threads);

        if (opt->parsed())
        {
            std::vector<std::string> extra;
            if (!method.empty())
                extra.push_back("optimizer.method=" + method);
            if (starts)
                extra.push_back("optimizer.starts=" + std::to_string(*starts));
            if (tol)
                extra.push_back("optimizer.tol=" + format_double(*tol));
            if (max_iters)
                extra.push_back("optimizer.max_iters=" + std::to_string(*max_iters));
            if (mu_init)
                extra.push_back("optimizer.mu_init=" + format_double(*mu_init));
            if (kappa)
                extra.push_back("optimizer.kappa=" + format_double(*kappa));
            const ExperimentConfig cfg = resolve_config(g, extra, Scale::desk);
            const Scenario sc = build_scenario(cfg.scenario);
            maybe_dump_stack(g, sc);
            const MultiStartResult ms = multi_start(sc, cfg.optimizer, cfg.starts, cfg.run.seed, cfg.method);
            const OptimizeResult &best = ms.best_run();
            RunMetadata meta{"optimize", seconds_since(t0)};
            meta.extra = {{"best_start", ms.best},
                          {"final_objectives", ms.finals()},
                          {"relative_spread", ms.relative_spread()},
                          {"stop_reason", best.trace.stop_reason}};
            write_output(cfg, meta, [&](std::ostream &os) { write_trace_csv(os, best.trace, cfg); });
            std::string ppath = profile_out;
            if (ppath.empty() && !cfg.run.out.empty())
                ppath = cfg.run.out + ".profile";
            if (!ppath.empty())
            {
                std::ofstream os(ppath);
                best.profile.write(os);
            }
            std::cerr << "sum SE " << format_double(best.trace.final_objective()) << " bit/s/Hz after "
                      << best.trace.iterations() << " iterations (" << best.trace.stop_reason << "), start "
                      << ms.best << " of " << cfg.starts << ", spread " << ms.relative_spread() << '\n';
            return exit_ok;
        }

        if (sweep->parsed())
        {
            std::vector<std::string> extra;
            if (!sweep_param.empty())
                extra.push_back("sweep.parameter=" + sweep_param);
            if (!sweep_values.empty())
                extra.push_back("sweep.values=" + sweep_values);
            const ExperimentConfig cfg = resolve_config(g, extra, Scale::desk);
            if (cfg.sweep.parameter.empty() || cfg.sweep.values.empty())
                throw ConfigError("sweep needs a parameter and values (--param/--values or [sweep])");
            const std::vector<SweepRow> rows = run_sweep(cfg, cfg.sweep.parameter, cfg.sweep.values);
            write_output(cfg, {"sweep", seconds_since(t0)},
                         [&](std::ostream &os) { write_sweep_csv(os, rows, cfg); });
            bool any_error = false;
            for (const SweepRow &r : rows)
                if (r.status != "ok")
                {
                    any_error = true;
                    std::cerr << r.parameter << "=" << r.value << ": " << r.status << '\n';
                }
            return any_error ? exit_failed : exit_ok;
        }

        if (conv->parsed())
        {
            const ExperimentConfig cfg = resolve_config(g, {}, Scale::desk);
            const Scenario sc = build_scenario(cfg.scenario);
            const std::vector<ConvergenceRun> runs = run_convergence(sc, cfg);
            nlohmann::ordered_json finals = nlohmann::ordered_json::array();
            for (const ConvergenceRun &r : runs)
                finals.push_back({{"start", r.start},
                                  {"pgam", r.pgam.trace.final_objective()},
                                  {"ao", r.ao.trace.final_objective()},
                                  {"gradient_evals", r.pgam.trace.total_gradient_evals}});
            RunMetadata meta{"convergence", seconds_since(t0)};
            meta.extra = {{"finals", finals}};
            write_output(cfg, meta, [&](std::ostream &os) { write_convergence_csv(os, runs, cfg); });
            return exit_ok;
        }

        if (grad->parsed())
        {
            std::vector<std::string> extra;
            if (instances)
                extra.push_back("run.instances=" + std::to_string(*instances));
            if (step)
                extra.push_back("run.fd_step=" + format_double(*step));
            const ExperimentConfig cfg = resolve_config(g, extra, Scale::validation);
            GradientCheckOptions o;
            o.step = cfg.run.fd_step;
            o.balance_links = !raw_links;
            o.corrupt_gradient = corrupt;
            const double tolerance = ValidationTolerances{}.gradient;
            const std::vector<GradientCheckRow> rows = run_gradient_check(cfg, o);
            write_output(cfg, {"gradient-check", seconds_since(t0)},
                         [&](std::ostream &os) { write_gradient_csv(os, rows, o, tolerance, cfg); });
            double worst = 0.0;
            for (const auto &r : rows)
                worst = std::max(worst, r.max_rel_err);
            std::cerr << "max relative error " << worst << " (tolerance " << tolerance << ")\n";
            return worst <= tolerance ? exit_ok : exit_failed;
        }

        if (mc->parsed())
        {
            std::vector<std::string> extra;
            if (trials)
                extra.push_back("run.trials=" + std::to_string(*trials));
            const ExperimentConfig cfg = resolve_config(g, extra, Scale::desk);
            const Scenario sc = build_scenario(cfg.scenario);
            const std::vector<SinrComparison> rows = run_mc_validate(sc, cfg);
            write_output(cfg, {"mc-validate", seconds_since(t0)},
                         [&](std::ostream &os) { write_mc_csv(os, rows, cfg); });
            const double tolerance = ValidationTolerances{}.sinr;
            bool ok = true;
            for (const auto &r : rows)
                ok = ok && r.rel_err <= tolerance;
            return ok ? exit_ok : exit_failed;
        }

        if (nm->parsed())
        {
            const ExperimentConfig cfg = resolve_config(g, {}, Scale::desk);
            const std::vector<double> snrs = parse_values("--snr-values", snr_values);
            const std::vector<NmseRow> rows = run_nmse(cfg, snrs, nmse_mc);
            write_output(cfg, {"nmse", seconds_since(t0)}, [&](std::ostream &os) { write_nmse_csv(os, rows, cfg); });
            return exit_ok;
        }

        if (val->parsed())
        {
            const ExperimentConfig cfg = resolve_config(g, {}, Scale::validation);
            if (cfg.scenario.bsim_atoms() > 36 || cfg.scenario.csim_atoms() > 36)
                std::cerr << "warning: validation with more than 36 atoms per layer is slow\n";
            const std::vector<ValidationCheck> checks = run_validation(cfg, val_corrupt);
            write_output(cfg, {"validate", seconds_since(t0)},
                         [&](std::ostream &os) { write_validation_csv(os, checks, cfg); });
            bool ok = true;
            for (const ValidationCheck &c : checks)
                if (!c.passed)
                {
                    ok = false;
                    std::cerr << "FAILED " << c.name << (c.user ? " user " + std::to_string(c.user) : "") << ": "
                              << c.measured << " > " << c.tolerance << '\n';
                }
            return ok ? exit_ok : exit_failed;
        }
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const ContractViolation &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failed;
    }
    return exit_ok;
}
