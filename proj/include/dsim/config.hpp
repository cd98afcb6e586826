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


#ifndef DSIM_CONFIG_HPP
#define DSIM_CONFIG_HPP

// Experiment configuration: sectioned key = value files ([scenario],
// [optimizer], [run], [sweep]), validation with key-specific messages and the
// resolved-config hash carried by every output row.
//
// Needs Boost.PropertyTree and nlohmann/json on the include path.

#include "optimizer.hpp"
#include "scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp> // nlohmann/json

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsim
{
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct RunConfig
    {
        std::uint64_t seed = 1;
        std::size_t trials = 10000;              // Monte Carlo SINR trials
        std::size_t estimation_trials = 100000;  // pilot trials for estimator checks
        std::size_t covariance_draws = 200000;   // channel draws for the covariance check
        int random_baselines = 10;               // random profiles averaged for the baseline
        int instances = 20;                      // gradient-check instances
        double fd_step = 1e-6;
        int threads = 0;
        std::string out;
    };

    struct SweepConfig
    {
        std::string parameter;
        std::vector<double> values;
    };

    struct ExperimentConfig
    {
        SystemConfig scenario;
        LineSearchParams optimizer;
        Method method = Method::pgam;
        int starts = 5;
        RunConfig run;
        SweepConfig sweep;
        std::set<std::string> explicit_keys; // "section.key" present in the file or set on the command line

        bool is_explicit(const std::string &key) const { return explicit_keys.count(key) > 0; }
    };

    inline const std::vector<std::string> &sweep_parameters()
    {
        static const std::vector<std::string> names{"M", "N", "L", "S", "K", "snr_db", "M_BS"};
        return names;
    }

    namespace detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        inline double parse_double(const std::string &key, const std::string &raw)
        {
            const std::string v = trim(raw);
            double out = 0.0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
                throw ConfigError("invalid number for key '" + key + "': '" + raw + "'");
            return out;
        }

        inline long long parse_integer(const std::string &key, const std::string &raw)
        {
            const std::string v = trim(raw);
            long long out = 0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
                throw ConfigError("invalid integer for key '" + key + "': '" + raw + "'");
            return out;
        }

        inline bool parse_bool(const std::string &key, const std::string &raw)
        {
            const std::string v = trim(raw);
            if (v == "true" || v == "1" || v == "yes" || v == "on")
                return true;
            if (v == "false" || v == "0" || v == "no" || v == "off")
                return false;
            throw ConfigError("invalid boolean for key '" + key + "': '" + raw + "'");
        }

        inline std::vector<double> parse_list(const std::string &key, const std::string &raw)
        {
            std::vector<double> out;
            std::stringstream ss(raw);
            std::string item;
            while (std::getline(ss, item, ','))
                out.push_back(parse_double(key, item));
            if (out.empty())
                throw ConfigError("empty list for key '" + key + "'");
            return out;
        }

        // Raw grid keys, resolved once the whole file has been read.
        struct GridKeys
        {
            long long total = 0, x = 0, y = 0; // 0: not given
        };

        inline void resolve_grid(const std::string &name, const GridKeys &g, int &out_x, int &out_y)
        {
            const std::string kx = name + "_x", ky = name + "_y";
            if (g.x > 0 && g.y > 0)
            {
                if (g.total > 0 && g.total != g.x * g.y)
                    throw ConfigError("grid mismatch: " + name + "=" + std::to_string(g.total) + " but " + kx + "*" +
                                      ky + "=" + std::to_string(g.x * g.y));
                out_x = static_cast<int>(g.x);
                out_y = static_cast<int>(g.y);
            }
            else if (g.x > 0 || g.y > 0)
            {
                const long long given = g.x > 0 ? g.x : g.y;
                if (g.total <= 0)
                    throw ConfigError("grid mismatch: " + (g.x > 0 ? ky : kx) + " or " + name +
                                      " is needed together with " + (g.x > 0 ? kx : ky));
                if (g.total % given != 0)
                    throw ConfigError("grid mismatch: " + name + "=" + std::to_string(g.total) +
                                      " is not a multiple of " + (g.x > 0 ? kx : ky) + "=" + std::to_string(given));
                out_x = static_cast<int>(g.x > 0 ? g.x : g.total / given);
                out_y = static_cast<int>(g.y > 0 ? g.y : g.total / given);
            }
            else if (g.total > 0)
            {
                const auto side = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(g.total))));
                if (side * side != g.total)
                    throw ConfigError("grid mismatch: " + name + "=" + std::to_string(g.total) +
                                      " is not a square; give " + kx + " and " + ky);
                out_x = out_y = static_cast<int>(side);
            }
        }

        inline int positive_int(const std::string &key, const std::string &raw)
        {
            const long long v = parse_integer(key, raw);
            if (v <= 0 || v > 1'000'000)
                throw ConfigError("value out of range for key '" + key + "': " + raw);
            return static_cast<int>(v);
        }

        inline int nonnegative_int(const std::string &key, const std::string &raw)
        {
            const long long v = parse_integer(key, raw);
            if (v < 0 || v > 1'000'000)
                throw ConfigError("value out of range for key '" + key + "': " + raw);
            return static_cast<int>(v);
        }

        inline double positive_double(const std::string &key, const std::string &raw)
        {
            const double v = parse_double(key, raw);
            if (!(v > 0.0))
                throw ConfigError("value out of range for key '" + key + "': " + raw + " (must be > 0)");
            return v;
        }
    } // namespace detail

    /// Applies one key. Grid keys are collected in `grids` and resolved later.
    inline void apply_config_key(ExperimentConfig &c, std::map<std::string, detail::GridKeys> &grids,
                                 const std::string &section, const std::string &name, const std::string &value)
    {
        using namespace detail;
        const std::string key = section + "." + name;
        using Setter = std::function<void(const std::string &)>;
        SystemConfig &s = c.scenario;
        LineSearchParams &o = c.optimizer;
        RunConfig &r = c.run;
        const std::map<std::string, Setter> table{
            // scenario
            {"scenario.M_BS", [&](const std::string &v) { s.bs_antennas = positive_int(key, v); }},
            {"scenario.K", [&](const std::string &v) { s.users = positive_int(key, v); }},
            {"scenario.M", [&](const std::string &v) { grids["M"].total = positive_int(key, v); }},
            {"scenario.M_x", [&](const std::string &v) { grids["M"].x = positive_int(key, v); }},
            {"scenario.M_y", [&](const std::string &v) { grids["M"].y = positive_int(key, v); }},
            {"scenario.N", [&](const std::string &v) { grids["N"].total = positive_int(key, v); }},
            {"scenario.N_x", [&](const std::string &v) { grids["N"].x = positive_int(key, v); }},
            {"scenario.N_y", [&](const std::string &v) { grids["N"].y = positive_int(key, v); }},
            {"scenario.L", [&](const std::string &v) { s.bsim_layers = positive_int(key, v); }},
            {"scenario.S", [&](const std::string &v) { s.csim_layers = nonnegative_int(key, v); }},
            {"scenario.frequency_hz", [&](const std::string &v) { s.carrier_hz = positive_double(key, v); }},
            {"scenario.thickness_wavelengths",
             [&](const std::string &v) { s.thickness_wavelengths = positive_double(key, v); }},
            {"scenario.H_BS", [&](const std::string &v) { s.bs_height = parse_double(key, v); }},
            {"scenario.x_CSIM", [&](const std::string &v) { s.csim_pos_x = parse_double(key, v); }},
            {"scenario.y_CSIM", [&](const std::string &v) { s.csim_pos_y = parse_double(key, v); }},
            {"scenario.d0", [&](const std::string &v) { s.user_span = positive_double(key, v); }},
            {"scenario.bs_gain_dbi", [&](const std::string &v) { s.bs_gain_dbi = parse_double(key, v); }},
            {"scenario.user_gain_dbi", [&](const std::string &v) { s.user_gain_dbi = parse_double(key, v); }},
            {"scenario.alpha_bsim_csim", [&](const std::string &v) { s.alpha_bsim_csim = positive_double(key, v); }},
            {"scenario.alpha_csim_user", [&](const std::string &v) { s.alpha_csim_user = positive_double(key, v); }},
            {"scenario.alpha_direct", [&](const std::string &v) { s.alpha_direct = positive_double(key, v); }},
            {"scenario.path_loss_profile",
             [&](const std::string &v) {
                 const std::string p = trim(v);
                 if (p == "default")
                 {
                     s.alpha_csim_user = 2.8;
                     s.alpha_direct = 3.5;
                 }
                 else if (p == "measured")
                 {
                     s.alpha_csim_user = 2.29;
                     s.alpha_direct = 1.88;
                 }
                 else
                     throw ConfigError("invalid value for key '" + key + "': '" + v + "' (default or measured)");
             }},
            {"scenario.c0", [&](const std::string &v) { s.c0 = positive_double(key, v); }},
            {"scenario.snr_db",
             [&](const std::string &v) { s.snr_pilot_db = s.snr_data_db = parse_double(key, v); }},
            {"scenario.snr_pilot_db", [&](const std::string &v) { s.snr_pilot_db = parse_double(key, v); }},
            {"scenario.snr_data_db", [&](const std::string &v) { s.snr_data_db = parse_double(key, v); }},
            {"scenario.tau", [&](const std::string &v) { s.pilot_length = positive_int(key, v); }},
            {"scenario.tau_c", [&](const std::string &v) { s.coherence_length = positive_int(key, v); }},
            {"scenario.snr_reference",
             [&](const std::string &v) {
                 const std::string p = trim(v);
                 if (p == "direct_midpoint")
                     s.snr_reference = SnrReference::direct_midpoint;
                 else if (p == "transmit")
                     s.snr_reference = SnrReference::transmit;
                 else
                     throw ConfigError("invalid value for key '" + key + "': '" + v +
                                       "' (direct_midpoint or transmit)");
             }},
            // optimizer
            {"optimizer.method",
             [&](const std::string &v) {
                 const std::string p = trim(v);
                 if (p == "pgam")
                     c.method = Method::pgam;
                 else if (p == "ao")
                     c.method = Method::ao;
                 else
                     throw ConfigError("invalid value for key '" + key + "': '" + v + "' (pgam or ao)");
             }},
            {"optimizer.starts", [&](const std::string &v) { c.starts = positive_int(key, v); }},
            {"optimizer.mu_init", [&](const std::string &v) { o.mu_init = positive_double(key, v); }},
            {"optimizer.kappa", [&](const std::string &v) { o.kappa = parse_double(key, v); }},
            {"optimizer.max_iters", [&](const std::string &v) { o.max_iters = positive_int(key, v); }},
            {"optimizer.tol", [&](const std::string &v) { o.tol = parse_double(key, v); }},
            {"optimizer.max_shrinks", [&](const std::string &v) { o.max_shrinks = positive_int(key, v); }},
            {"optimizer.grow_on_accept", [&](const std::string &v) { o.grow_on_accept = parse_bool(key, v); }},
            {"optimizer.max_gradient_evals",
             [&](const std::string &v) { o.max_gradient_evals = nonnegative_int(key, v); }},
            // run
            {"run.seed",
             [&](const std::string &v) {
                 const long long x = parse_integer(key, v);
                 if (x < 0)
                     throw ConfigError("value out of range for key '" + key + "': " + v);
                 r.seed = static_cast<std::uint64_t>(x);
             }},
            {"run.trials", [&](const std::string &v) { r.trials = positive_int(key, v); }},
            {"run.estimation_trials", [&](const std::string &v) { r.estimation_trials = positive_int(key, v); }},
            {"run.covariance_draws", [&](const std::string &v) { r.covariance_draws = positive_int(key, v); }},
            {"run.random_baselines", [&](const std::string &v) { r.random_baselines = positive_int(key, v); }},
            {"run.instances", [&](const std::string &v) { r.instances = positive_int(key, v); }},
            {"run.fd_step", [&](const std::string &v) { r.fd_step = positive_double(key, v); }},
            {"run.threads", [&](const std::string &v) { r.threads = nonnegative_int(key, v); }},
            {"run.out", [&](const std::string &v) { r.out = trim(v); }},
            // sweep
            {"sweep.parameter",
             [&](const std::string &v) {
                 const std::string p = trim(v);
                 const auto &names = sweep_parameters();
                 if (std::find(names.begin(), names.end(), p) == names.end())
                     throw ConfigError("invalid value for key '" + key + "': '" + v + "'");
                 c.sweep.parameter = p;
             }},
            {"sweep.values", [&](const std::string &v) { c.sweep.values = parse_list(key, v); }},
        };
        const auto it = table.find(key);
        if (it == table.end())
            throw ConfigError("unknown key '" + key + "'");
        it->second(value);
        c.explicit_keys.insert(key);
    }

    /// Checks that need the whole configuration.
    inline void validate_config(const ExperimentConfig &c)
    {
        try
        {
            c.scenario.validate();
            c.optimizer.validate();
        }
        catch (const ContractViolation &e)
        {
            throw ConfigError(std::string("invalid configuration: ") + e.what());
        }
        if (c.scenario.bs_height < 0.0)
            throw ConfigError("value out of range for key 'scenario.H_BS' (must be >= 0)");
    }

    inline void resolve_grids(ExperimentConfig &c, const std::map<std::string, detail::GridKeys> &grids)
    {
        if (auto it = grids.find("M"); it != grids.end())
            detail::resolve_grid("M", it->second, c.scenario.bsim_x, c.scenario.bsim_y);
        if (auto it = grids.find("N"); it != grids.end())
            detail::resolve_grid("N", it->second, c.scenario.csim_x, c.scenario.csim_y);
    }

    /// Parses INI text. Absent keys keep the full-scale defaults.
    inline ExperimentConfig parse_config(std::istream &in)
    {
        namespace pt = boost::property_tree;
        pt::ptree tree;
        try
        {
            pt::read_ini(in, tree);
        }
        catch (const pt::ini_parser_error &e)
        {
            throw ConfigError(std::string("config parse error: ") + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
        }
        ExperimentConfig c;
        std::map<std::string, detail::GridKeys> grids;
        for (const auto &[section, body] : tree)
        {
            if (body.empty())
                throw ConfigError("unknown key '" + section + "' (keys must be inside a section)");
            for (const auto &[name, leaf] : body)
                apply_config_key(c, grids, section, name, leaf.data());
        }
        resolve_grids(c, grids);
        validate_config(c);
        return c;
    }

    inline ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        return parse_config(in);
    }

    /// Applies "section.key=value" overrides on top of a loaded config.
    inline void apply_overrides(ExperimentConfig &c, const std::vector<std::string> &assignments)
    {
        std::map<std::string, detail::GridKeys> grids;
        // keep explicit grid keys of the file consistent with the new ones
        for (const char *name : {"M", "N"})
        {
            const bool bsim = std::string(name) == "M";
            detail::GridKeys g;
            g.x = bsim ? c.scenario.bsim_x : c.scenario.csim_x;
            g.y = bsim ? c.scenario.bsim_y : c.scenario.csim_y;
            grids[name] = g;
        }
        for (const std::string &a : assignments)
        {
            const auto eq = a.find('=');
            const auto dot = a.find('.');
            if (eq == std::string::npos || dot == std::string::npos || dot > eq)
                throw ConfigError("override must look like section.key=value: '" + a + "'");
            const std::string section = detail::trim(a.substr(0, dot));
            const std::string name = detail::trim(a.substr(dot + 1, eq - dot - 1));
            if (section == "scenario" && (name == "M" || name == "N"))
                grids[name].x = grids[name].y = 0; // a new total replaces the old shape
            apply_config_key(c, grids, section, name, a.substr(eq + 1));
        }
        resolve_grids(c, grids);
        validate_config(c);
    }

    /// Reduced problem size for keys the user did not set: 7 x 7 atoms and two
    /// layers per stack, the CI scale of the experiments.
    inline void apply_desk_scale(ExperimentConfig &c)
    {
        const auto untouched = [&](std::initializer_list<const char *> keys) {
            for (const char *k : keys)
                if (c.is_explicit(k))
                    return false;
            return true;
        };
        if (untouched({"scenario.M", "scenario.M_x", "scenario.M_y"}))
            c.scenario.bsim_x = c.scenario.bsim_y = 7;
        if (untouched({"scenario.N", "scenario.N_x", "scenario.N_y"}))
            c.scenario.csim_x = c.scenario.csim_y = 7;
        if (untouched({"scenario.L"}))
            c.scenario.bsim_layers = 2;
        if (untouched({"scenario.S"}))
            c.scenario.csim_layers = 2;
        validate_config(c);
    }

    /// The smallest validation scale: 3 x 3 atoms, two layers, two users.
    inline void apply_validation_scale(ExperimentConfig &c)
    {
        apply_desk_scale(c);
        if (!c.is_explicit("scenario.M") && !c.is_explicit("scenario.M_x") && !c.is_explicit("scenario.M_y"))
            c.scenario.bsim_x = c.scenario.bsim_y = 3;
        if (!c.is_explicit("scenario.N") && !c.is_explicit("scenario.N_x") && !c.is_explicit("scenario.N_y"))
            c.scenario.csim_x = c.scenario.csim_y = 3;
        if (!c.is_explicit("scenario.K"))
            c.scenario.users = 2;
        validate_config(c);
    }

    // ---- serialization and hashing ----

    inline const char *to_string(Method m) { return m == Method::pgam ? "pgam" : "ao"; }

    inline nlohmann::ordered_json to_json(const ExperimentConfig &c)
    {
        const SystemConfig &s = c.scenario;
        nlohmann::ordered_json j;
        j["scenario"] = {
            {"M_BS", s.bs_antennas},
            {"K", s.users},
            {"M", s.bsim_atoms()},
            {"M_x", s.bsim_x},
            {"M_y", s.bsim_y},
            {"N", s.csim_atoms()},
            {"N_x", s.csim_x},
            {"N_y", s.csim_y},
            {"L", s.bsim_layers},
            {"S", s.csim_layers},
            {"frequency_hz", s.carrier_hz},
            {"wavelength_m", s.wavelength()},
            {"thickness_wavelengths", s.thickness_wavelengths},
            {"H_BS", s.bs_height},
            {"x_CSIM", s.csim_pos_x},
            {"y_CSIM", s.csim_pos_y},
            {"d0", s.user_span},
            {"bs_gain_dbi", s.bs_gain_dbi},
            {"user_gain_dbi", s.user_gain_dbi},
            {"alpha_bsim_csim", s.alpha_bsim_csim},
            {"alpha_csim_user", s.alpha_csim_user},
            {"alpha_direct", s.alpha_direct},
            {"c0", s.c0},
            {"snr_pilot_db", s.snr_pilot_db},
            {"snr_data_db", s.snr_data_db},
            {"tau", s.tau()},
            {"tau_c", s.coherence_length},
            {"snr_reference", s.snr_reference == SnrReference::transmit ? "transmit" : "direct_midpoint"},
        };
        const LineSearchParams &o = c.optimizer;
        j["optimizer"] = {
            {"method", to_string(c.method)},
            {"starts", c.starts},
            {"mu_init", o.mu_init},
            {"kappa", o.kappa},
            {"max_iters", o.max_iters},
            {"tol", o.tol},
            {"max_shrinks", o.max_shrinks},
            {"grow_on_accept", o.grow_on_accept},
            {"max_gradient_evals", o.max_gradient_evals},
        };
        const RunConfig &r = c.run;
        // threads and the output path do not change results and stay out of the hash
        j["run"] = {
            {"seed", r.seed},
            {"trials", r.trials},
            {"estimation_trials", r.estimation_trials},
            {"covariance_draws", r.covariance_draws},
            {"random_baselines", r.random_baselines},
            {"instances", r.instances},
            {"fd_step", r.fd_step},
        };
        j["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}};
        return j;
    }

    /// FNV-1a over the compact JSON of the resolved config, as 16 hex digits.
    inline std::string config_hash(const ExperimentConfig &c)
    {
        const std::string text = to_json(c).dump();
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char ch : text)
        {
            h ^= ch;
            h *= 1099511628211ull;
        }
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << h;
        return os.str();
    }

} // namespace dsim

#endif // DSIM_CONFIG_HPP
