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


#ifndef DSIM_OPTIMIZER_HPP
#define DSIM_OPTIMIZER_HPP

// Sum-SE objective, its gradient with respect to the conjugate phase
// coefficients of both stacks, and projected gradient ascent on the unit
// circle (simultaneous and alternating variants).

#include "core.hpp"
#include "estimation.hpp"
#include "parallel.hpp"
#include "phase_profile.hpp"
#include "propagation.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "spectral_efficiency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsim
{
    class DegenerateGradient : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // ---- objective ----

    struct Evaluation
    {
        ProfileStatistics stats;
        std::vector<SinrBreakdown> sinr;
        SEReport se;
    };

    inline Evaluation evaluate(const Scenario &sc, const PhaseProfile &profile)
    {
        Evaluation ev;
        ev.stats = evaluate_statistics(sc, profile);
        const int K = sc.users();
        ev.sinr.resize(K);
        for (int k = 0; k < K; ++k)
            ev.sinr[k] = closed_form_sinr(ev.stats.psi, ev.stats.r_hat, sc.rho_data, k);
        ev.se = sum_se(ev.sinr, sc.tau, sc.tau_c);
        return ev;
    }

    inline double objective(const PhaseProfile &profile, const Scenario &sc) { return evaluate(sc, profile).se.sum_se; }

    // ---- gradient ----

    /// d f / d conj(phi^l) per BSIM layer (L x M) and d f / d conj(lambda^s) (S x N).
    struct GradientPair
    {
        CMatrix grad_phi;
        CMatrix grad_lambda;

        double squared_norm() const { return grad_phi.squaredNorm() + grad_lambda.squaredNorm(); }
    };

    struct ObjectiveGradient
    {
        double objective = 0.0;
        GradientPair grad;
    };

    namespace detail
    {
        // diag(a * b) without forming the product
        inline CVector diag_of_product(const CMatrix &a, const CMatrix &b)
        {
            return (a.array() * b.transpose().array()).rowwise().sum();
        }
    } // namespace detail

    inline ObjectiveGradient objective_and_gradient(const PhaseProfile &profile, const Scenario &sc)
    {
        const Evaluation ev = evaluate(sc, profile);
        const ProfileStatistics &st = ev.stats;
        const int K = sc.users();
        const Eigen::Index n = st.b0.rows();
        const double rho = sc.rho_data;
        const CMatrix eye = CMatrix::Identity(n, n);

        CMatrix r_sum = CMatrix::Zero(n, n);
        for (const CMatrix &r : st.r_hat)
            r_sum += r;

        // df = sum_i tr(G_i dR^_i), G_i Hermitian
        std::vector<CMatrix> y(K);
        CMatrix psi_weighted = CMatrix::Zero(n, n);
        for (int k = 0; k < K; ++k)
        {
            const SinrBreakdown &b = ev.sinr[k];
            if (!(b.interference > 0.0))
            {
                y[k] = CMatrix::Zero(n, n);
                continue;
            }
            const double ck = ev.se.prelog / (std::log(2.0) * (1.0 + b.gamma));
            const double tr_psi = trace_real(st.psi[k]);
            const double w = ck * b.signal / (b.interference * b.interference);
            const CMatrix x = r_sum - 2.0 * st.psi[k] + eye / rho;
            y[k] = (ck * 2.0 * tr_psi / b.interference) * eye - w * x;
            psi_weighted += w * st.psi[k];
        }

        CMatrix g_total = CMatrix::Zero(n, n); // sum_i a_i G_i
        double gamma_t = 0.0;                  // df / dt
        for (int i = 0; i < K; ++i)
        {
            const CMatrix bq = st.q[i] * st.r_hat[i]; // Q R^, and R^ Q = bq^H
            const CMatrix by = bq * y[i];
            CMatrix g = by + by.adjoint() - by * bq.adjoint() - psi_weighted;
            g = hermitian_part(g);
            g_total += st.scale[i] * g;
            if (sc.has_csim())
                gamma_t += sc.rx_scale * sc.losses.beta_hat[i] * trace_product_real(g, st.b0);
        }

        ObjectiveGradient out;
        out.objective = ev.se.sum_se;
        const PartialProducts pp = partial_products(sc.stack, profile);

        const int Lb = sc.stack.bsim_layers();
        const int M = sc.stack.bsim_atoms();
        const CMatrix &w1 = sc.stack.antenna_matrix();
        const CMatrix h = w1 * g_total * w1.adjoint() * st.p.adjoint() * sc.r_bsim.entries.cast<cdouble>();
        out.grad.grad_phi.resize(Lb, M);
        for (int l = 0; l < Lb; ++l)
            out.grad.grad_phi.row(l) = detail::diag_of_product(pp.bsim_prefix[l] * h, pp.bsim_suffix[l]).conjugate();

        const int S = sc.stack.csim_layers();
        out.grad.grad_lambda.resize(S, S > 0 ? sc.stack.csim_atoms() : 0);
        if (S > 0)
        {
            const CMatrix rc = sc.r_csim.entries.cast<cdouble>();
            const CMatrix e = rc * st.z.adjoint() * rc;
            for (int s = 1; s <= S; ++s)
            {
                const CMatrix gs = sc.stack.csim_matrix(s) * pp.csim_prefix[s - 1];
                out.grad.grad_lambda.row(s - 1) =
                    gamma_t * detail::diag_of_product(gs * e, pp.csim_suffix[s - 1]).conjugate();
            }
        }
        return out;
    }

    inline GradientPair grad_phase_shifts(const PhaseProfile &profile, const Scenario &sc)
    {
        return objective_and_gradient(profile, sc).grad;
    }

    /// Derivatives with respect to the angles: df/dtheta = 2 Im(grad conj(phi)).
    struct AngleGradient
    {
        RMatrix bsim;
        RMatrix csim;
    };

    inline AngleGradient angle_gradient(const GradientPair &g, const PhaseProfile &profile)
    {
        AngleGradient out;
        out.bsim.resize(g.grad_phi.rows(), g.grad_phi.cols());
        for (Eigen::Index l = 0; l < g.grad_phi.rows(); ++l)
            out.bsim.row(l) = 2.0 * (g.grad_phi.row(l).array() *
                                     profile.bsim_coefficients(static_cast<int>(l)).transpose().array().conjugate())
                                        .imag();
        out.csim.resize(g.grad_lambda.rows(), g.grad_lambda.cols());
        for (Eigen::Index s = 0; s < g.grad_lambda.rows(); ++s)
            out.csim.row(s) = 2.0 * (g.grad_lambda.row(s).array() *
                                     profile.csim_coefficients(static_cast<int>(s)).transpose().array().conjugate())
                                        .imag();
        return out;
    }

    /// The same sum SE computed from scratch in the floating type Real. With
    /// long double this is the low-noise reference for finite differences.
    template <typename Real>
    Real objective_in(const PhaseProfile &profile, const Scenario &sc)
    {
        using C = std::complex<Real>;
        using Mat = Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>;
        using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
        sc.stack.check_profile(profile);
        auto phasors = [](const auto &row) {
            Vec v(row.size());
            for (Eigen::Index i = 0; i < row.size(); ++i)
            {
                const Real a = static_cast<Real>(row(i));
                v(i) = C(std::cos(a), std::sin(a));
            }
            return v;
        };
        const int L = sc.stack.bsim_layers();
        Mat p = phasors(profile.bsim_angles().row(0)).asDiagonal();
        for (int l = 2; l <= L; ++l)
            p = phasors(profile.bsim_angles().row(l - 1)).asDiagonal() *
                (sc.stack.bsim_matrix(l).template cast<C>() * p);
        const Mat v = p * sc.stack.antenna_matrix().template cast<C>();
        const Mat rb = sc.r_bsim.entries.template cast<C>();
        const Mat b0 = v.adjoint() * rb * v;

        Real t = 0;
        const int S = sc.stack.csim_layers();
        if (S > 0)
        {
            Mat z = phasors(profile.csim_angles().row(0)).asDiagonal() * sc.stack.csim_matrix(1).template cast<C>();
            for (int s = 2; s <= S; ++s)
                z = phasors(profile.csim_angles().row(s - 1)).asDiagonal() *
                    (sc.stack.csim_matrix(s).template cast<C>() * z);
            const Mat rc = sc.r_csim.entries.template cast<C>();
            t = std::real((rc * z * rc * z.adjoint()).trace());
        }

        const int K = sc.users();
        const Eigen::Index n = b0.rows();
        const Mat eye = Mat::Identity(n, n);
        const Real tau_rho = static_cast<Real>(sc.tau) * static_cast<Real>(sc.rho_pilot);
        const Real rho = static_cast<Real>(sc.rho_data);
        std::vector<Mat> r_hat(K), psi(K);
        for (int k = 0; k < K; ++k)
        {
            Real a = static_cast<Real>(sc.losses.beta_bar[k]);
            if (S > 0)
                a += static_cast<Real>(sc.losses.beta_hat[k]) * t;
            a *= static_cast<Real>(sc.rx_scale);
            r_hat[k] = a * b0;
            const Mat q = (r_hat[k] + eye / tau_rho).inverse();
            psi[k] = r_hat[k] * q * r_hat[k];
        }
        const Real prelog = static_cast<Real>(sc.tau_c - sc.tau) / static_cast<Real>(sc.tau_c);
        Real total = 0;
        for (int k = 0; k < K; ++k)
        {
            const Real tr = std::real(psi[k].trace());
            if (!(tr > 0))
                continue;
            Real inter = tr / rho - std::real((psi[k] * psi[k]).trace());
            for (int i = 0; i < K; ++i)
                inter += std::real((r_hat[i] * psi[k]).trace());
            total += prelog * std::log2(Real(1) + tr * tr / inter);
        }
        return total;
    }

    /// Central differences of any objective f(profile) in every angle.
    template <typename Objective>
    AngleGradient finite_difference_angles(const PhaseProfile &profile, Objective &&f, double step)
    {
        require(step > 0.0, "finite-difference step must be positive");
        AngleGradient out;
        PhaseProfile work = profile;
        auto sweep = [&](RMatrix &angles, RMatrix &result) {
            result.resize(angles.rows(), angles.cols());
            for (Eigen::Index r = 0; r < angles.rows(); ++r)
                for (Eigen::Index c = 0; c < angles.cols(); ++c)
                {
                    const double base = angles(r, c);
                    const double hi = base + step;
                    const double lo = base - step;
                    angles(r, c) = hi;
                    const auto up = f(work);
                    angles(r, c) = lo;
                    const auto down = f(work);
                    angles(r, c) = base;
                    // divide by the step actually taken after rounding
                    result(r, c) = static_cast<double>((up - down) / static_cast<decltype(up)>(hi - lo));
                }
        };
        sweep(work.bsim_angles(), out.bsim);
        sweep(work.csim_angles(), out.csim);
        return out;
    }

    /// Finite-difference gradient in the conjugate-coefficient convention.
    /// Only the component tangent to the unit circle is observable, so
    /// grad = j phi (df/dtheta) / 2.
    inline GradientPair finite_difference_gradient(const PhaseProfile &profile, const Scenario &sc, double step)
    {
        const AngleGradient d =
            finite_difference_angles(profile, [&sc](const PhaseProfile &p) { return objective_in<long double>(p, sc); }, step);
        GradientPair out;
        out.grad_phi.resize(d.bsim.rows(), d.bsim.cols());
        for (Eigen::Index l = 0; l < d.bsim.rows(); ++l)
            out.grad_phi.row(l) = (0.5 * j_unit) * (profile.bsim_coefficients(static_cast<int>(l)).transpose().array() *
                                                   d.bsim.row(l).array().cast<cdouble>());
        out.grad_lambda.resize(d.csim.rows(), d.csim.cols());
        for (Eigen::Index s = 0; s < d.csim.rows(); ++s)
            out.grad_lambda.row(s) = (0.5 * j_unit) * (profile.csim_coefficients(static_cast<int>(s)).transpose().array() *
                                                      d.csim.row(s).array().cast<cdouble>());
        return out;
    }

    /// max_i |a_i - b_i| / max(|b_i|, floor)
    inline double max_relative_error(const AngleGradient &a, const AngleGradient &b, double floor)
    {
        require(a.bsim.rows() == b.bsim.rows() && a.bsim.cols() == b.bsim.cols() &&
                    a.csim.rows() == b.csim.rows() && a.csim.cols() == b.csim.cols(),
                "gradient shapes differ");
        double worst = 0.0;
        auto scan = [&](const RMatrix &x, const RMatrix &y) {
            for (Eigen::Index i = 0; i < x.size(); ++i)
                worst = std::max(worst, std::abs(x(i) - y(i)) / std::max(std::abs(y(i)), floor));
        };
        scan(a.bsim, b.bsim);
        scan(a.csim, b.csim);
        return worst;
    }

    // ---- projection ----

    inline cdouble project_unit_modulus(cdouble u)
    {
        const double r = std::abs(u);
        return r > 0.0 ? u / r : cdouble(1.0, 0.0);
    }

    inline CVector project_unit_modulus(const CVector &u)
    {
        CVector out(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i)
            out(i) = project_unit_modulus(u(i));
        return out;
    }

    // ---- line search ----

    struct LineSearchParams
    {
        double mu_init = 1e3;
        double kappa = 0.5;
        int max_iters = 100;
        double tol = 1e-5;
        int max_shrinks = 60;
        bool grow_on_accept = false; // double mu after a first-try acceptance
        int max_gradient_evals = 0;  // 0: unlimited

        void validate() const
        {
            require(mu_init > 0.0, "mu_init must be positive");
            require(kappa > 0.0 && kappa < 1.0, "kappa must lie in (0, 1)");
            require(max_iters >= 1, "max_iters must be at least 1");
            require(tol >= 0.0, "tol must be nonnegative");
            require(max_shrinks >= 1, "max_shrinks must be at least 1");
            require(max_gradient_evals >= 0, "max_gradient_evals must be nonnegative");
        }
    };

    struct OptimizerTrace
    {
        std::vector<double> objective; // entry 0 is the starting point
        std::vector<double> mu;
        std::vector<int> backtracks;
        std::vector<bool> accepted;
        std::vector<int> gradient_evals; // cumulative
        int total_gradient_evals = 0;
        double wall_seconds = 0.0;
        std::string stop_reason;

        int iterations() const { return static_cast<int>(objective.size()) - 1; }
        double final_objective() const { return objective.back(); }

        bool non_decreasing() const
        {
            for (std::size_t i = 1; i < objective.size(); ++i)
                if (objective[i] < objective[i - 1])
                    return false;
            return true;
        }

        void push(double f, double step, int shrinks, bool ok, int evals)
        {
            objective.push_back(f);
            mu.push_back(step);
            backtracks.push_back(shrinks);
            accepted.push_back(ok);
            gradient_evals.push_back(evals);
        }
    };

    struct OptimizeResult
    {
        PhaseProfile profile;
        OptimizerTrace trace;
    };

    namespace detail
    {
        struct StepOutcome
        {
            bool moved = false;
            PhaseProfile next;
            double objective = 0.0;
            double mu = 0.0;
            int backtracks = 0;
        };

        // One backtracked projected step on the selected blocks. Accepts when
        // f(next) > f + 2 Re<grad, d> - |d|^2 / mu and f(next) >= f.
        inline StepOutcome backtracking_step(const Scenario &sc, const PhaseProfile &x, double f,
                                             const GradientPair &g, double mu, bool step_bsim, bool step_csim,
                                             const LineSearchParams &params)
        {
            StepOutcome out;
            out.mu = mu;
            double last_linear = 0.0;
            for (int shrink = 0; shrink <= params.max_shrinks; ++shrink)
            {
                PhaseProfile cand = x;
                double linear = 0.0;
                double dist = 0.0;
                auto move = [&](const CMatrix &grad, bool bsim) {
                    for (Eigen::Index l = 0; l < grad.rows(); ++l)
                    {
                        const int layer = static_cast<int>(l);
                        const CVector cur = bsim ? x.bsim_coefficients(layer) : x.csim_coefficients(layer);
                        const CVector gl = grad.row(l).transpose();
                        const CVector nxt = project_unit_modulus(CVector(cur + out.mu * gl));
                        const CVector d = nxt - cur;
                        linear += 2.0 * std::real(gl.dot(d));
                        dist += d.squaredNorm();
                        if (bsim)
                            cand.set_bsim_layer_from_coefficients(layer, nxt);
                        else
                            cand.set_csim_layer_from_coefficients(layer, nxt);
                    }
                };
                if (step_bsim)
                    move(g.grad_phi, true);
                if (step_csim)
                    move(g.grad_lambda, false);

                if (dist == 0.0)
                    return out; // the step does not leave the current point
                const double fn = objective(cand, sc);
                if (fn > f + linear - dist / out.mu && fn >= f)
                {
                    out.moved = true;
                    out.next = std::move(cand);
                    out.objective = fn;
                    out.backtracks = shrink;
                    return out;
                }
                last_linear = linear;
                // the predicted gain is at rounding level: nothing left to find
                if (linear <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f)))
                    return out;
                out.mu *= params.kappa;
            }
            std::ostringstream msg;
            msg << "line search did not terminate after " << params.max_shrinks << " shrinks (mu=" << out.mu
                << ", objective=" << f << ", predicted increase=" << last_linear
                << ", gradient norm=" << std::sqrt(g.squared_norm()) << ")";
            throw DegenerateGradient(msg.str());
        }

        class Stopwatch
        {
        public:
            double seconds() const
            {
                return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
            }

        private:
            std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
        };

        inline bool budget_left(const LineSearchParams &p, int evals)
        {
            return p.max_gradient_evals <= 0 || evals < p.max_gradient_evals;
        }
    } // namespace detail

    /// Simultaneous projected gradient ascent on both stacks.
    inline OptimizeResult pgam_optimize(const PhaseProfile &initial, const Scenario &sc,
                                        const LineSearchParams &params = {})
    {
        params.validate();
        sc.stack.check_profile(initial);
        detail::Stopwatch clock;
        OptimizeResult res{initial, {}};
        OptimizerTrace &tr = res.trace;
        ObjectiveGradient og = objective_and_gradient(res.profile, sc);
        int evals = 1;
        double mu = params.mu_init;
        tr.push(og.objective, mu, 0, false, evals);
        tr.stop_reason = "max_iters";
        if (og.grad.squared_norm() == 0.0)
            tr.stop_reason = "zero_gradient";
        else
            for (int it = 1; it <= params.max_iters; ++it)
            {
                detail::StepOutcome st =
                    detail::backtracking_step(sc, res.profile, og.objective, og.grad, mu, true, true, params);
                if (!st.moved)
                {
                    tr.stop_reason = "stationary";
                    break;
                }
                mu = st.mu;
                if (params.grow_on_accept && st.backtracks == 0)
                    mu *= 2.0;
                const double gain = st.objective - og.objective;
                res.profile = std::move(st.next);
                og.objective = st.objective;
                tr.push(og.objective, st.mu, st.backtracks, true, evals);
                if (gain < params.tol)
                {
                    tr.stop_reason = "tolerance";
                    break;
                }
                if (it == params.max_iters)
                    break;
                if (!detail::budget_left(params, evals))
                {
                    tr.stop_reason = "gradient_budget";
                    break;
                }
                og = objective_and_gradient(res.profile, sc);
                ++evals;
            }
        tr.total_gradient_evals = evals;
        tr.wall_seconds = clock.seconds();
        return res;
    }

    /// Alternating baseline: per outer iteration one backtracked step on the
    /// BSIM with the CSIM frozen, then one on the CSIM with the BSIM frozen.
    /// Each block keeps its own step size. The trace's mu is the BSIM one.
    inline OptimizeResult ao_optimize(const PhaseProfile &initial, const Scenario &sc,
                                      const LineSearchParams &params = {})
    {
        params.validate();
        sc.stack.check_profile(initial);
        detail::Stopwatch clock;
        OptimizeResult res{initial, {}};
        OptimizerTrace &tr = res.trace;
        const bool has_csim = sc.stack.csim_layers() > 0;
        ObjectiveGradient og = objective_and_gradient(res.profile, sc);
        int evals = 1;
        double mu_b = params.mu_init;
        double mu_c = params.mu_init;
        tr.push(og.objective, mu_b, 0, false, evals);
        tr.stop_reason = "max_iters";
        if (og.grad.squared_norm() == 0.0)
            tr.stop_reason = "zero_gradient";
        else
            for (int it = 1; it <= params.max_iters; ++it)
            {
                const double start = og.objective;
                bool moved = false;
                int shrinks = 0;
                bool out_of_budget = false;

                detail::StepOutcome sb =
                    detail::backtracking_step(sc, res.profile, og.objective, og.grad, mu_b, true, false, params);
                if (sb.moved)
                {
                    moved = true;
                    mu_b = sb.mu;
                    if (params.grow_on_accept && sb.backtracks == 0)
                        mu_b *= 2.0;
                    shrinks += sb.backtracks;
                    res.profile = std::move(sb.next);
                    og.objective = sb.objective;
                }
                if (has_csim)
                {
                    if (sb.moved)
                    {
                        if (detail::budget_left(params, evals))
                        {
                            og = objective_and_gradient(res.profile, sc);
                            ++evals;
                        }
                        else
                            out_of_budget = true;
                    }
                    if (!out_of_budget)
                    {
                        detail::StepOutcome sc_step = detail::backtracking_step(sc, res.profile, og.objective,
                                                                                og.grad, mu_c, false, true, params);
                        if (sc_step.moved)
                        {
                            moved = true;
                            mu_c = sc_step.mu;
                            if (params.grow_on_accept && sc_step.backtracks == 0)
                                mu_c *= 2.0;
                            shrinks += sc_step.backtracks;
                            res.profile = std::move(sc_step.next);
                            og.objective = sc_step.objective;
                        }
                    }
                }
                if (!moved)
                {
                    tr.stop_reason = "stationary";
                    break;
                }
                tr.push(og.objective, mu_b, shrinks, true, evals);
                if (out_of_budget)
                {
                    tr.stop_reason = "gradient_budget";
                    break;
                }
                if (og.objective - start < params.tol)
                {
                    tr.stop_reason = "tolerance";
                    break;
                }
                if (it == params.max_iters)
                    break;
                if (!detail::budget_left(params, evals))
                {
                    tr.stop_reason = "gradient_budget";
                    break;
                }
                og = objective_and_gradient(res.profile, sc);
                ++evals;
            }
        tr.total_gradient_evals = evals;
        tr.wall_seconds = clock.seconds();
        return res;
    }

    enum class Method
    {
        pgam,
        ao,
    };

    inline OptimizeResult optimize(Method m, const PhaseProfile &initial, const Scenario &sc,
                                   const LineSearchParams &params = {})
    {
        return m == Method::pgam ? pgam_optimize(initial, sc, params) : ao_optimize(initial, sc, params);
    }

    // ---- initialization and multi-start ----

    inline constexpr std::uint64_t start_stream_base = 0x10000000000ull;

    /// Uniform angles on [0, 2 pi), BSIM first, from stream (seed, base + index).
    inline PhaseProfile random_profile(const Scenario &sc, std::uint64_t seed, std::uint64_t index)
    {
        std::mt19937_64 engine = make_stream(seed, start_stream_base + index);
        return PhaseProfile::random(sc.stack.bsim_layers(), sc.stack.bsim_atoms(), sc.stack.csim_layers(),
                                    sc.stack.csim_layers() > 0 ? sc.stack.csim_atoms() : 0, engine);
    }

    struct MultiStartResult
    {
        std::vector<OptimizeResult> runs;
        std::size_t best = 0;

        const OptimizeResult &best_run() const { return runs[best]; }
        std::vector<double> finals() const
        {
            std::vector<double> f;
            for (const auto &r : runs)
                f.push_back(r.trace.final_objective());
            return f;
        }
        /// (max - min) / max over the final objectives
        double relative_spread() const
        {
            const std::vector<double> f = finals();
            const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
            return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
        }
    };

    inline MultiStartResult multi_start(const Scenario &sc, const LineSearchParams &params, int n_starts,
                                        std::uint64_t seed, Method method = Method::pgam, int threads = 0)
    {
        require(n_starts >= 1, "n_starts must be at least 1");
        MultiStartResult out;
        out.runs.resize(n_starts);
        parallel_for(
            static_cast<std::size_t>(n_starts),
            [&](std::size_t s) { out.runs[s] = optimize(method, random_profile(sc, seed, s), sc, params); },
            threads);
        for (std::size_t s = 1; s < out.runs.size(); ++s)
            if (out.runs[s].trace.final_objective() > out.runs[out.best].trace.final_objective())
                out.best = s;
        return out;
    }

} // namespace dsim

#endif // DSIM_OPTIMIZER_HPP
