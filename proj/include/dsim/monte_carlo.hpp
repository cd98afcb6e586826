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


#ifndef DSIM_MONTE_CARLO_HPP
#define DSIM_MONTE_CARLO_HPP

// Sampling oracles for the closed forms: channel covariance, LMMSE estimate
// statistics and the use-and-then-forget SINR with MRC. Trial t always uses
// stream (seed, t), and partial sums are folded in a fixed chunk order.

#include "channel_stats.hpp"
#include "estimation.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "spectral_efficiency.hpp"

#include <cstdint>
#include <vector>

namespace dsim
{
    inline constexpr std::size_t monte_carlo_chunk = 250;

    /// Per-profile state shared by all trials.
    struct TrialContext
    {
        const Scenario *scenario = nullptr;
        ProfileStatistics stats;
        PilotConfig pilots;
        DrawContext draw;

        TrialContext(const Scenario &sc, const PhaseProfile &profile)
            : scenario(&sc), stats(evaluate_statistics(sc, profile)),
              pilots(make_pilots(sc.tau, sc.users(), sc.rho_pilot))
        {
            draw.sqrt_r_bsim = &sc.sqrt_r_bsim;
            draw.sqrt_r_csim = &sc.sqrt_r_csim;
            draw.losses = &sc.losses;
            draw.z = sc.has_csim() ? &stats.z : nullptr;
            draw.combiner = &stats.combiner;
            draw.scale = sc.rx_scale;
        }
        TrialContext(const TrialContext &) = delete;
        TrialContext &operator=(const TrialContext &) = delete;
    };

    /// One trial: channels, pilot observation and LMMSE estimates.
    struct TrialDraw
    {
        ChannelRealization channels;
        std::vector<CVector> r;
        std::vector<CVector> c_hat;
    };

    inline TrialDraw draw_trial(const TrialContext &ctx, std::uint64_t seed, std::uint64_t trial)
    {
        std::mt19937_64 engine = make_stream(seed, trial);
        ComplexGaussian gauss(engine);
        TrialDraw out;
        out.channels = draw_channels(gauss, ctx.draw);
        out.r = simulate_pilot_rx(out.channels.c, ctx.pilots, gauss);
        const int K = ctx.scenario->users();
        out.c_hat.resize(K);
        for (int k = 0; k < K; ++k)
            out.c_hat[k] = lmmse_estimate(out.r[k], ctx.stats.r_hat[k], ctx.stats.q[k]);
        return out;
    }

    // ---- channel covariance ----

    /// Sample E[h_k h_k^H] per user.
    inline std::vector<CMatrix> monte_carlo_channel_covariance(const Scenario &sc, const PhaseProfile &profile,
                                                               std::size_t draws, std::uint64_t seed,
                                                               int threads = 0)
    {
        require(draws >= 1, "at least one draw is required");
        const TrialContext ctx(sc, profile);
        const int K = sc.users();
        const Eigen::Index M = sc.sqrt_r_bsim.rows();
        using Acc = std::vector<CMatrix>;
        Acc zero(K, CMatrix::Zero(M, M));
        Acc sum = ordered_reduce(
            draws, monte_carlo_chunk, zero,
            [&](std::size_t b, std::size_t e) {
                Acc part(K, CMatrix::Zero(M, M));
                for (std::size_t t = b; t < e; ++t)
                {
                    std::mt19937_64 engine = make_stream(seed, t);
                    ComplexGaussian gauss(engine);
                    const ChannelRealization ch = draw_channels(gauss, ctx.draw);
                    for (int k = 0; k < K; ++k)
                        part[k].noalias() += ch.h[k] * ch.h[k].adjoint();
                }
                return part;
            },
            [](Acc &a, const Acc &p) {
                for (std::size_t k = 0; k < a.size(); ++k)
                    a[k] += p[k];
            },
            threads);
        for (CMatrix &m : sum)
            m /= static_cast<double>(draws);
        return sum;
    }

    // ---- estimator statistics ----

    struct EstimationSample
    {
        CMatrix estimate_cov;   // E[c^ c^^H]
        CMatrix error_cov;      // E[c~ c~^H]
        CMatrix cross_cov;      // E[c^ c~^H]
        CMatrix channel_cov;    // E[c c^H]
        double nmse = 0.0;      // E||c~||^2 / E||c||^2
    };

    inline std::vector<EstimationSample> monte_carlo_estimation(const Scenario &sc, const PhaseProfile &profile,
                                                                std::size_t trials, std::uint64_t seed,
                                                                int threads = 0)
    {
        require(trials >= 1, "at least one trial is required");
        const TrialContext ctx(sc, profile);
        const int K = sc.users();
        const Eigen::Index n = ctx.stats.combiner.cols();
        struct Part
        {
            std::vector<CMatrix> est, err, cross, chan;
        };
        auto make = [&]() {
            Part p;
            p.est.assign(K, CMatrix::Zero(n, n));
            p.err = p.cross = p.chan = p.est;
            return p;
        };
        Part sum = ordered_reduce(
            trials, monte_carlo_chunk, make(),
            [&](std::size_t b, std::size_t e) {
                Part p = make();
                for (std::size_t t = b; t < e; ++t)
                {
                    const TrialDraw d = draw_trial(ctx, seed, t);
                    for (int k = 0; k < K; ++k)
                    {
                        const CVector &c = d.channels.c[k];
                        const CVector err = c - d.c_hat[k];
                        p.est[k].noalias() += d.c_hat[k] * d.c_hat[k].adjoint();
                        p.err[k].noalias() += err * err.adjoint();
                        p.cross[k].noalias() += d.c_hat[k] * err.adjoint();
                        p.chan[k].noalias() += c * c.adjoint();
                    }
                }
                return p;
            },
            [](Part &a, const Part &p) {
                for (std::size_t k = 0; k < a.est.size(); ++k)
                {
                    a.est[k] += p.est[k];
                    a.err[k] += p.err[k];
                    a.cross[k] += p.cross[k];
                    a.chan[k] += p.chan[k];
                }
            },
            threads);
        std::vector<EstimationSample> out(K);
        const double inv = 1.0 / static_cast<double>(trials);
        for (int k = 0; k < K; ++k)
        {
            out[k].estimate_cov = sum.est[k] * inv;
            out[k].error_cov = sum.err[k] * inv;
            out[k].cross_cov = sum.cross[k] * inv;
            out[k].channel_cov = sum.chan[k] * inv;
            out[k].nmse = trace_real(out[k].error_cov) / trace_real(out[k].channel_cov);
        }
        return out;
    }

    // ---- SINR ----

    /// Empirical SINR with v_k = c^_k, divided through by rho like the closed
    /// form: S = |E v^H c_k|^2, I = Var(v^H c_k) + sum_{i!=k} E|v^H c_i|^2 + E||v||^2 / rho.
    inline std::vector<SinrBreakdown> monte_carlo_sinr(const Scenario &sc, const PhaseProfile &profile,
                                                       std::size_t trials, std::uint64_t seed, int threads = 0)
    {
        require(trials >= 1, "at least one trial is required");
        const TrialContext ctx(sc, profile);
        const int K = sc.users();
        struct Part
        {
            std::vector<cdouble> gain;   // sum v_k^H c_k
            std::vector<double> gain_sq; // sum |v_k^H c_k|^2
            std::vector<double> cross;   // sum_{i!=k} |v_k^H c_i|^2
            std::vector<double> norm;    // sum ||v_k||^2
        };
        auto make = [K]() {
            Part p;
            p.gain.assign(K, cdouble(0.0, 0.0));
            p.gain_sq.assign(K, 0.0);
            p.cross.assign(K, 0.0);
            p.norm.assign(K, 0.0);
            return p;
        };
        Part sum = ordered_reduce(
            trials, monte_carlo_chunk, make(),
            [&](std::size_t b, std::size_t e) {
                Part p = make();
                for (std::size_t t = b; t < e; ++t)
                {
                    const TrialDraw d = draw_trial(ctx, seed, t);
                    for (int k = 0; k < K; ++k)
                    {
                        const CVector &v = d.c_hat[k];
                        for (int i = 0; i < K; ++i)
                        {
                            const cdouble a = v.dot(d.channels.c[i]); // v^H c_i
                            if (i == k)
                            {
                                p.gain[k] += a;
                                p.gain_sq[k] += std::norm(a);
                            }
                            else
                                p.cross[k] += std::norm(a);
                        }
                        p.norm[k] += v.squaredNorm();
                    }
                }
                return p;
            },
            [](Part &a, const Part &p) {
                for (std::size_t k = 0; k < a.gain.size(); ++k)
                {
                    a.gain[k] += p.gain[k];
                    a.gain_sq[k] += p.gain_sq[k];
                    a.cross[k] += p.cross[k];
                    a.norm[k] += p.norm[k];
                }
            },
            threads);
        std::vector<SinrBreakdown> out(K);
        const double inv = 1.0 / static_cast<double>(trials);
        for (int k = 0; k < K; ++k)
        {
            const cdouble mean = sum.gain[k] * inv;
            const double signal = std::norm(mean);
            const double variance = sum.gain_sq[k] * inv - signal;
            out[k].signal = signal;
            out[k].interference = variance + sum.cross[k] * inv + sum.norm[k] * inv / sc.rho_data;
            out[k].gamma = signal > 0.0 ? signal / out[k].interference : 0.0;
        }
        return out;
    }

} // namespace dsim

#endif // DSIM_MONTE_CARLO_HPP
