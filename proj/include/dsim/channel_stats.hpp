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


#ifndef DSIM_CHANNEL_STATS_HPP
#define DSIM_CHANNEL_STATS_HPP

// Spatial correlation, large-scale gains and the covariances of the
// aggregated channel seen behind the BSIM.
//
//   h_k = G Z q_k + d_k,   R_k = E[h_k h_k^H] = (bh_k tr(Rc Z Rc Z^H) + bb_k) Rb
//   c_k = (P W^1)^H h_k,   R^_k = (P W^1)^H R_k (P W^1)

#include "core.hpp"
#include "geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace dsim
{
    /// Normalized sinc, sin(pi x) / (pi x).
    inline double sinc(double x)
    {
        if (x == 0.0)
            return 1.0;
        const double px = pi * x;
        return std::sin(px) / px;
    }

    /// Hermitian PSD square root by eigen-decomposition. Eigenvalues below
    /// 1e-12 * lambda_max are treated as zero; anything below -1e-8 * lambda_max
    /// is rejected.
    template <typename Matrix>
    Matrix psd_sqrt(const Matrix &a)
    {
        require(a.rows() == a.cols(), "psd_sqrt needs a square matrix");
        const double scale = std::max(a.norm(), 1e-300);
        if ((a - a.adjoint()).norm() > 1e-10 * scale)
            throw InvalidInput("psd_sqrt: matrix is not Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        if (es.info() != Eigen::Success)
            throw InvalidInput("psd_sqrt: eigen-decomposition failed");
        RVector ev = es.eigenvalues();
        const double lmax = std::max(ev.maxCoeff(), 0.0);
        if (ev.minCoeff() < -1e-8 * lmax)
            throw InvalidInput("psd_sqrt: matrix has a significantly negative eigenvalue");
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            ev(i) = ev(i) < 1e-12 * lmax ? 0.0 : std::sqrt(ev(i));
        return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    }

    struct CorrelationMatrix
    {
        RMatrix entries;
        double psd_floor = 0.0; // smallest eigenvalue after repair
    };

    /// sinc(2 r / lambda) over all atom pairs of a grid, repaired to PSD if
    /// rounding produced negative eigenvalues.
    inline CorrelationMatrix correlation_matrix(const GridLayout &grid, double wavelength)
    {
        grid.validate();
        const int n = grid.atom_count();
        RMatrix r(n, n);
        for (int m = 1; m <= n; ++m)
            for (int mt = 1; mt <= n; ++mt)
                r(m - 1, mt - 1) = sinc(2.0 * intra_layer_offset(m, mt, grid) / wavelength);

        Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
        RVector ev = es.eigenvalues();
        const double lmax = ev.maxCoeff();
        if (ev.minCoeff() < -1e-10 * std::max(lmax, 1.0))
            throw InvalidInput("correlation matrix is not PSD beyond rounding");
        if (ev.minCoeff() < 0.0)
        {
            const double floor = 1e-12 * lmax;
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                ev(i) = ev(i) < floor ? 0.0 : ev(i);
            r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
            r = 0.5 * (r + r.transpose()).eval();
        }
        return {r, std::max(ev.minCoeff(), 0.0)};
    }

    struct PathLossParams
    {
        double wavelength = 0.0;
        double c0 = 0.0;                 // reference gain at 1 m; 0 means (lambda / 4 pi)^2
        double alpha_bsim_csim = 2.2;
        double alpha_csim_user = 2.8;
        double alpha_direct = 3.5;
        double bs_gain_dbi = 5.0;
        double user_gain_dbi = 0.0;

        double reference_gain() const
        {
            if (c0 > 0.0)
                return c0;
            const double x = wavelength / (4.0 * pi);
            return x * x;
        }
    };

    struct PathLossSet
    {
        double c0 = 0.0;
        double beta_g = 0.0;                 // BSIM - CSIM
        std::vector<double> beta_tilde;      // CSIM - user k
        std::vector<double> beta_bar;        // BSIM - user k (direct)
        std::vector<double> beta_hat;        // beta_g * beta_tilde_k

        int users() const { return static_cast<int>(beta_bar.size()); }
    };

    /// C0 (d / 1 m)^-alpha
    inline double distance_path_loss(double c0, double d, double alpha)
    {
        require(d > 0.0, "path-loss distance must be positive");
        return c0 * std::pow(d, -alpha);
    }

    /// Antenna gains are folded in multiplicatively: the BS gain on every link
    /// that ends at the BSIM, the user gain on every link that starts at a user.
    inline PathLossSet path_losses(const ScenarioDistances &d, const PathLossParams &p)
    {
        require(p.wavelength > 0.0, "wavelength must be positive");
        const double g_bs = db_to_linear(p.bs_gain_dbi);
        const double g_ue = db_to_linear(p.user_gain_dbi);
        PathLossSet out;
        out.c0 = p.reference_gain();
        out.beta_g = g_bs * distance_path_loss(out.c0, d.bsim_csim, p.alpha_bsim_csim);
        const std::size_t K = d.bsim_user.size();
        out.beta_tilde.resize(K);
        out.beta_bar.resize(K);
        out.beta_hat.resize(K);
        for (std::size_t k = 0; k < K; ++k)
        {
            out.beta_tilde[k] = g_ue * distance_path_loss(out.c0, d.csim_user[k], p.alpha_csim_user);
            out.beta_bar[k] = g_bs * g_ue * distance_path_loss(out.c0, d.bsim_user[k], p.alpha_direct);
            out.beta_hat[k] = out.beta_g * out.beta_tilde[k];
        }
        return out;
    }

    /// tr(Rc Z Rc Z^H), real and nonnegative for PSD Rc.
    inline double cascade_trace_factor(const RMatrix &r_csim, const CMatrix &z)
    {
        const CMatrix rz = r_csim * z;
        // tr(Rc Z Rc Z^H) = tr((Rc Z)(Rc Z^H)) = sum_ij (Rc Z)_ij conj((Z Rc)_ij)
        const CMatrix zr = z * r_csim;
        return std::max(0.0, std::real((rz.array() * zr.conjugate().array()).sum()));
    }

    /// R_k = scale * (beta_hat_k tr(Rc Z Rc Z^H) + beta_bar_k) Rb
    inline CMatrix aggregate_covariance(const RMatrix &r_bsim, const RMatrix &r_csim, const CMatrix &z,
                                        const PathLossSet &losses, int k, double scale = 1.0)
    {
        require(k >= 0 && k < losses.users(), "user index out of range");
        const double t = cascade_trace_factor(r_csim, z);
        return (scale * (losses.beta_hat[k] * t + losses.beta_bar[k])) * r_bsim.cast<cdouble>();
    }

    struct EffectiveCovariance
    {
        CMatrix r_hat; // (P W1)^H R_k (P W1)
        CMatrix q;     // (R^_k + I / (tau rho))^-1
    };

    /// `combiner` is the effective wave-domain map P * W^1 (M x M_BS).
    inline EffectiveCovariance effective_covariance(const CMatrix &r_k, const CMatrix &combiner, double tau_rho)
    {
        require(tau_rho > 0.0, "tau * rho must be positive");
        require(r_k.rows() == combiner.rows(), "covariance and combiner dimensions differ");
        EffectiveCovariance out;
        out.r_hat = hermitian_part(combiner.adjoint() * r_k * combiner);
        const Eigen::Index n = out.r_hat.rows();
        CMatrix reg = out.r_hat + CMatrix::Identity(n, n) / tau_rho;
        out.q = hermitian_part(reg.ldlt().solve(CMatrix::Identity(n, n)));
        return out;
    }

    struct ChannelRealization
    {
        CMatrix g;                  // M x N
        std::vector<CVector> q;     // N, per user
        std::vector<CVector> d;     // M, per user
        std::vector<CVector> h;     // M, per user
        std::vector<CVector> c;     // M_BS, per user
    };

    /// Inputs shared by every draw of one scenario/profile pair.
    struct DrawContext
    {
        const RMatrix *sqrt_r_bsim = nullptr;
        const RMatrix *sqrt_r_csim = nullptr;
        const PathLossSet *losses = nullptr;
        const CMatrix *z = nullptr;        // CSIM response; null disables the cascaded link
        const CMatrix *combiner = nullptr; // P W^1
        double scale = 1.0;                // receive-power normalization applied to h_k
    };

    /// One correlated-Rayleigh realization. `sample` returns CN(0,1) draws;
    /// the draw order is D (column-major), then per user c_k and c-bar_k.
    template <typename Sampler>
    ChannelRealization draw_channels(Sampler &sample, const DrawContext &ctx)
    {
        const RMatrix &rb = *ctx.sqrt_r_bsim;
        const PathLossSet &pl = *ctx.losses;
        const Eigen::Index M = rb.rows();
        const int K = pl.users();
        const double amp = std::sqrt(ctx.scale);
        ChannelRealization out;

        const bool cascaded = ctx.z != nullptr;
        Eigen::Index N = 0;
        if (cascaded)
        {
            const RMatrix &rc = *ctx.sqrt_r_csim;
            N = rc.rows();
            CMatrix dmat(M, N);
            for (Eigen::Index c = 0; c < N; ++c)
                for (Eigen::Index r = 0; r < M; ++r)
                    dmat(r, c) = sample();
            out.g = std::sqrt(pl.beta_g) * (rb * dmat * rc);
        }
        out.q.resize(K);
        out.d.resize(K);
        out.h.resize(K);
        out.c.resize(K);
        for (int k = 0; k < K; ++k)
        {
            if (cascaded)
            {
                CVector ck(N);
                for (Eigen::Index i = 0; i < N; ++i)
                    ck(i) = sample();
                out.q[k] = std::sqrt(pl.beta_tilde[k]) * (*ctx.sqrt_r_csim * ck);
            }
            CVector cbar(M);
            for (Eigen::Index i = 0; i < M; ++i)
                cbar(i) = sample();
            out.d[k] = std::sqrt(pl.beta_bar[k]) * (rb * cbar);
            out.h[k] = out.d[k];
            if (cascaded)
                out.h[k] += out.g * (*ctx.z * out.q[k]);
            out.h[k] *= amp;
            out.c[k] = ctx.combiner->adjoint() * out.h[k];
        }
        return out;
    }

} // namespace dsim

#endif // DSIM_CHANNEL_STATS_HPP
