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


#ifndef DSIM_ESTIMATION_HPP
#define DSIM_ESTIMATION_HPP

// Pilot transmission, LMMSE channel estimation and the NMSE metric.

#include "channel_stats.hpp"
#include "core.hpp"

#include <vector>

namespace dsim
{
    struct PilotConfig
    {
        int tau = 1;
        double rho_pilot = 1.0;
        CMatrix pilots; // tau x K, column k is x_k with x_k^H x_k = tau rho

        int users() const { return static_cast<int>(pilots.cols()); }

        void validate(double tol = 1e-10) const
        {
            require(tau >= 1 && rho_pilot > 0.0, "pilot length and SNR must be positive");
            require(pilots.rows() == tau, "pilot matrix must have tau rows");
            require(users() <= tau, "pilot length must be at least the number of users");
            const CMatrix gram = pilots.adjoint() * pilots;
            const CMatrix expect = CMatrix::Identity(users(), users()) * (tau * rho_pilot);
            require((gram - expect).norm() <= tol * tau * rho_pilot * users(), "pilot matrix is not orthogonal");
        }
    };

    /// Scaled DFT columns: x_k(t) = sqrt(rho) exp(-j 2 pi t k / tau).
    inline PilotConfig make_pilots(int tau, int users, double rho_pilot)
    {
        require(tau >= users && users >= 1, "pilot length must be at least the number of users");
        require(rho_pilot > 0.0, "pilot SNR must be positive");
        PilotConfig p;
        p.tau = tau;
        p.rho_pilot = rho_pilot;
        p.pilots.resize(tau, users);
        const double amp = std::sqrt(rho_pilot);
        for (int t = 0; t < tau; ++t)
            for (int k = 0; k < users; ++k)
            {
                // reduce the index first so the angle stays small and exact
                const long long idx = (static_cast<long long>(t) * k) % tau;
                p.pilots(t, k) = std::polar(amp, -2.0 * pi * static_cast<double>(idx) / tau);
            }
        return p;
    }

    /// Y = sum_i c_i x_i^H + N, then r_k = Y x_k / (tau rho).
    /// `sample` supplies the CN(0,1) noise, column-major over the M_BS x tau block.
    template <typename Sampler>
    std::vector<CVector> simulate_pilot_rx(const std::vector<CVector> &c, const PilotConfig &pilots, Sampler &sample)
    {
        require(static_cast<int>(c.size()) == pilots.users(), "one channel per pilot column expected");
        const Eigen::Index n = c.empty() ? 0 : c.front().size();
        CMatrix y(n, pilots.tau);
        for (Eigen::Index t = 0; t < pilots.tau; ++t)
            for (Eigen::Index r = 0; r < n; ++r)
                y(r, t) = sample();
        for (int i = 0; i < pilots.users(); ++i)
            y.noalias() += c[i] * pilots.pilots.col(i).adjoint();
        const double norm = pilots.tau * pilots.rho_pilot;
        std::vector<CVector> r(c.size());
        for (int k = 0; k < pilots.users(); ++k)
            r[k] = y * pilots.pilots.col(k) / norm;
        return r;
    }

    inline CVector lmmse_estimate(const CVector &r, const CMatrix &r_hat, const CMatrix &q)
    {
        return r_hat * (q * r);
    }

    struct EstimateCovariances
    {
        CMatrix psi;       // covariance of the estimate
        CMatrix psi_tilde; // covariance of the error
    };

    inline EstimateCovariances estimate_covariances(const CMatrix &r_hat, const CMatrix &q)
    {
        EstimateCovariances out;
        out.psi = hermitian_part(r_hat * q * r_hat);
        out.psi_tilde = r_hat - out.psi;
        return out;
    }

    inline double nmse(const CMatrix &psi, const CMatrix &r_hat)
    {
        const double tr = trace_real(r_hat);
        if (!(tr > 0.0))
            throw UndefinedMetric("NMSE is undefined for a zero-trace covariance");
        return 1.0 - trace_real(psi) / tr;
    }

} // namespace dsim

#endif // DSIM_ESTIMATION_HPP
