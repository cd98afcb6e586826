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


#ifndef DSIM_SPECTRAL_EFFICIENCY_HPP
#define DSIM_SPECTRAL_EFFICIENCY_HPP

// Closed-form uplink SINR with MRC and the resulting spectral efficiency.

#include "core.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace dsim
{
    struct SinrBreakdown
    {
        double signal = 0.0;       // S_k
        double interference = 0.0; // I~_k, noise included
        double gamma = 0.0;
    };

    /// S_k = tr^2(Psi_k); I_k = sum_i tr(R^_i Psi_k) - tr(Psi_k^2) + tr(Psi_k) / rho
    inline SinrBreakdown closed_form_sinr(const std::vector<CMatrix> &psi, const std::vector<CMatrix> &r_hat,
                                          double rho, int k)
    {
        require(rho > 0.0, "data SNR must be positive");
        require(psi.size() == r_hat.size(), "one Psi and one R^ per user expected");
        require(k >= 0 && k < static_cast<int>(psi.size()), "user index out of range");
        const CMatrix &p = psi[k];
        const double tr_psi = trace_real(p);
        SinrBreakdown out;
        out.signal = tr_psi * tr_psi;
        double sum = 0.0;
        for (const CMatrix &r : r_hat)
            sum += trace_product_real(r, p);
        out.interference = sum - trace_product_real(p, p) + tr_psi / rho;
        out.gamma = out.signal > 0.0 ? out.signal / out.interference : 0.0;
        return out;
    }

    struct SEReport
    {
        double prelog = 0.0;
        std::vector<double> se_per_user;
        double sum_se = 0.0;
        std::string mode = "closed_form";
    };

    inline double prelog_factor(int tau, int tau_c)
    {
        require(tau >= 0 && tau < tau_c, "pilot length must be shorter than the coherence block");
        return static_cast<double>(tau_c - tau) / tau_c;
    }

    inline SEReport sum_se(const std::vector<SinrBreakdown> &b, int tau, int tau_c,
                           std::string mode = "closed_form")
    {
        SEReport out;
        out.prelog = prelog_factor(tau, tau_c);
        out.mode = std::move(mode);
        out.se_per_user.reserve(b.size());
        for (const SinrBreakdown &x : b)
        {
            const double se = out.prelog * std::log2(1.0 + x.gamma);
            out.se_per_user.push_back(se);
            out.sum_se += se;
        }
        return out;
    }

} // namespace dsim

#endif // DSIM_SPECTRAL_EFFICIENCY_HPP
