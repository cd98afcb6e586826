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


#ifndef DSIM_SCENARIO_HPP
#define DSIM_SCENARIO_HPP

// Assembles geometry, transmission matrices and channel statistics into one
// immutable Scenario, and evaluates the per-user statistical quantities for a
// given phase profile.

#include "channel_stats.hpp"
#include "core.hpp"
#include "geometry.hpp"
#include "phase_profile.hpp"
#include "propagation.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dsim
{
    enum class SnrReference
    {
        // rho is the transmit SNR; large-scale gains enter unnormalized
        transmit,
        // rho is the receive SNR per BSIM meta-atom of the direct link from the
        // user-segment midpoint (free-space C0 and the direct exponent, no antenna gains)
        direct_midpoint,
    };

    struct SystemConfig
    {
        int bs_antennas = 32; // M_BS
        int users = 4;        // K
        int bsim_x = 10, bsim_y = 10;
        int csim_x = 10, csim_y = 10;
        int bsim_layers = 4; // L
        int csim_layers = 4; // S (0 disables the CSIM)
        double carrier_hz = 2e9;
        double thickness_wavelengths = 5.0; // T_SIM / lambda
        double bs_height = 10.0;
        double csim_pos_x = 50.0;
        double csim_pos_y = 10.0;
        double user_span = 20.0;
        double bs_gain_dbi = 5.0;
        double user_gain_dbi = 0.0;
        double alpha_bsim_csim = 2.2;
        double alpha_csim_user = 2.8;
        double alpha_direct = 3.5;
        double c0 = 0.0; // 0: free-space (lambda / 4 pi)^2
        double snr_pilot_db = 6.0;
        double snr_data_db = 6.0;
        int pilot_length = 0; // tau; 0 means tau = K
        int coherence_length = 200;
        SnrReference snr_reference = SnrReference::direct_midpoint;

        int bsim_atoms() const { return bsim_x * bsim_y; }
        int csim_atoms() const { return csim_x * csim_y; }
        double wavelength() const { return speed_of_light / carrier_hz; }
        int tau() const { return pilot_length > 0 ? pilot_length : users; }

        void validate() const
        {
            require(bs_antennas > 0, "bs_antennas must be positive");
            require(users > 0, "users must be positive");
            require(bsim_x > 0 && bsim_y > 0 && csim_x > 0 && csim_y > 0, "grid sizes must be positive");
            require(bsim_layers > 0, "bsim_layers must be positive");
            require(csim_layers >= 0, "csim_layers must be nonnegative");
            require(carrier_hz > 0.0 && thickness_wavelengths > 0.0, "carrier and thickness must be positive");
            require(tau() >= users, "pilot length must be at least the number of users");
            require(tau() < coherence_length, "pilot length must be shorter than the coherence block");
        }
    };

    struct Scenario
    {
        SystemConfig config;
        SimStack stack;
        CorrelationMatrix r_bsim;
        CorrelationMatrix r_csim;
        RMatrix sqrt_r_bsim;
        RMatrix sqrt_r_csim;
        ScenarioDistances distances;
        PathLossSet losses;
        double rx_scale = 1.0; // multiplies every R_k (noise normalization)
        double rho_data = 1.0;
        double rho_pilot = 1.0;
        int tau = 1;
        int tau_c = 200;

        int users() const { return losses.users(); }
        bool has_csim() const { return stack.csim_layers() > 0; }
        double prelog() const { return static_cast<double>(tau_c - tau) / tau_c; }
        double tau_rho() const { return tau * rho_pilot; }
        // Large-scale factor of R_k = a_k Rb for a cascade trace factor t
        double covariance_scale(int k, double t) const
        {
            return rx_scale * ((has_csim() ? losses.beta_hat[k] * t : 0.0) + losses.beta_bar[k]);
        }
    };

    inline SimGeometry make_geometry(const SystemConfig &c)
    {
        const double lambda = c.wavelength();
        SimGeometry g;
        g.wavelength = lambda;
        g.bsim.layer_count = c.bsim_layers;
        g.bsim.thickness = c.thickness_wavelengths * lambda;
        g.bsim.grid = {c.bsim_x, c.bsim_y, lambda / 2.0};
        g.csim.layer_count = c.csim_layers;
        g.csim.thickness = c.thickness_wavelengths * lambda;
        g.csim.grid = {c.csim_x, c.csim_y, lambda / 2.0};
        g.layout.bs_height = c.bs_height;
        g.layout.csim_x = c.csim_pos_x;
        g.layout.csim_y = c.csim_pos_y;
        g.layout.user_span = c.user_span;
        g.layout.user_count = c.users;
        g.layout.bs_antenna_count = c.bs_antennas;
        return g;
    }

    inline Scenario build_scenario(const SystemConfig &config)
    {
        config.validate();
        Scenario sc;
        sc.config = config;
        const SimGeometry g = make_geometry(config);
        sc.stack = SimStack(g);
        sc.r_bsim = correlation_matrix(g.bsim.grid, g.wavelength);
        sc.r_csim = correlation_matrix(g.csim.grid, g.wavelength);
        sc.sqrt_r_bsim = psd_sqrt(sc.r_bsim.entries);
        sc.sqrt_r_csim = psd_sqrt(sc.r_csim.entries);
        sc.distances = scenario_distances(g.layout);

        PathLossParams pl;
        pl.wavelength = g.wavelength;
        pl.c0 = config.c0;
        pl.alpha_bsim_csim = config.alpha_bsim_csim;
        pl.alpha_csim_user = config.alpha_csim_user;
        pl.alpha_direct = config.alpha_direct;
        pl.bs_gain_dbi = config.bs_gain_dbi;
        pl.user_gain_dbi = config.user_gain_dbi;
        sc.losses = path_losses(sc.distances, pl);

        if (config.snr_reference == SnrReference::direct_midpoint)
        {
            const double d_ref = distance(g.layout.bsim_center(), g.layout.segment_midpoint());
            sc.rx_scale = 1.0 / distance_path_loss(pl.reference_gain(), d_ref, config.alpha_direct);
        }
        sc.rho_data = db_to_linear(config.snr_data_db);
        sc.rho_pilot = db_to_linear(config.snr_pilot_db);
        sc.tau = config.tau();
        sc.tau_c = config.coherence_length;
        return sc;
    }

    /// Everything the closed-form SE and its gradient need for one profile.
    struct ProfileStatistics
    {
        CMatrix p;        // BSIM response
        CMatrix z;        // CSIM response
        CMatrix combiner; // P W^1
        double cascade_trace = 0.0;
        CMatrix b0;                    // combiner^H Rb combiner
        std::vector<double> scale;     // a_k with R_k = a_k Rb
        std::vector<CMatrix> r_hat;
        std::vector<CMatrix> q;
        std::vector<CMatrix> psi;
    };

    inline ProfileStatistics evaluate_statistics(const Scenario &sc, const PhaseProfile &profile)
    {
        ProfileStatistics st;
        st.p = bsim_response(sc.stack, profile).matrix;
        st.z = csim_response(sc.stack, profile).matrix;
        st.combiner = st.p * sc.stack.antenna_matrix();
        st.cascade_trace = sc.has_csim() ? cascade_trace_factor(sc.r_csim.entries, st.z) : 0.0;
        st.b0 = hermitian_part(st.combiner.adjoint() * sc.r_bsim.entries.cast<cdouble>() * st.combiner);
        const int K = sc.users();
        const Eigen::Index n = st.b0.rows();
        st.scale.resize(K);
        st.r_hat.resize(K);
        st.q.resize(K);
        st.psi.resize(K);
        for (int k = 0; k < K; ++k)
        {
            st.scale[k] = sc.covariance_scale(k, st.cascade_trace);
            st.r_hat[k] = st.scale[k] * st.b0;
            CMatrix reg = st.r_hat[k] + CMatrix::Identity(n, n) / sc.tau_rho();
            st.q[k] = hermitian_part(reg.ldlt().solve(CMatrix::Identity(n, n)));
            st.psi[k] = hermitian_part(st.r_hat[k] * st.q[k] * st.r_hat[k]);
        }
        return st;
    }

    /// R_k as a dense matrix (for the Monte Carlo and estimation paths).
    inline CMatrix user_covariance(const Scenario &sc, const ProfileStatistics &st, int k)
    {
        return st.scale[k] * sc.r_bsim.entries.cast<cdouble>();
    }

} // namespace dsim

#endif // DSIM_SCENARIO_HPP
