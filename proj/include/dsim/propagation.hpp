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


#ifndef DSIM_PROPAGATION_HPP
#define DSIM_PROPAGATION_HPP

// Rayleigh-Sommerfeld inter-layer coefficients and the wave-domain responses
// of the two stacks.
//
// BSIM response:  P = Phi^L W^L ... Phi^2 W^2 Phi^1          (M x M)
// CSIM response:  Z = Lambda^S U^S ... Lambda^1 U^1           (N x N)
//
// W^1 (M x M_BS, antennas to first layer) is kept out of P. The effective
// combining map seen by the digital stage is always P * W^1.

#include "core.hpp"
#include "geometry.hpp"
#include "phase_profile.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace dsim
{
    inline cdouble transmission_coefficient(double area, double cos_angle, double distance, double wavelength)
    {
        if (!(distance > 0.0))
            throw InvalidInput("transmission coefficient is singular at zero distance");
        require(area > 0.0 && wavelength > 0.0, "area and wavelength must be positive");
        require(cos_angle > 0.0 && cos_angle <= 1.0, "cos_angle must lie in (0, 1]");
        const double k = 2.0 * pi * distance / wavelength;
        return (area * cos_angle / distance) * cdouble(1.0 / (2.0 * pi * distance), -1.0 / wavelength) *
               std::polar(1.0, k);
    }

    struct SimGeometry
    {
        StackGeometry bsim;
        StackGeometry csim; // layer_count may be 0 to disable the CSIM branch
        ScenarioLayout layout;
        double wavelength = 0.0;
    };

    /// Fixed transmission matrices of both stacks. Immutable once built.
    class SimStack
    {
    public:
        SimStack() = default;

        explicit SimStack(const SimGeometry &g) : geometry_(g)
        {
            g.bsim.validate();
            g.layout.validate();
            require(g.wavelength > 0.0, "wavelength must be positive");
            const GridLayout &bg = g.bsim.grid;
            const int M = bg.atom_count();
            const int Mbs = g.layout.bs_antenna_count;
            const double area_b = bg.spacing * bg.spacing;
            const double db = g.bsim.layer_spacing();

            w1_.resize(M, Mbs);
            for (int m = 1; m <= M; ++m)
                for (int a = 1; a <= Mbs; ++a)
                {
                    const double d = antenna_to_layer1_distance(a, m, bg, g.layout, db);
                    w1_(m - 1, a - 1) = transmission_coefficient(area_b, db / d, d, g.wavelength);
                }

            const CMatrix wl = layer_matrix(g.bsim, g.wavelength);
            w_.assign(g.bsim.layer_count, CMatrix());
            for (int l = 1; l < g.bsim.layer_count; ++l)
                w_[l] = wl;

            if (g.csim.layer_count > 0)
            {
                g.csim.validate();
                const CMatrix us = layer_matrix(g.csim, g.wavelength);
                u_.assign(g.csim.layer_count, us);
            }
        }

        int bsim_layers() const { return geometry_.bsim.layer_count; }
        int csim_layers() const { return geometry_.csim.layer_count; }
        int bsim_atoms() const { return geometry_.bsim.grid.atom_count(); }
        int csim_atoms() const { return geometry_.csim.grid.atom_count(); }
        int bs_antennas() const { return geometry_.layout.bs_antenna_count; }
        const SimGeometry &geometry() const { return geometry_; }

        const CMatrix &antenna_matrix() const { return w1_; }
        // W^l for l in 2..L (1-based, as in the layer numbering)
        const CMatrix &bsim_matrix(int l) const
        {
            require(l >= 2 && l <= bsim_layers(), "BSIM layer matrix index out of range");
            return w_[l - 1];
        }
        // U^s for s in 1..S
        const CMatrix &csim_matrix(int s) const
        {
            require(s >= 1 && s <= csim_layers(), "CSIM layer matrix index out of range");
            return u_[s - 1];
        }

        void check_profile(const PhaseProfile &p) const
        {
            require(p.bsim_layers() == bsim_layers() && p.bsim_atoms() == bsim_atoms(),
                    "BSIM phase profile does not match the stack dimensions");
            require(p.csim_layers() == csim_layers() && (csim_layers() == 0 || p.csim_atoms() == csim_atoms()),
                    "CSIM phase profile does not match the stack dimensions");
        }

        // Row-major "re im" pairs, one matrix block per transmission matrix.
        void dump(std::ostream &os) const
        {
            const auto old = os.precision(17);
            auto block = [&os](const char *name, const CMatrix &m) {
                os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
                for (Eigen::Index r = 0; r < m.rows(); ++r)
                {
                    for (Eigen::Index c = 0; c < m.cols(); ++c)
                        os << (c ? " " : "") << m(r, c).real() << ' ' << m(r, c).imag();
                    os << '\n';
                }
            };
            block("W1", w1_);
            for (int l = 2; l <= bsim_layers(); ++l)
                block(("W" + std::to_string(l)).c_str(), w_[l - 1]);
            for (int s = 1; s <= csim_layers(); ++s)
                block(("U" + std::to_string(s)).c_str(), u_[s - 1]);
            os.precision(old);
        }

    private:
        static CMatrix layer_matrix(const StackGeometry &stack, double wavelength)
        {
            const int n = stack.grid.atom_count();
            const double area = stack.grid.spacing * stack.grid.spacing;
            CMatrix out(n, n);
            for (int m = 1; m <= n; ++m)
                for (int mt = 1; mt <= n; ++mt)
                {
                    const LayerLink link = inter_layer_distance(m, mt, stack);
                    out(m - 1, mt - 1) = transmission_coefficient(area, link.cos_angle, link.distance, wavelength);
                }
            return out;
        }

        SimGeometry geometry_;
        CMatrix w1_;
        std::vector<CMatrix> w_; // index l-1, entry 0 unused
        std::vector<CMatrix> u_; // index s-1
    };

    struct SimResponse
    {
        CMatrix matrix;
        std::uint64_t profile_hash = 0;
    };

    inline SimResponse bsim_response(const SimStack &stack, const PhaseProfile &profile)
    {
        stack.check_profile(profile);
        const int L = stack.bsim_layers();
        CMatrix p = profile.bsim_coefficients(0).asDiagonal().toDenseMatrix();
        for (int l = 2; l <= L; ++l)
            p = profile.bsim_coefficients(l - 1).asDiagonal() * (stack.bsim_matrix(l) * p);
        return {std::move(p), profile.hash()};
    }

    inline SimResponse csim_response(const SimStack &stack, const PhaseProfile &profile)
    {
        stack.check_profile(profile);
        const int S = stack.csim_layers();
        if (S == 0)
            return {CMatrix::Identity(stack.csim_atoms(), stack.csim_atoms()), profile.hash()};
        CMatrix z = profile.csim_coefficients(0).asDiagonal() * stack.csim_matrix(1);
        for (int s = 2; s <= S; ++s)
            z = profile.csim_coefficients(s - 1).asDiagonal() * (stack.csim_matrix(s) * z);
        return {std::move(z), profile.hash()};
    }

    /// Factors around each layer's diagonal:
    ///   P = A_l diag(phi^l) C_l,            C_1 = I, A_L = I
    ///   Z = F_s diag(lambda^s) (U^s D_s),   D_1 = I, F_S = I
    /// Vectors are indexed by layer - 1.
    struct PartialProducts
    {
        std::vector<CMatrix> bsim_suffix; // A_l
        std::vector<CMatrix> bsim_prefix; // C_l
        std::vector<CMatrix> csim_prefix; // D_s
        std::vector<CMatrix> csim_suffix; // F_s
    };

    inline PartialProducts partial_products(const SimStack &stack, const PhaseProfile &profile)
    {
        stack.check_profile(profile);
        const int L = stack.bsim_layers();
        const int S = stack.csim_layers();
        const int M = stack.bsim_atoms();
        PartialProducts out;

        out.bsim_prefix.resize(L);
        out.bsim_prefix[0] = CMatrix::Identity(M, M);
        CMatrix running = profile.bsim_coefficients(0).asDiagonal().toDenseMatrix(); // Phi^1
        for (int l = 2; l <= L; ++l)
        {
            out.bsim_prefix[l - 1] = stack.bsim_matrix(l) * running;
            running = profile.bsim_coefficients(l - 1).asDiagonal() * out.bsim_prefix[l - 1];
        }

        out.bsim_suffix.resize(L);
        out.bsim_suffix[L - 1] = CMatrix::Identity(M, M);
        for (int l = L - 1; l >= 1; --l)
            out.bsim_suffix[l - 1] =
                out.bsim_suffix[l] * (profile.bsim_coefficients(l).asDiagonal() * stack.bsim_matrix(l + 1));

        if (S > 0)
        {
            const int N = stack.csim_atoms();
            out.csim_prefix.resize(S);
            out.csim_prefix[0] = CMatrix::Identity(N, N);
            for (int s = 2; s <= S; ++s)
                out.csim_prefix[s - 1] =
                    profile.csim_coefficients(s - 2).asDiagonal() * (stack.csim_matrix(s - 1) * out.csim_prefix[s - 2]);

            out.csim_suffix.resize(S);
            out.csim_suffix[S - 1] = CMatrix::Identity(N, N);
            for (int s = S - 1; s >= 1; --s)
                out.csim_suffix[s - 1] =
                    out.csim_suffix[s] * (profile.csim_coefficients(s).asDiagonal() * stack.csim_matrix(s + 1));
        }
        return out;
    }

} // namespace dsim

#endif // DSIM_PROPAGATION_HPP
