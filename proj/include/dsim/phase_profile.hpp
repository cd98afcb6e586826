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


#ifndef DSIM_PHASE_PROFILE_HPP
#define DSIM_PHASE_PROFILE_HPP

#include "core.hpp"

#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <istream>
#include <ostream>
#include <random>

namespace dsim
{
    /// Phase angles of every meta-atom: one row per layer. The coefficients
    /// e^{j theta} are derived on demand, so they have unit modulus by
    /// construction and there is no way to set a magnitude.
    class PhaseProfile
    {
    public:
        PhaseProfile() = default;
        PhaseProfile(int bsim_layers, int bsim_atoms, int csim_layers, int csim_atoms)
            : bsim_(RMatrix::Zero(bsim_layers, bsim_atoms)), csim_(RMatrix::Zero(csim_layers, csim_atoms))
        {
            require(bsim_layers >= 0 && bsim_atoms >= 0 && csim_layers >= 0 && csim_atoms >= 0,
                    "profile dimensions must be nonnegative");
        }
        PhaseProfile(RMatrix bsim, RMatrix csim) : bsim_(std::move(bsim)), csim_(std::move(csim))
        {
            require(bsim_.allFinite() && csim_.allFinite(), "phase angles must be finite");
        }

        int bsim_layers() const { return static_cast<int>(bsim_.rows()); }
        int bsim_atoms() const { return static_cast<int>(bsim_.cols()); }
        int csim_layers() const { return static_cast<int>(csim_.rows()); }
        int csim_atoms() const { return static_cast<int>(csim_.cols()); }

        const RMatrix &bsim_angles() const { return bsim_; }
        const RMatrix &csim_angles() const { return csim_; }
        RMatrix &bsim_angles() { return bsim_; }
        RMatrix &csim_angles() { return csim_; }

        // phi^l, l is 0-based
        CVector bsim_coefficients(int layer) const { return unit_phasors(bsim_.row(layer)); }
        // lambda^s, s is 0-based
        CVector csim_coefficients(int layer) const { return unit_phasors(csim_.row(layer)); }

        void set_bsim_layer_from_coefficients(int layer, const CVector &coeff)
        {
            for (Eigen::Index i = 0; i < coeff.size(); ++i)
                bsim_(layer, i) = std::arg(coeff(i));
        }
        void set_csim_layer_from_coefficients(int layer, const CVector &coeff)
        {
            for (Eigen::Index i = 0; i < coeff.size(); ++i)
                csim_(layer, i) = std::arg(coeff(i));
        }

        static PhaseProfile random(int L, int M, int S, int N, std::mt19937_64 &rng)
        {
            std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
            PhaseProfile p(L, M, S, N);
            // BSIM first so that two profiles drawn from equal streams share the BSIM part
            for (int l = 0; l < L; ++l)
                for (int m = 0; m < M; ++m)
                    p.bsim_(l, m) = angle(rng);
            for (int s = 0; s < S; ++s)
                for (int n = 0; n < N; ++n)
                    p.csim_(s, n) = angle(rng);
            return p;
        }

        // FNV-1a over the raw angle bits; identifies the profile a response was built from.
        std::uint64_t hash() const
        {
            std::uint64_t h = 14695981039346656037ull;
            auto mix = [&h](const RMatrix &m) {
                for (Eigen::Index i = 0; i < m.size(); ++i)
                {
                    std::uint64_t bits;
                    const double v = m.data()[i];
                    std::memcpy(&bits, &v, sizeof bits);
                    for (int b = 0; b < 8; ++b)
                    {
                        h ^= (bits >> (8 * b)) & 0xffu;
                        h *= 1099511628211ull;
                    }
                }
            };
            mix(bsim_);
            mix(csim_);
            return h;
        }

        // Plain text: "L M" then L rows of M angles; "S N" then S rows of N angles.
        void write(std::ostream &os) const
        {
            const auto old_precision = os.precision(17);
            auto block = [&os](const RMatrix &m) {
                os << m.rows() << ' ' << m.cols() << '\n';
                for (Eigen::Index r = 0; r < m.rows(); ++r)
                {
                    for (Eigen::Index c = 0; c < m.cols(); ++c)
                        os << (c ? " " : "") << m(r, c);
                    os << '\n';
                }
            };
            block(bsim_);
            block(csim_);
            os.precision(old_precision);
        }

        static PhaseProfile read(std::istream &is)
        {
            auto block = [&is]() {
                Eigen::Index rows = -1, cols = -1;
                if (!(is >> rows >> cols) || rows < 0 || cols < 0)
                    throw InvalidInput("malformed phase profile header");
                RMatrix m(rows, cols);
                for (Eigen::Index r = 0; r < rows; ++r)
                    for (Eigen::Index c = 0; c < cols; ++c)
                        if (!(is >> m(r, c)))
                            throw InvalidInput("truncated phase profile");
                return m;
            };
            RMatrix b = block();
            RMatrix c = block();
            return PhaseProfile(std::move(b), std::move(c));
        }

    private:
        template <typename Row>
        static CVector unit_phasors(const Row &angles)
        {
            CVector out(angles.size());
            for (Eigen::Index i = 0; i < angles.size(); ++i)
                out(i) = std::polar(1.0, angles(i));
            return out;
        }

        RMatrix bsim_;
        RMatrix csim_;
    };

} // namespace dsim

#endif // DSIM_PHASE_PROFILE_HPP
