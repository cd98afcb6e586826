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


#ifndef DSIM_RNG_HPP
#define DSIM_RNG_HPP

// Reproducible, splittable random streams. Every Monte Carlo trial (or
// optimizer start) gets its own generator derived from (seed, stream id), so
// results do not depend on how trials are spread over threads.

#include "core.hpp"

#include <cstdint>
#include <random>

namespace dsim
{
    inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x5349u /* domain tag */};
        return std::mt19937_64(seq);
    }

    /// Circularly-symmetric CN(0, 1) sampler over a borrowed engine.
    class ComplexGaussian
    {
    public:
        explicit ComplexGaussian(std::mt19937_64 &engine) : engine_(&engine) {}

        cdouble operator()() { return {normal_(*engine_), normal_(*engine_)}; }

        CVector vector(Eigen::Index n)
        {
            CVector v(n);
            for (Eigen::Index i = 0; i < n; ++i)
                v(i) = (*this)();
            return v;
        }

        CMatrix matrix(Eigen::Index rows, Eigen::Index cols)
        {
            CMatrix m(rows, cols);
            // column-major fill order is part of the reproducibility contract
            for (Eigen::Index c = 0; c < cols; ++c)
                for (Eigen::Index r = 0; r < rows; ++r)
                    m(r, c) = (*this)();
            return m;
        }

    private:
        std::mt19937_64 *engine_;
        std::normal_distribution<double> normal_{0.0, std::sqrt(0.5)};
    };

} // namespace dsim

#endif // DSIM_RNG_HPP
