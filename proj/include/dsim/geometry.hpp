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


#ifndef DSIM_GEOMETRY_HPP
#define DSIM_GEOMETRY_HPP

// Meta-atom grids, inter-layer distances and the user layout of the uplink scenario.
//
// Atom indices are 1-based at this API boundary and row-major on the grid:
// atom m sits in column mod(m-1, count_x) and row floor((m-1) / count_x).
//
// 3D convention: the BSIM is parallel to the x-y plane with its centre on the
// z-axis at height bs_height. The CSIM and the users live in the ground plane
// (z = 0). Every link that touches the BSIM therefore includes the height term.

#include "core.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace dsim
{
    struct GridLayout
    {
        int count_x = 1;
        int count_y = 1;
        double spacing = 0.0; // adjacent atom pitch [m]

        int atom_count() const { return count_x * count_y; }

        void validate() const
        {
            require(count_x > 0 && count_y > 0, "grid counts must be positive");
            require(spacing > 0.0, "grid spacing must be positive");
        }
    };

    struct StackGeometry
    {
        int layer_count = 1;
        double thickness = 0.0; // T_SIM [m]
        GridLayout grid;

        double layer_spacing() const { return thickness / layer_count; }

        void validate() const
        {
            require(layer_count > 0, "stack must have at least one layer");
            require(thickness > 0.0, "stack thickness must be positive");
            grid.validate();
        }
    };

    struct Point3
    {
        double x = 0.0, y = 0.0, z = 0.0;
    };

    inline double distance(const Point3 &a, const Point3 &b)
    {
        return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
    }

    struct ScenarioLayout
    {
        double bs_height = 10.0;   // H_BS [m]
        double csim_x = 50.0;      // [m]
        double csim_y = 10.0;      // [m]
        double user_span = 20.0;   // d0 [m]
        int user_count = 4;        // K
        int bs_antenna_count = 32; // M_BS

        void validate() const
        {
            require(user_count > 0, "user count must be positive");
            require(bs_antenna_count > 0, "BS antenna count must be positive");
            require(bs_height >= 0.0 && user_span >= 0.0, "heights and spans must be nonnegative");
        }

        Point3 bsim_center() const { return {0.0, 0.0, bs_height}; }
        Point3 csim_center() const { return {csim_x, csim_y, 0.0}; }

        // User k (1-based) on the segment y = csim_y - d0/2, x in [csim_x - d0/2, csim_x + d0/2].
        // A single user sits at the segment midpoint.
        Point3 user_position(int k) const
        {
            require(k >= 1 && k <= user_count, "user index out of range");
            const double y = csim_y - 0.5 * user_span;
            if (user_count == 1)
                return {csim_x, y, 0.0};
            const double step = user_span / (user_count - 1);
            return {csim_x - 0.5 * user_span + (k - 1) * step, y, 0.0};
        }

        Point3 segment_midpoint() const { return {csim_x, csim_y - 0.5 * user_span, 0.0}; }
    };

    struct ScenarioDistances
    {
        double bsim_csim = 0.0;              // d_g
        std::vector<double> csim_user;       // d~_k
        std::vector<double> bsim_user;       // d-_k
    };

    namespace detail
    {
        inline void check_atom_index(int m, const GridLayout &grid)
        {
            require(m >= 1 && m <= grid.atom_count(), "atom index out of range");
        }
    } // namespace detail

    /// Lateral offset between atoms m and m_tilde of the same grid, using the
    /// floor/mod row-major decomposition of |m - m_tilde|.
    inline double intra_layer_offset(int m, int m_tilde, const GridLayout &grid)
    {
        detail::check_atom_index(m, grid);
        detail::check_atom_index(m_tilde, grid);
        const int diff = std::abs(m - m_tilde);
        const double rows = diff / grid.count_x;
        const double cols = diff % grid.count_x;
        return grid.spacing * std::sqrt(rows * rows + cols * cols);
    }

    struct LayerLink
    {
        double distance = 0.0;
        double cos_angle = 1.0;
    };

    inline LayerLink inter_layer_distance(int m, int m_tilde, const StackGeometry &stack)
    {
        const double offset = intra_layer_offset(m, m_tilde, stack.grid);
        const double spacing = stack.layer_spacing();
        require(spacing > 0.0, "layer spacing must be positive");
        const double d = std::hypot(spacing, offset);
        return {d, spacing / d};
    }

    /// Distance from BS antenna m (1..M_BS, ULA along x at pitch spacing, centred)
    /// to atom m_tilde of the first BSIM layer, a layer_spacing away.
    inline double antenna_to_layer1_distance(int antenna, int m_tilde, const GridLayout &grid,
                                             const ScenarioLayout &layout, double layer_spacing)
    {
        require(antenna >= 1 && antenna <= layout.bs_antenna_count, "antenna index out of range");
        detail::check_atom_index(m_tilde, grid);
        const double half_pitch = grid.spacing;
        const double col = (m_tilde - 1) % grid.count_x;
        const double row_ceil = std::ceil(static_cast<double>(m_tilde) / grid.count_x);
        const double dx = (col - 0.5 * (grid.count_x - 1)) * half_pitch -
                          (antenna - 0.5 * (layout.bs_antenna_count + 1)) * half_pitch;
        const double dy_units = row_ceil - 0.5 * (grid.count_y + 1);
        return std::sqrt(layer_spacing * layer_spacing + dx * dx + dy_units * dy_units * half_pitch * half_pitch);
    }

    inline ScenarioDistances scenario_distances(const ScenarioLayout &layout)
    {
        layout.validate();
        ScenarioDistances out;
        const Point3 bsim = layout.bsim_center();
        const Point3 csim = layout.csim_center();
        out.bsim_csim = distance(bsim, csim);
        out.csim_user.reserve(layout.user_count);
        out.bsim_user.reserve(layout.user_count);
        for (int k = 1; k <= layout.user_count; ++k)
        {
            const Point3 u = layout.user_position(k);
            out.csim_user.push_back(distance(csim, u));
            out.bsim_user.push_back(distance(bsim, u));
        }
        return out;
    }

} // namespace dsim

#endif // DSIM_GEOMETRY_HPP
