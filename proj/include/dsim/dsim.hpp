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


#ifndef DSIM_DSIM_HPP
#define DSIM_DSIM_HPP

// Core library (Eigen only). config.hpp and experiments.hpp additionally need
// Boost.PropertyTree and nlohmann/json are not included here.

#include "channel_stats.hpp"
#include "core.hpp"
#include "estimation.hpp"
#include "geometry.hpp"
#include "monte_carlo.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "phase_profile.hpp"
#include "propagation.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "spectral_efficiency.hpp"

#endif // DSIM_DSIM_HPP
