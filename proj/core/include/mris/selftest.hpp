// SPDX-License-Identifier: Apache-2.0
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

/**
 * @file selftest.hpp
 * @brief Built-in sanity suite: manifold properties, gradient checks of every
 * application objective and the Rayleigh-quotient solver oracle.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mris {

struct SelfCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Idempotence, tangency, retraction feasibility/locality and projection
/// orthogonality on circle, Stiefel and product manifolds.
std::vector<SelfCheck> manifold_property_checks(int cases, std::uint64_t seed);

/// gradient_check of the trace-inverse, weighted-SINR, statistical-gain and
/// mask-fit objectives at `points` random points each.
std::vector<SelfCheck> objective_gradient_checks(int points, std::uint64_t seed);

/// RGD and RCG on min w^H A w over the unit sphere against the smallest
/// eigenvalue of A.
std::vector<SelfCheck> solver_oracle_checks(int seeds, std::uint64_t seed);

std::vector<SelfCheck> run_selftest(std::uint64_t seed);

}  // namespace mris
