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

#pragma once

#include <random>

#include "mris/types.hpp"

namespace mris::test {

inline CVector gaussian(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

inline CMatrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  CMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) m.col(c) = gaussian(rows, rng);
  return m;
}

inline CVector unit_phases(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = std::polar(1.0, u(rng));
  return v;
}

}  // namespace mris::test
