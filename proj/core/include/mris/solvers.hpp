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
 * @file solvers.hpp
 * @brief First-order Riemannian solvers: gradient descent, Polak-Ribiere+
 * conjugate gradient, a manifold particle swarm and a finite-difference
 * gradient checker.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mris/manifold.hpp"

namespace mris {

enum class Sense { Minimize, Maximize };

struct Problem {
  Manifold manifold;
  std::function<double(const ManifoldPoint&)> cost;
  /// Euclidean gradient, egrad = 2 df/d(conj x).
  std::function<CVector(const ManifoldPoint&)> egrad;
  Sense sense = Sense::Minimize;
};

struct ArmijoOptions {
  double c1 = 1e-4;
  double shrink = 0.5;
  double init_step = 1.0;
  int max_backtracks = 50;
  /// Start each line search from the previous accepted step length instead
  /// of init_step (the first search always starts from init_step).
  bool adaptive = true;
};

enum class StepRule { Armijo, Fixed };

struct SolverOptions {
  int max_iters = 500;
  double grad_tol = 1e-6;
  ArmijoOptions armijo;
  StepRule step_rule = StepRule::Armijo;
  /// Step multiplier used when step_rule == Fixed.
  double fixed_step = 0.1;
  /// 0 selects the manifold dimension.
  int cg_restart_period = 0;
  std::uint64_t seed = 0;
  /// Assert the point constraint (to kPointTolerance) on every iterate.
  bool check_feasibility = false;
  bool record_time = true;
};

enum class SolverStatus { Converged, MaxIters, Degenerate, LineSearchFailed };

std::string to_string(SolverStatus s);

struct IterationRecord {
  int iter = 0;
  /// Cost in the problem's own sense (not negated for maximization).
  double cost = 0.0;
  /// NaN for the particle swarm, which does not evaluate gradients.
  double grad_norm = 0.0;
  /// Norm of the accepted tangent step (0 on the initial record).
  double step = 0.0;
  double elapsed_ms = 0.0;
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  SolverStatus status = SolverStatus::MaxIters;

  /// Number of iterations performed (records minus the initial one).
  int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
  double final_cost() const { return records.back().cost; }
  double final_grad_norm() const { return records.back().grad_norm; }
};

struct SolverResult {
  ManifoldPoint point;
  SolverTrace trace;
};

SolverResult solve_rgd(const Problem& p, const ManifoldPoint& x0, const SolverOptions& opts = {});
SolverResult solve_rcg(const Problem& p, const ManifoldPoint& x0, const SolverOptions& opts = {});

struct PsoOptions {
  int swarm_size = 20;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  /// Seeds the first particles; the rest are random points drawn from
  /// SolverOptions::seed. Initial velocities are zero.
  std::vector<ManifoldPoint> initial;
};

/// Runs opts.max_iters swarm updates and returns the best particle seen.
SolverResult solve_manifold_pso(const Problem& p, const SolverOptions& opts,
                                const PsoOptions& pso);

enum class SolverKind { Rgd, Rcg, Pso };

std::string to_string(SolverKind k);
/// Accepts "rgd"/"sd", "rcg"/"cg" and "pso".
SolverKind parse_solver_kind(const std::string& name);

/// Dispatches to one of the solvers; for the swarm, x0 becomes the first
/// particle.
SolverResult solve(SolverKind kind, const Problem& p, const ManifoldPoint& x0,
                   const SolverOptions& opts, PsoOptions pso = {});

/// Max relative error between <rgrad, v> and a central difference of the cost
/// along retract(x, +-h v), over random unit tangent directions v.
double gradient_check(const Problem& p, const ManifoldPoint& x, int num_directions, double h,
                      std::uint64_t seed = 0);

}  // namespace mris
