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

#include "mris/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <sstream>

namespace mris {
namespace {

using Clock = std::chrono::steady_clock;

void validate(const Problem& p, const SolverOptions& opts) {
  if (!p.cost || !p.egrad) throw Error("problem needs both cost and egrad");
  if (opts.max_iters < 0) throw Error("max_iters must be non-negative");
  if (!(opts.grad_tol > 0.0)) throw Error("grad_tol must be positive");
  const auto& a = opts.armijo;
  if (!(a.c1 > 0.0 && a.c1 < 1.0)) throw Error("armijo c1 must lie in (0, 1)");
  if (!(a.shrink > 0.0 && a.shrink < 1.0)) throw Error("armijo shrink must lie in (0, 1)");
  if (!(a.init_step > 0.0)) throw Error("armijo init_step must be positive");
  if (a.max_backtracks < 0) throw Error("max_backtracks must be non-negative");
  if (opts.step_rule == StepRule::Fixed && !(opts.fixed_step > 0.0)) {
    throw Error("fixed_step must be positive");
  }
}

// Minimization view of a problem: cost and gradient are negated for
// maximization, and the trace converts back.
class Objective {
 public:
  Objective(const Problem& p, const SolverOptions& opts)
      : p_(p), opts_(opts), sign_(p.sense == Sense::Maximize ? -1.0 : 1.0),
        start_(Clock::now()) {}

  double cost(const ManifoldPoint& x) const { return sign_ * p_.cost(x); }

  TangentVector rgrad(const ManifoldPoint& x) const {
    CVector e = p_.egrad(x);
    p_.manifold.check_shape(e, "egrad");
    if (sign_ < 0) e = -e;
    return egrad_to_rgrad(x, e);
  }

  void record(SolverTrace& trace, int iter, double internal_cost, double grad_norm,
              double step) const {
    IterationRecord r;
    r.iter = iter;
    r.cost = sign_ * internal_cost;
    r.grad_norm = grad_norm;
    r.step = step;
    if (opts_.record_time) {
      r.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    }
    trace.records.push_back(r);
  }

  void check(const ManifoldPoint& x) const {
    if (!opts_.check_feasibility) return;
    const double err = x.manifold().point_error(x.ambient());
    if (err > kPointTolerance) {
      std::ostringstream os;
      os << "iterate left the manifold: constraint error " << err;
      throw InvalidPointError(os.str());
    }
  }

 private:
  const Problem& p_;
  const SolverOptions& opts_;
  double sign_;
  Clock::time_point start_;
};

struct StepOutcome {
  enum class Kind { Accepted, Failed, Degenerate } kind;
  std::optional<ManifoldPoint> x;
  double cost = 0.0;
  double alpha = 0.0;
  int backtracks = 0;
};

// Backtracking along d from x. slope = <g, d> must be negative.
StepOutcome line_search(const Objective& obj, const ManifoldPoint& x, double fx,
                        const TangentVector& d, double slope, double alpha0,
                        const SolverOptions& opts) {
  const auto& a = opts.armijo;
  StepOutcome out{StepOutcome::Kind::Failed, std::nullopt};
  if (opts.step_rule == StepRule::Fixed) {
    try {
      ManifoldPoint y = retract(x, d.scaled(opts.fixed_step));
      out.cost = obj.cost(y);
      out.x = std::move(y);
      out.alpha = opts.fixed_step;
      out.kind = StepOutcome::Kind::Accepted;
    } catch (const DegenerateRetractionError&) {
      out.kind = StepOutcome::Kind::Degenerate;
    }
    return out;
  }
  double alpha = alpha0;
  for (int b = 0; b <= a.max_backtracks; ++b, alpha *= a.shrink) {
    try {
      ManifoldPoint y = retract(x, d.scaled(alpha));
      const double fy = obj.cost(y);
      if (std::isfinite(fy) && fy <= fx + a.c1 * alpha * slope) {
        out.kind = StepOutcome::Kind::Accepted;
        out.x = std::move(y);
        out.cost = fy;
        out.alpha = alpha;
        out.backtracks = b;
        return out;
      }
    } catch (const DegenerateRetractionError&) {
      out.kind = StepOutcome::Kind::Degenerate;
      return out;
    }
  }
  return out;
}

// Shared driver for RGD and RCG; `conjugate` switches the direction update.
SolverResult descend(const Problem& p, const ManifoldPoint& x0, const SolverOptions& opts,
                     bool conjugate) {
  validate(p, opts);
  if (x0.manifold() != p.manifold) {
    throw DimensionError("initial point lies on " + x0.manifold().describe() +
                         ", problem is on " + p.manifold.describe());
  }
  const Objective obj(p, opts);
  const int restart_period = opts.cg_restart_period > 0
                                 ? opts.cg_restart_period
                                 : static_cast<int>(std::max<Index>(1, p.manifold.dimension()));

  ManifoldPoint x = x0;
  obj.check(x);
  double fx = obj.cost(x);
  TangentVector g = obj.rgrad(x);
  double gnorm = norm(g);
  TangentVector d = -g;

  SolverTrace trace;
  obj.record(trace, 0, fx, gnorm, 0.0);

  double prev_step = -1.0;  // accepted step length of the previous iteration
  bool prev_clean = false;  // previous search accepted without backtracking
  int since_restart = 0;

  for (int k = 0;; ++k) {
    if (gnorm < opts.grad_tol) {
      trace.status = SolverStatus::Converged;
      break;
    }
    if (k >= opts.max_iters) {
      trace.status = SolverStatus::MaxIters;
      break;
    }
    double slope = inner(g, d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -gnorm * gnorm;
      since_restart = 0;
    }
    const double dnorm = norm(d);
    double alpha0 = opts.armijo.init_step;
    if (opts.armijo.adaptive && prev_step > 0.0) {
      alpha0 = prev_step / dnorm;
      if (prev_clean) alpha0 /= opts.armijo.shrink;
    }

    StepOutcome step = line_search(obj, x, fx, d, slope, alpha0, opts);
    if (step.kind == StepOutcome::Kind::Degenerate) {
      trace.status = SolverStatus::Degenerate;
      break;
    }
    if (step.kind == StepOutcome::Kind::Failed) {
      trace.status = SolverStatus::LineSearchFailed;
      break;
    }

    ManifoldPoint y = std::move(*step.x);
    obj.check(y);
    TangentVector gy = obj.rgrad(y);
    const double step_len = step.alpha * dnorm;

    if (conjugate) {
      ++since_restart;
      const TangentVector g_old = transport(y, g);
      const double denom = inner(g, g);
      double beta = 0.0;
      if (denom > 0.0) {
        const CVector diff = gy.ambient() - g_old.ambient();
        beta = std::max(0.0, gy.ambient().dot(diff).real() / denom);
      }
      if (since_restart >= restart_period) {
        beta = 0.0;
        since_restart = 0;
      }
      if (beta == 0.0) {
        d = -gy;
      } else {
        const TangentVector td = transport(y, d);
        d = project_tangent(y, beta * td.ambient() - gy.ambient());
      }
    } else {
      d = -gy;
    }

    x = std::move(y);
    fx = step.cost;
    g = std::move(gy);
    gnorm = norm(g);
    prev_step = step_len;
    prev_clean = step.backtracks == 0;
    obj.record(trace, k + 1, fx, gnorm, step_len);
  }
  return {x, trace};
}

}  // namespace

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged:
      return "converged";
    case SolverStatus::MaxIters:
      return "max_iters";
    case SolverStatus::Degenerate:
      return "degenerate";
    case SolverStatus::LineSearchFailed:
      return "line_search_failed";
  }
  return "unknown";
}

SolverResult solve_rgd(const Problem& p, const ManifoldPoint& x0, const SolverOptions& opts) {
  return descend(p, x0, opts, false);
}

SolverResult solve_rcg(const Problem& p, const ManifoldPoint& x0, const SolverOptions& opts) {
  return descend(p, x0, opts, true);
}

SolverResult solve_manifold_pso(const Problem& p, const SolverOptions& opts,
                                const PsoOptions& pso) {
  if (!p.cost) throw Error("problem needs a cost");
  if (pso.swarm_size < 1) throw Error("swarm_size must be positive");
  if (static_cast<int>(pso.initial.size()) > pso.swarm_size) {
    throw Error("more initial particles than swarm_size");
  }
  const Objective obj(p, opts);
  const Manifold& m = p.manifold;
  const Index n = m.ambient_size();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<CVector> pos;
  pos.reserve(pso.swarm_size);
  for (const auto& x : pso.initial) {
    if (x.manifold() != m) throw DimensionError("initial particle on the wrong manifold");
    pos.push_back(x.ambient());
  }
  while (static_cast<int>(pos.size()) < pso.swarm_size) pos.push_back(m.random(rng));

  std::vector<CVector> vel(pos.size(), CVector::Zero(n));
  std::vector<CVector> best_pos = pos;
  std::vector<double> best_cost(pos.size());
  std::size_t g = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    best_cost[i] = obj.cost(ManifoldPoint(m, pos[i]));
    if (best_cost[i] < best_cost[g]) g = i;
  }

  SolverTrace trace;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  obj.record(trace, 0, best_cost[g], nan, 0.0);

  for (int k = 0; k < opts.max_iters; ++k) {
    const CVector gbest = best_pos[g];
    double moved = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (Index e = 0; e < n; ++e) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        vel[i][e] = pso.inertia * vel[i][e] + pso.cognitive * r1 * (best_pos[i][e] - pos[i][e]) +
                    pso.social * r2 * (gbest[e] - pos[i][e]);
      }
      CVector next;
      try {
        next = m.retract(pos[i], m.project(pos[i], vel[i]));
      } catch (const DegenerateRetractionError&) {
        continue;
      }
      ManifoldPoint xp(m, next);
      obj.check(xp);
      moved = std::max(moved, (next - pos[i]).norm());
      pos[i] = std::move(next);
      const double c = obj.cost(xp);
      if (c < best_cost[i]) {
        best_cost[i] = c;
        best_pos[i] = pos[i];
      }
    }
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (best_cost[i] < best_cost[g]) g = i;
    }
    obj.record(trace, k + 1, best_cost[g], nan, moved);
  }
  trace.status = SolverStatus::MaxIters;
  return {ManifoldPoint(m, best_pos[g]), trace};
}

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Rgd:
      return "rgd";
    case SolverKind::Rcg:
      return "rcg";
    case SolverKind::Pso:
      return "pso";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "rgd" || name == "sd") return SolverKind::Rgd;
  if (name == "rcg" || name == "cg") return SolverKind::Rcg;
  if (name == "pso") return SolverKind::Pso;
  throw ConfigError("unknown solver '" + name + "' (expected rgd, rcg or pso)");
}

SolverResult solve(SolverKind kind, const Problem& p, const ManifoldPoint& x0,
                   const SolverOptions& opts, PsoOptions pso) {
  switch (kind) {
    case SolverKind::Rgd:
      return solve_rgd(p, x0, opts);
    case SolverKind::Rcg:
      return solve_rcg(p, x0, opts);
    case SolverKind::Pso:
      pso.initial.insert(pso.initial.begin(), x0);
      while (static_cast<int>(pso.initial.size()) > pso.swarm_size) pso.initial.pop_back();
      return solve_manifold_pso(p, opts, pso);
  }
  throw Error("unknown solver kind");
}

double gradient_check(const Problem& p, const ManifoldPoint& x, int num_directions, double h,
                      std::uint64_t seed) {
  if (!(h > 0.0)) throw Error("gradient_check needs h > 0");
  const Manifold& m = x.manifold();
  const TangentVector rg = egrad_to_rgrad(x, p.egrad(x));
  const double rg_norm = norm(rg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double worst = 0.0;
  for (int i = 0; i < num_directions; ++i) {
    CVector raw(m.ambient_size());
    for (Index e = 0; e < raw.size(); ++e) raw[e] = Complex(gauss(rng), gauss(rng));
    TangentVector v = project_tangent(x, raw);
    const double vn = norm(v);
    if (vn == 0.0) continue;
    v = v.scaled(1.0 / vn);
    const double fp = p.cost(retract(x, v.scaled(h)));
    const double fm = p.cost(retract(x, v.scaled(-h)));
    const double fd = (fp - fm) / (2.0 * h);
    const double an = inner(rg, v);
    const double scale = std::max(std::abs(fd), rg_norm);
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(an - fd) / scale);
  }
  return worst;
}

}  // namespace mris
