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

#include <gtest/gtest.h>

#include "mris/channel.hpp"
#include "mris/fairness.hpp"
#include "mris/solvers.hpp"
#include "test_util.hpp"

using namespace mris;
using mris::test::gaussian;
using mris::test::unit_phases;

namespace {

Problem constant_problem(const Manifold& m) {
  return {m, [](const ManifoldPoint&) { return 3.0; },
          [m](const ManifoldPoint&) { return CVector(CVector::Zero(m.ambient_size())); }, Sense::Minimize};
}

// ||theta - c||^2, egrad 2 (theta - c)
Problem target_problem(const CVector& c) {
  return {Manifold::complex_circle(c.size()),
          [c](const ManifoldPoint& x) { return (x.ambient() - c).squaredNorm(); },
          [c](const ManifoldPoint& x) { return CVector(2.0 * (x.ambient() - c)); }, Sense::Minimize};
}

CMatrix hermitian(Index n, std::mt19937_64& rng) {
  const CMatrix B = gaussian(n, n, rng);
  return 0.5 * (B + B.adjoint());
}

Problem rayleigh(const CMatrix& A, Sense sense) {
  return {Manifold::stiefel(A.rows(), 1),
          [A](const ManifoldPoint& x) { return (x.ambient().adjoint() * A * x.ambient())(0).real(); },
          [A](const ManifoldPoint& x) { return CVector(2.0 * A * x.ambient()); }, sense};
}

void expect_monotone(const SolverTrace& t, Sense sense) {
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    if (sense == Sense::Minimize) {
      EXPECT_LE(t.records[i].cost, t.records[i - 1].cost);
    } else {
      EXPECT_GE(t.records[i].cost, t.records[i - 1].cost);
    }
  }
}

}  // namespace

TEST(SolversTest, ConstantCostReturnsStart) {
  const Manifold m = Manifold::complex_circle(4);
  const ManifoldPoint x0 = random_point(m, 1);
  for (auto* solve : {&solve_rgd, &solve_rcg}) {
    const SolverResult r = solve(constant_problem(m), x0, {});
    EXPECT_EQ(r.trace.status, SolverStatus::Converged);
    EXPECT_EQ(r.trace.iterations(), 0);
    EXPECT_EQ(r.trace.final_grad_norm(), 0.0);
    EXPECT_EQ(r.point.ambient(), x0.ambient());
  }
}

TEST(SolversTest, TargetMatching) {
  std::mt19937_64 rng(2);
  const CVector c = unit_phases(8, rng);
  const Problem p = target_problem(c);
  SolverOptions opts;
  opts.grad_tol = 1e-8;
  opts.check_feasibility = true;
  for (auto* solve : {&solve_rgd, &solve_rcg}) {
    const SolverResult r = solve(p, random_point(p.manifold, 3), opts);
    EXPECT_LE(r.trace.final_cost(), 1e-10);
    expect_monotone(r.trace, Sense::Minimize);
  }
}

TEST(SolversTest, MaximizeRayleighMatchesLargestEigenvalue) {
  std::mt19937_64 rng(4);
  const CMatrix A = hermitian(6, rng);
  const double lmax = Eigen::SelfAdjointEigenSolver<CMatrix>(A).eigenvalues().maxCoeff();
  SolverOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-9;
  const Problem p = rayleigh(A, Sense::Maximize);
  for (auto* solve : {&solve_rgd, &solve_rcg}) {
    const SolverResult r = solve(p, random_point(p.manifold, 5), opts);
    EXPECT_NEAR(r.trace.final_cost(), lmax, 1e-8);
    expect_monotone(r.trace, Sense::Maximize);
  }
}

TEST(SolversTest, RcgNoSlowerThanRgdOnMostSeeds) {
  int wins = 0;
  SolverOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-9;
  opts.record_time = false;
  for (int s = 0; s < 50; ++s) {
    std::mt19937_64 rng(1000 + s);
    const CMatrix A = hermitian(16, rng);
    const double lmin = Eigen::SelfAdjointEigenSolver<CMatrix>(A).eigenvalues()[0];
    const Problem p = rayleigh(A, Sense::Minimize);
    const ManifoldPoint x0 = random_point(p.manifold, 2000 + s);
    const SolverResult g = solve_rgd(p, x0, opts);
    const SolverResult c = solve_rcg(p, x0, opts);
    EXPECT_NEAR(g.trace.final_cost(), lmin, 1e-8);
    EXPECT_NEAR(c.trace.final_cost(), lmin, 1e-8);
    if (c.trace.iterations() <= g.trace.iterations()) ++wins;
  }
  EXPECT_GE(wins, 40);
}

TEST(SolversTest, ArmijoSufficientDecrease) {
  std::mt19937_64 rng(6);
  const CMatrix A = hermitian(10, rng);
  const Problem p = rayleigh(A, Sense::Minimize);
  SolverOptions opts;
  opts.armijo.adaptive = false;
  const SolverResult r = solve_rgd(p, random_point(p.manifold, 7), opts);
  // steepest descent: accepted step length s = alpha ||g||, so the decrease is at least c1 s ||g||
  for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
    const auto& prev = r.trace.records[i - 1];
    const auto& cur = r.trace.records[i];
    EXPECT_LE(cur.cost, prev.cost - opts.armijo.c1 * cur.step * prev.grad_norm + 1e-14);
  }
}

TEST(SolversTest, ConvergedImpliesStationary) {
  std::mt19937_64 rng(8);
  const Problem p = rayleigh(hermitian(8, rng), Sense::Minimize);
  SolverOptions opts;
  opts.max_iters = 5000;
  const SolverResult r = solve_rcg(p, random_point(p.manifold, 9), opts);
  ASSERT_EQ(r.trace.status, SolverStatus::Converged);
  EXPECT_LT(r.trace.final_grad_norm(), opts.grad_tol);
}

TEST(SolversTest, FixedStepMode) {
  std::mt19937_64 rng(10);
  const CVector c = unit_phases(5, rng);
  SolverOptions opts;
  opts.step_rule = StepRule::Fixed;
  opts.fixed_step = 0.1;
  opts.max_iters = 2000;
  const Problem p = target_problem(c);
  const SolverResult r = solve_rgd(p, random_point(p.manifold, 11), opts);
  EXPECT_LE(r.trace.final_cost(), 1e-8);
}

TEST(SolversTest, Determinism) {
  std::mt19937_64 rng(12);
  const Problem p = rayleigh(hermitian(8, rng), Sense::Minimize);
  SolverOptions opts;
  opts.record_time = false;
  const ManifoldPoint x0 = random_point(p.manifold, 13);
  const SolverResult a = solve_rcg(p, x0, opts), b = solve_rcg(p, x0, opts);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    EXPECT_EQ(a.trace.records[i].cost, b.trace.records[i].cost);
    EXPECT_EQ(a.trace.records[i].grad_norm, b.trace.records[i].grad_norm);
  }
  EXPECT_EQ(a.point.ambient(), b.point.ambient());
}

TEST(SolversTest, PsoSingleParticleAtOptimum) {
  std::mt19937_64 rng(14);
  const CVector c = unit_phases(6, rng);
  const Problem p = target_problem(c);
  SolverOptions opts;
  opts.max_iters = 50;
  PsoOptions pso;
  pso.swarm_size = 1;
  pso.initial = {ManifoldPoint(p.manifold, c)};
  const SolverResult r = solve_manifold_pso(p, opts, pso);
  EXPECT_LE((r.point.ambient() - c).norm(), 1e-12);
}

TEST(SolversTest, PsoTargetMatching) {
  std::mt19937_64 rng(15);
  const Problem p = target_problem(unit_phases(8, rng));
  SolverOptions opts;
  opts.max_iters = 200;
  opts.seed = 16;
  PsoOptions pso;
  pso.swarm_size = 40;
  const SolverResult r = solve_manifold_pso(p, opts, pso);
  EXPECT_LE(r.trace.final_cost(), 1e-3);
  expect_monotone(r.trace, Sense::Minimize);
  EXPECT_LE(r.point.manifold().point_error(r.point.ambient()), 1e-10);
}

TEST(SolversTest, PsoNoBetterThanRcgOnFairnessObjective) {
  const SystemGeometry geom = ris_semicircle_geometry(4, 20.0, 100.0);
  ChannelSet ch = sample_channels(geom, {FadingModel::PureLos, 10.0, AngleModel::RandomUniform,
                                         BsRisStructure::PerElement, true},
                                  8, 16, 17);
  ch.noise_power_mw = dbm_to_mw(-104.0);
  const TraceInverseModel model(ch);
  const ManifoldPoint x0 = random_point(Manifold::complex_circle(16), 18);
  const Problem p = trace_inverse_problem(model, model.value(x0.ambient()));
  SolverOptions opts;
  opts.seed = 19;
  const double rcg = solve_rcg(p, x0, opts).trace.final_cost();
  opts.max_iters = 100;
  const double pso = solve_manifold_pso(p, opts, {}).trace.final_cost();
  EXPECT_GE(pso, rcg - 1e-9);
  EXPECT_LE(rcg, p.cost(x0));
}

TEST(SolversTest, GradientCheckLinearCost) {
  std::mt19937_64 rng(20);
  const CVector c = gaussian(6, rng);
  const Problem p{Manifold::complex_circle(6), [c](const ManifoldPoint& x) { return c.dot(x.ambient()).real(); },
                  [c](const ManifoldPoint&) { return c; }, Sense::Minimize};
  EXPECT_LE(gradient_check(p, random_point(p.manifold, 21), 10, 1e-5, 22), 1e-7);
  EXPECT_EQ(gradient_check(constant_problem(p.manifold), random_point(p.manifold, 23), 5, 1e-5), 0.0);
}

TEST(SolversTest, GradientCheckCatchesWrongGradient) {
  std::mt19937_64 rng(24);
  const CVector c = gaussian(6, rng);
  const Problem p{Manifold::complex_circle(6), [c](const ManifoldPoint& x) { return c.dot(x.ambient()).real(); },
                  [c](const ManifoldPoint&) { return CVector(2.0 * c); }, Sense::Minimize};
  EXPECT_GT(gradient_check(p, random_point(p.manifold, 25), 5, 1e-5, 26), 0.1);
}

TEST(SolversTest, SolverKindNames) {
  EXPECT_EQ(parse_solver_kind("sd"), SolverKind::Rgd);
  EXPECT_EQ(parse_solver_kind("cg"), SolverKind::Rcg);
  EXPECT_EQ(parse_solver_kind("pso"), SolverKind::Pso);
  EXPECT_THROW(parse_solver_kind("newton"), ConfigError);
}
