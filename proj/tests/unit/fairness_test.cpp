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

#include <map>

#include <gtest/gtest.h>

#include "mris/beamforming.hpp"
#include "mris/fairness.hpp"
#include "test_util.hpp"

using namespace mris;
using mris::test::gaussian;
using mris::test::unit_phases;

namespace {

ChannelSet random_channels(Index m, Index k, Index n, std::mt19937_64& rng) {
  ChannelSet ch;
  ch.G = {gaussian(m, n, rng)};
  ch.h_r.resize(1);
  for (Index i = 0; i < k; ++i) {
    ch.h_r[0].push_back(gaussian(n, rng));
    ch.h_d.push_back(gaussian(m, rng));
  }
  ch.noise_power_mw = 0.1;
  return ch;
}

}  // namespace

TEST(FairnessTest, SingleUserGamma) {
  std::mt19937_64 rng(1);
  const ChannelSet ch = random_channels(4, 1, 6, rng);
  const CVector th = unit_phases(6, rng);
  const CommonSinr c = trace_inverse_objective(ch, th, 0.1, 2.0);
  EXPECT_NEAR(c.gamma, 2.0 * ch.composite(0, th).squaredNorm() / 0.1, 1e-10 * c.gamma);
}

TEST(FairnessTest, OrthonormalGamma) {
  ChannelSet ch;
  ch.G = {CMatrix::Zero(4, 2)};
  ch.h_r = {{CVector::Ones(2), CVector::Ones(2), CVector::Ones(2)}};
  for (Index k = 0; k < 3; ++k) ch.h_d.push_back(CVector::Unit(4, k));
  const CVector th = CVector::Ones(2);
  EXPECT_NEAR(trace_inverse_objective(ch, th, 0.5, 3.0).gamma, 3.0 / (3 * 0.5), 1e-12);
}

TEST(FairnessTest, TraceInverseIsInverseEigenvalueSum) {
  std::mt19937_64 rng(2);
  const ChannelSet ch = random_channels(8, 3, 16, rng);
  const TraceInverseModel model(ch);
  const CVector th = unit_phases(16, rng);
  const CMatrix H = model.channel(th);
  const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(H.adjoint() * H).eigenvalues();
  const double oracle = ev.cwiseInverse().sum();
  EXPECT_NEAR(model.value(th), oracle, 1e-10 * oracle);
}

TEST(FairnessTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const ChannelSet ch = random_channels(8, 3, 16, rng);
  const TraceInverseModel model(ch);
  const ManifoldPoint x = random_point(Manifold::complex_circle(16), 4);
  const Problem p = trace_inverse_problem(model, model.value(x.ambient()));
  EXPECT_LE(gradient_check(p, x, 10, 1e-5, 5), 1e-5);
}

TEST(FairnessTest, ObjectiveEgradIsForMaximization) {
  // gamma grows along the returned ascent direction
  std::mt19937_64 rng(6);
  const ChannelSet ch = random_channels(6, 2, 8, rng);
  const ManifoldPoint x = random_point(Manifold::complex_circle(8), 7);
  const CommonSinr c = trace_inverse_objective(ch, x.ambient(), 0.1, 1.0);
  const TangentVector g = egrad_to_rgrad(x, c.egrad);
  const ManifoldPoint y = retract(x, g.scaled(1e-6 / norm(g)));
  EXPECT_GT(trace_inverse_objective(ch, y.ambient(), 0.1, 1.0).gamma, c.gamma);
}

TEST(FairnessTest, AnalyticalSingleElementMatchesGrid) {
  std::mt19937_64 rng(8);
  const ChannelSet ch = random_channels(4, 2, 1, rng);
  const TraceInverseModel model(ch);
  CVector th0(1);
  th0[0] = 1.0;
  const AnalyticalResult r = per_element_analytical(model, th0, 1);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    CVector t(1);
    t[0] = std::polar(1.0, 2.0 * kPi * i / 10000);
    best = std::min(best, model.value(t));
  }
  EXPECT_NEAR(r.trace_inverse, best, 1e-5 * best);
  EXPECT_LE(r.trace_inverse, best * (1 + 1e-12));
}

TEST(FairnessTest, AnalyticalMonotoneAndNearStationaryAfterRcg) {
  std::mt19937_64 rng(9);
  const ChannelSet ch = random_channels(8, 4, 16, rng);
  const TraceInverseModel model(ch);
  const CVector th0 = unit_phases(16, rng);
  const AnalyticalResult r = per_element_analytical(model, th0, 10);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);

  const ManifoldPoint x0(Manifold::complex_circle(16), th0);
  SolverOptions opts;
  opts.max_iters = 5000;
  opts.grad_tol = 1e-10;
  const SolverResult s = solve_rcg(trace_inverse_problem(model, model.value(th0)), x0, opts);
  const double g_rcg = model.value(s.point.ambient());
  const AnalyticalResult polish = per_element_analytical(model, s.point.ambient(), 1);
  // trace-inverse improvement of < 0.1% is a gamma improvement of < 0.1%
  EXPECT_GE(polish.trace_inverse, g_rcg * (1 - 1e-3));
  EXPECT_LE(polish.trace_inverse, g_rcg * (1 + 1e-12));
}

TEST(FairnessTest, RcgBeatsRandomSampling) {
  std::mt19937_64 rng(10);
  const ChannelSet ch = random_channels(8, 4, 16, rng);
  const TraceInverseModel model(ch);
  const ManifoldPoint x0 = random_point(Manifold::complex_circle(16), 11);
  SolverOptions opts;
  opts.max_iters = 5000;
  const SolverResult s = solve_rcg(trace_inverse_problem(model, model.value(x0.ambient())), x0, opts);
  const double best = model.value(s.point.ambient());
  EXPECT_LE(best, model.value(x0.ambient()));
  EXPECT_LT(s.trace.final_grad_norm(), 1e-6);
  double sampled = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100000; ++i) sampled = std::min(sampled, model.value(unit_phases(16, rng)));
  EXPECT_GE(sampled, best * 0.99);
}

TEST(FairnessTest, ObjectiveEquivalenceGammaVsTraceInverse) {
  // maximizing gamma and minimizing tr((H^H H)^-1) give the same theta
  std::mt19937_64 rng(12);
  const ChannelSet ch = random_channels(8, 3, 12, rng);
  const TraceInverseModel model(ch);
  const ManifoldPoint x0 = random_point(Manifold::complex_circle(12), 13);
  SolverOptions opts;
  opts.max_iters = 5000;
  opts.grad_tol = 1e-10;
  opts.record_time = false;
  const Problem min_tr = trace_inverse_problem(model, 1.0);
  const Problem max_gamma{min_tr.manifold,
                          [&ch](const ManifoldPoint& x) { return trace_inverse_objective(ch, x.ambient(), 1.0, 1.0).gamma; },
                          [&ch](const ManifoldPoint& x) { return trace_inverse_objective(ch, x.ambient(), 1.0, 1.0).egrad; },
                          Sense::Maximize};
  const double a = 1.0 / model.value(solve_rcg(min_tr, x0, opts).point.ambient());
  const double b = 1.0 / model.value(solve_rcg(max_gamma, x0, opts).point.ambient());
  EXPECT_NEAR(a, b, 1e-8 * a);
}

TEST(FairnessTest, TrialRowsEqualSinr) {
  FairnessConfig cfg;
  cfg.pmax_dbm = {20.0, 30.0};
  const FairnessTrial t = run_fairness_trial(cfg, 0, 42);
  ASSERT_EQ(t.rows.size(), 6u);
  std::map<std::string, int> methods;
  for (const auto& r : t.rows) {
    ++methods[r.method];
    EXPECT_LE(r.sinr_spread, 1e-9);
    EXPECT_NEAR(r.common_rate_bps_hz, std::log2(1.0 + r.gamma), 1e-12);
    EXPECT_TRUE(std::isnan(r.runtime_ms));
  }
  EXPECT_EQ(methods.size(), 3u);
}

TEST(FairnessTest, TrialOrderingOnSingleDraw) {
  FairnessConfig cfg;
  cfg.pmax_dbm = {25.0};
  const FairnessTrial t = run_fairness_trial(cfg, 0, 7);
  std::map<std::string, double> rate;
  for (const auto& r : t.rows) rate[r.method] = r.common_rate_bps_hz;
  EXPECT_GT(rate.at("mo"), rate.at("random_phase"));
}

TEST(FairnessTest, NoRisDegeneratesToPlainZf) {
  FairnessConfig cfg;
  cfg.N = 0;
  cfg.pmax_dbm = {25.0};
  const FairnessTrial t = run_fairness_trial(cfg, 0, 3);
  ASSERT_FALSE(t.rows.empty());
  for (const auto& r : t.rows) EXPECT_DOUBLE_EQ(r.gamma, t.rows.front().gamma);
}

TEST(FairnessTest, ConfigValidation) {
  FairnessConfig cfg;
  cfg.K = 9;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.pmax_dbm.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
}
