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
#include "mris/pilot_reuse.hpp"
#include "test_util.hpp"

using namespace mris;
using mris::test::gaussian;
using mris::test::unit_phases;

namespace {

StatisticalCsi random_stat(Index m, Index n, int users, bool direct, std::mt19937_64& rng) {
  StatisticalCsi s;
  s.G_mean = {gaussian(m, n, rng)};
  s.h_r_mean.resize(1);
  s.var_G = {0.1};
  s.var_r.resize(1);
  for (int k = 0; k < users; ++k) {
    s.h_d_mean.push_back(direct ? gaussian(m, rng) : CVector(CVector::Zero(m)));
    s.h_r_mean[0].push_back(gaussian(n, rng));
    s.var_d.push_back(0.1);
    s.var_r[0].push_back(0.1);
  }
  return s;
}

}  // namespace

TEST(PilotReuseTest, SingleRisAtSectorMidpoint) {
  PilotConfig cfg;
  cfg.R = 1;
  const PilotScenario sc = build_pilot_scenario(cfg, 1);
  ASSERT_EQ(sc.geometry.ris.size(), 1u);
  const Vec2 r = sc.geometry.ris[0];
  EXPECT_NEAR(std::atan2(r.y(), r.x()), kPi / 2.0, 1e-12);
  EXPECT_NEAR(r.norm(), cfg.ris_distance_m, 1e-9);
}

TEST(PilotReuseTest, FullPilotReuse) {
  PilotConfig cfg;
  const PilotScenario sc = build_pilot_scenario(cfg, 2);
  ASSERT_EQ(sc.pilot.size(), 16u);
  std::map<int, int> uses;
  std::map<int, int> group_size;
  for (std::size_t k = 0; k < sc.pilot.size(); ++k) {
    ++uses[sc.pilot[k]];
    ++group_size[sc.group[k]];
  }
  EXPECT_EQ(uses.size(), 4u);
  for (const auto& [pilot, n] : uses) EXPECT_EQ(n, 4);
  EXPECT_EQ(group_size.size(), 4u);
  for (const auto& [g, n] : group_size) EXPECT_EQ(n, 4);
}

TEST(PilotReuseTest, PilotCountsForOtherShapes) {
  for (int R : {0, 1, 2, 5}) {
    for (int tau : {1, 3, 4}) {
      PilotConfig cfg;
      cfg.R = R;
      cfg.tau_p = tau;
      const PilotScenario sc = build_pilot_scenario(cfg, 3);
      ASSERT_EQ(static_cast<int>(sc.pilot.size()), (R + 1) * tau);
      for (int i = 0; i < tau; ++i) EXPECT_EQ(std::count(sc.pilot.begin(), sc.pilot.end(), i), R + 1);
    }
  }
}

TEST(PilotReuseTest, StatisticalGainValueMatchesDirectEvaluation) {
  std::mt19937_64 rng(4);
  const StatisticalCsi s = random_stat(4, 6, 2, true, rng);
  const StatisticalGainModel model(s, 0, {0, 1});
  const CVector th = unit_phases(6, rng);
  double oracle = 0.0;
  for (int k = 0; k < 2; ++k) {
    oracle += (s.h_d_mean[k] + s.G_mean[0] * th.asDiagonal() * s.h_r_mean[0][k]).squaredNorm();
  }
  EXPECT_NEAR(model.value(th), oracle, 1e-12 * oracle);
}

TEST(PilotReuseTest, StatisticalGainGlobalPhaseInvariance) {
  std::mt19937_64 rng(5);
  const StatisticalCsi s = random_stat(4, 6, 2, false, rng);
  const StatisticalGainModel model(s, 0, {0, 1});
  const CVector th = unit_phases(6, rng);
  EXPECT_NEAR(model.value(std::polar(1.0, 1.3) * th), model.value(th), 1e-12 * model.value(th));
}

TEST(PilotReuseTest, StatisticalGainGradientCheck) {
  std::mt19937_64 rng(6);
  const StatisticalCsi s = random_stat(5, 8, 3, true, rng);
  const StatisticalGainModel model(s, 0, {0, 1, 2});
  const ManifoldPoint x = random_point(Manifold::complex_circle(8), 7);
  EXPECT_LE(gradient_check(statistical_gain_problem(model, model.value(x.ambient())), x, 10, 1e-5, 8), 1e-5);
}

TEST(PilotReuseTest, SingleUserPhaseAlignment) {
  std::mt19937_64 rng(9);
  StatisticalCsi s = random_stat(4, 6, 1, false, rng);
  const CVector g = gaussian(4, rng);
  const CVector a = unit_phases(6, rng);
  s.G_mean[0] = g * a.transpose();
  const StatisticalGainModel model(s, 0, {0});
  const ManifoldPoint x0 = random_point(Manifold::complex_circle(6), 10);
  SolverOptions opts;
  opts.grad_tol = 1e-10;
  opts.max_iters = 2000;
  const SolverResult r = solve_rcg(statistical_gain_problem(model, model.value(x0.ambient())), x0, opts);
  const CVector coeff = a.cwiseProduct(s.h_r_mean[0][0]).cwiseProduct(r.point.ambient());
  for (Index n = 1; n < 6; ++n) EXPECT_LE(std::abs(std::arg(coeff[n] / coeff[0])), 1e-3);
}

TEST(PilotReuseTest, DftPilotsOrthonormal) {
  for (int tau : {1, 2, 4, 7}) {
    const CMatrix F = dft_pilots(tau);
    EXPECT_LE((F.adjoint() * F - CMatrix::Identity(tau, tau)).norm(), 1e-12);
  }
}

TEST(PilotReuseTest, LsNoiseFree) {
  std::mt19937_64 rng(11);
  const int tau = 4;
  const double p = 2.0;
  const CMatrix pilots = dft_pilots(tau);
  const CVector h1 = gaussian(6, rng), h2 = gaussian(6, rng);
  const double amp = std::sqrt(tau * p);
  // single user on pilot 1
  CMatrix Y = amp * h1 * pilots.col(1).adjoint();
  EXPECT_LE((estimate_channels_ls(Y, pilots, p).col(1) - h1).norm(), 1e-12);
  // two users sharing pilot 2 receive the same superposed estimate
  Y = amp * (h1 * pilots.col(2).adjoint() + h2 * pilots.col(2).adjoint());
  const CMatrix est = estimate_channels_ls(Y, pilots, p);
  EXPECT_LE((est.col(2) - (h1 + h2)).norm(), 1e-12);
  EXPECT_LE(est.col(0).norm(), 1e-12);
}

TEST(PilotReuseTest, LsNoiseVariance) {
  std::mt19937_64 rng(12);
  const int tau = 4;
  const Index m = 8;
  const double p = 0.5, noise = 0.3;
  const CMatrix pilots = dft_pilots(tau);
  const CVector h = gaussian(m, rng);
  std::normal_distribution<double> g(0.0, std::sqrt(noise / 2.0));
  double acc = 0.0;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    CMatrix Y = std::sqrt(tau * p) * h * pilots.col(0).adjoint();
    for (Index j = 0; j < tau; ++j) {
      for (Index i = 0; i < m; ++i) Y(i, j) += Complex(g(rng), g(rng));
    }
    acc += (estimate_channels_ls(Y, pilots, p).col(0) - h).squaredNorm();
  }
  const double oracle = m * noise / (tau * p);
  EXPECT_NEAR(acc / draws, oracle, 0.05 * oracle);
}

TEST(PilotReuseTest, OrthogonalPilotsNoRis) {
  PilotConfig cfg;
  cfg.R = 0;
  cfg.tau_p = 4;
  const PilotTrial t = run_pilot_trial(cfg, 0, 13);
  for (const auto& r : t.rows) EXPECT_NE(r.user_class, "far");
  ASSERT_FALSE(t.rows.empty());
}

TEST(PilotReuseTest, PrelogBound) {
  PilotConfig cfg;
  const PilotTrial t = run_pilot_trial(cfg, 0, 14);
  const double cap = pilot_prelog(cfg.tau_p, cfg.tau_c);
  ASSERT_EQ(t.user_se.size(), 3u);
  for (const auto& se : t.user_se) {
    // SE = prelog log2(1 + SINR): converting back gives a non-negative SINR
    for (Index k = 0; k < se.size(); ++k) EXPECT_GE(std::exp2(se[k] / cap) - 1.0, 0.0);
  }
}

TEST(PilotReuseTest, FarUsersOrderingOverFewTrials) {
  PilotConfig cfg;
  std::map<std::string, double> far;
  for (int t = 0; t < 10; ++t) {
    for (const auto& r : run_pilot_trial(cfg, t, 100 + t).rows) {
      if (r.user_class == "far") far[r.scheme] += r.se_bps_hz;
    }
  }
  EXPECT_GT(far.at("mo"), far.at("rps"));
  EXPECT_GT(far.at("mo"), far.at("nr"));
}

TEST(PilotReuseTest, LsEstimatorRuns) {
  PilotConfig cfg;
  cfg.estimator = ChannelEstimator::LeastSquares;
  const PilotTrial t = run_pilot_trial(cfg, 0, 15);
  for (const auto& r : t.rows) EXPECT_TRUE(std::isfinite(r.se_bps_hz));
}

TEST(PilotReuseTest, Names) {
  for (auto s : {PilotScheme::NoRis, PilotScheme::RandomPhase, PilotScheme::Optimized}) {
    EXPECT_EQ(parse_pilot_scheme(to_string(s)), s);
  }
  EXPECT_EQ(parse_channel_estimator("ls"), ChannelEstimator::LeastSquares);
  EXPECT_EQ(parse_channel_estimator("statistical"), ChannelEstimator::Statistical);
  EXPECT_THROW(parse_pilot_scheme("x"), ConfigError);
}
