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

#include "mris/beamforming.hpp"
#include "test_util.hpp"

using namespace mris;
using mris::test::gaussian;

namespace {

CMatrix orthonormal_columns(Index m, Index k, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian(m, k, rng));
  return qr.householderQ() * CMatrix::Identity(m, k);
}

// Literal term-by-term SINR sums.
RVector sinr_oracle(const CMatrix& H, const CMatrix& W, const RVector& p, double noise, LinkDirection dir) {
  const Index K = H.cols();
  RVector out(K);
  for (Index k = 0; k < K; ++k) {
    double sig = 0.0, intf = 0.0;
    for (Index j = 0; j < K; ++j) {
      Complex c(0.0, 0.0);
      for (Index i = 0; i < H.rows(); ++i) {
        c += dir == LinkDirection::Downlink ? std::conj(W(i, j)) * H(i, k) : std::conj(W(i, k)) * H(i, j);
      }
      if (j == k) {
        sig = p[k] * std::norm(c);
      } else {
        intf += p[j] * std::norm(c);
      }
    }
    const double n = dir == LinkDirection::Downlink ? noise : noise * W.col(k).squaredNorm();
    out[k] = sig / (intf + n);
  }
  return out;
}

}  // namespace

TEST(BeamformingTest, ZfOrthonormalColumns) {
  std::mt19937_64 rng(1);
  const CMatrix H = orthonormal_columns(6, 3, rng);
  EXPECT_LE((zf_precoder(H) - H).norm(), 1e-12);
}

TEST(BeamformingTest, ZfSingleUserIsMatchedFilter) {
  std::mt19937_64 rng(2);
  const CMatrix h = gaussian(5, 1, rng);
  EXPECT_LE((zf_precoder(h) - h / h.norm()).norm(), 1e-14);
}

TEST(BeamformingTest, ZfNullsInterference) {
  std::mt19937_64 rng(3);
  const CMatrix H = gaussian(8, 4, rng);
  const CMatrix W = zf_precoder(H);
  for (Index j = 0; j < 4; ++j) {
    EXPECT_NEAR(W.col(j).norm(), 1.0, 1e-12);
    for (Index k = 0; k < 4; ++k) {
      if (j != k) EXPECT_LE(std::abs(W.col(j).dot(H.col(k))), 1e-9 * H.col(k).norm());
    }
  }
}

TEST(BeamformingTest, ZfRankDeficientThrows) {
  std::mt19937_64 rng(4);
  CMatrix H = gaussian(4, 2, rng);
  H.col(1) = 2.0 * H.col(0);
  EXPECT_THROW(zf_precoder(H), SingularChannelError);
  EXPECT_THROW(zf_precoder(gaussian(2, 3, rng)), Error);
}

TEST(BeamformingTest, EqualSinrOrthonormal) {
  std::mt19937_64 rng(5);
  const CMatrix H = orthonormal_columns(6, 3, rng);
  const auto a = equal_sinr_power_allocation(H, 3.0, 0.5);
  for (Index k = 0; k < 3; ++k) EXPECT_NEAR(a.p[k], 1.0, 1e-12);
  EXPECT_NEAR(a.gamma, 3.0 / (3 * 0.5), 1e-12);
}

TEST(BeamformingTest, EqualSinrSingleUser) {
  std::mt19937_64 rng(6);
  const CMatrix h = gaussian(4, 1, rng);
  EXPECT_NEAR(equal_sinr_power_allocation(h, 2.0, 0.1).gamma, 2.0 * h.squaredNorm() / 0.1, 1e-10);
}

TEST(BeamformingTest, EqualSinrRealizedByOracle) {
  std::mt19937_64 rng(7);
  const CMatrix H = gaussian(8, 3, rng);
  const auto a = equal_sinr_power_allocation(H, 5.0, 0.01);
  EXPECT_NEAR(a.p.sum(), 5.0, 1e-12 * 5.0);
  const RVector s = sinr_oracle(H, zf_precoder(H), a.p, 0.01, LinkDirection::Downlink);
  for (Index k = 0; k < 3; ++k) EXPECT_NEAR(s[k] / a.gamma, 1.0, 1e-9);
}

TEST(BeamformingTest, MmseSingleUserCollinear) {
  std::mt19937_64 rng(8);
  const CMatrix h = gaussian(5, 1, rng);
  const CVector w = mmse_combiner(h, RVector::Ones(1), 0.3).col(0);
  const Complex c = w.dot(h.col(0)) / (w.norm() * h.norm());
  EXPECT_NEAR(std::abs(c), 1.0, 1e-10);
}

TEST(BeamformingTest, MmseNoiseLimitIsMatchedFilter) {
  std::mt19937_64 rng(9);
  const CMatrix H = gaussian(6, 3, rng);
  const CMatrix W = mmse_combiner(H, RVector::Ones(3), 1e9);
  for (Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(std::abs(W.col(k).dot(H.col(k))) / (W.col(k).norm() * H.col(k).norm()), 1.0, 1e-8);
  }
}

TEST(BeamformingTest, MmseBeatsZfAndRandomCombiners) {
  std::mt19937_64 rng(10);
  const CMatrix H = gaussian(6, 3, rng);
  const RVector p = RVector::LinSpaced(3, 0.5, 2.0);
  const double noise = 0.2;
  const BeamformerState mmse{mmse_combiner(H, p, noise), p, LinkDirection::Uplink};
  const RVector s_mmse = compute_sinr(H, mmse, noise);
  const BeamformerState zf{zf_precoder(H), p, LinkDirection::Uplink};
  const RVector s_zf = compute_sinr(H, zf, noise);
  for (Index k = 0; k < 3; ++k) EXPECT_GE(s_mmse[k], s_zf[k] * (1 - 1e-12));
  for (int t = 0; t < 100; ++t) {
    CMatrix W = gaussian(6, 3, rng);
    W.colwise().normalize();
    const RVector s = compute_sinr(H, {W, p, LinkDirection::Uplink}, noise);
    for (Index k = 0; k < 3; ++k) EXPECT_GE(s_mmse[k], s[k]);
  }
  // small perturbations never help
  for (int t = 0; t < 20; ++t) {
    const CMatrix W = mmse.W + 1e-4 * gaussian(6, 3, rng);
    const RVector s = compute_sinr(H, {W, p, LinkDirection::Uplink}, noise);
    for (Index k = 0; k < 3; ++k) EXPECT_GE(s_mmse[k], s[k] * (1 - 1e-9));
  }
}

TEST(BeamformingTest, SinrSingleUserBothDirections) {
  std::mt19937_64 rng(11);
  const CMatrix h = gaussian(4, 1, rng);
  const RVector p = RVector::Constant(1, 2.0);
  const CMatrix w = h / h.norm();
  const double expect = 2.0 * h.squaredNorm() / 0.5;
  EXPECT_NEAR(compute_sinr(h, {w, p, LinkDirection::Downlink}, 0.5)[0], expect, 1e-12 * expect);
  EXPECT_NEAR(compute_sinr(h, {w, p, LinkDirection::Uplink}, 0.5)[0], expect, 1e-12 * expect);
}

TEST(BeamformingTest, SinrMatchesOracle) {
  std::mt19937_64 rng(12);
  const CMatrix H = gaussian(5, 4, rng);
  const CMatrix W = gaussian(5, 4, rng);
  const RVector p = RVector::LinSpaced(4, 0.1, 1.0);
  for (auto dir : {LinkDirection::Downlink, LinkDirection::Uplink}) {
    const RVector a = compute_sinr(H, {W, p, dir}, 0.3);
    const RVector b = sinr_oracle(H, W, p, 0.3, dir);
    for (Index k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], 1e-12 * std::max(1.0, b[k]));
  }
}

TEST(BeamformingTest, ZfDownlinkScaleCovariance) {
  std::mt19937_64 rng(13);
  const CMatrix H = gaussian(6, 3, rng);
  const CMatrix W = zf_precoder(H);
  const RVector p = RVector::LinSpaced(3, 1.0, 3.0);
  const RVector a = compute_sinr(H, {W, p, LinkDirection::Downlink}, 0.1);
  const RVector b = compute_sinr(H, {W, 2.5 * p, LinkDirection::Downlink}, 0.1);
  for (Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(b[k] / a[k], 2.5, 1e-9);
    EXPECT_NEAR(a[k], p[k] * std::norm(W.col(k).dot(H.col(k))) / 0.1, 1e-9 * a[k]);
  }
}

TEST(BeamformingTest, SpectralEfficiency) {
  RVector s(3);
  s << 0.0, 1.0, 3.0;
  const RVector se = spectral_efficiency(s, 1.0);
  EXPECT_EQ(se[0], 0.0);
  EXPECT_DOUBLE_EQ(se[1], 1.0);
  EXPECT_DOUBLE_EQ(spectral_efficiency(s, 0.9)[2], 1.8);
  EXPECT_DOUBLE_EQ(pilot_prelog(4), 1.0 - 4.0 / 200.0);
}
