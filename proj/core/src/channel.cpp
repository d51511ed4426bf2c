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

#include "mris/channel.hpp"

#include <random>
#include <sstream>

namespace mris {
namespace {

double direction(const Vec2& from, const Vec2& to) {
  const Vec2 d = to - from;
  return std::atan2(d.y(), d.x());
}

class Sampler {
 public:
  Sampler(const FadingConfig& f, std::uint64_t seed)
      : fading_(f), rng_(seed), phase_(0.0, 2.0 * kPi), gauss_(0.0, std::sqrt(0.5)) {}

  double angle(double geometric) {
    return fading_.angles == AngleModel::Geometric ? geometric : phase_(rng_);
  }
  double random_angle() { return phase_(rng_); }

  /// Returns the realization and writes the scaled LoS part into mean.
  CMatrix fade(const CMatrix& los, double amplitude, CMatrix& mean) {
    if (fading_.model == FadingModel::PureLos) {
      mean = amplitude * los;
      return mean;
    }
    const double kappa = fading_.kappa;
    const double a = std::sqrt(kappa / (kappa + 1.0));
    const double b = std::sqrt(1.0 / (kappa + 1.0));
    CMatrix nlos(los.rows(), los.cols());
    for (Index j = 0; j < los.cols(); ++j) {
      for (Index i = 0; i < los.rows(); ++i) nlos(i, j) = Complex(gauss_(rng_), gauss_(rng_));
    }
    mean = amplitude * a * los;
    return mean + amplitude * b * nlos;
  }

 private:
  FadingConfig fading_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> phase_;
  std::normal_distribution<double> gauss_;
};

}  // namespace

void SystemGeometry::validate() const {
  if (!(exponents.ue_ris > 0 && exponents.bs_ris > 0 && exponents.bs_ue > 0)) {
    throw ConfigError("path-loss exponents must be positive");
  }
  if (ues.empty()) throw ConfigError("geometry needs at least one user");
  for (std::size_t k = 0; k < ues.size(); ++k) {
    if ((ues[k] - bs).norm() <= 0.0) {
      throw ConfigError("user " + std::to_string(k) + " coincides with the BS");
    }
    for (std::size_t r = 0; r < ris.size(); ++r) {
      if ((ues[k] - ris[r]).norm() <= 0.0) {
        throw ConfigError("user " + std::to_string(k) + " coincides with RIS " +
                          std::to_string(r));
      }
    }
  }
  for (std::size_t r = 0; r < ris.size(); ++r) {
    if ((ris[r] - bs).norm() <= 0.0) {
      throw ConfigError("RIS " + std::to_string(r) + " coincides with the BS");
    }
  }
}

CMatrix ChannelSet::cascade(Index k) const {
  const Index m = num_antennas();
  const Index n = num_elements();
  CMatrix a(m, num_ris() * n);
  for (Index r = 0; r < num_ris(); ++r) {
    a.middleCols(r * n, n) = G[r] * h_r[r][k].asDiagonal();
  }
  return a;
}

CMatrix ChannelSet::mean_cascade(Index k) const {
  const Index m = num_antennas();
  const Index n = num_elements();
  CMatrix a(m, num_ris() * n);
  for (Index r = 0; r < num_ris(); ++r) {
    a.middleCols(r * n, n) = G_mean[r] * h_r_mean[r][k].asDiagonal();
  }
  return a;
}

CVector ChannelSet::composite(Index k, const CVector& theta) const {
  if (k < 0 || k >= num_users()) throw DimensionError("user index out of range");
  const Index n = num_elements();
  if (theta.size() != num_ris() * n) {
    std::ostringstream os;
    os << "composite: theta has " << theta.size() << " entries, expected " << num_ris() * n;
    throw DimensionError(os.str());
  }
  CVector h = h_d[k];
  for (Index r = 0; r < num_ris(); ++r) {
    h += G[r] * theta.segment(r * n, n).cwiseProduct(h_r[r][k]);
  }
  return h;
}

CMatrix ChannelSet::composite_matrix(const CVector& theta) const {
  CMatrix h(num_antennas(), num_users());
  for (Index k = 0; k < num_users(); ++k) h.col(k) = composite(k, theta);
  return h;
}

void ChannelSet::validate() const {
  const Index m = num_antennas();
  const Index n = num_elements();
  for (const auto& h : h_d) {
    if (h.size() != m) throw DimensionError("direct channels differ in length");
    if (!h.allFinite()) throw Error("non-finite direct channel");
  }
  if (h_r.size() != G.size()) throw DimensionError("one RIS-UE channel set per RIS expected");
  for (std::size_t r = 0; r < G.size(); ++r) {
    if (G[r].rows() != m || G[r].cols() != n) throw DimensionError("BS-RIS channel shape");
    if (!G[r].allFinite()) throw Error("non-finite BS-RIS channel");
    if (static_cast<Index>(h_r[r].size()) != num_users()) {
      throw DimensionError("RIS-UE channel count differs from the user count");
    }
    for (const auto& h : h_r[r]) {
      if (h.size() != n) throw DimensionError("RIS-UE channel length");
      if (!h.allFinite()) throw Error("non-finite RIS-UE channel");
    }
  }
}

CVector ula_steering(Index n, double angle) {
  CVector a(n);
  const double c = std::cos(angle);
  for (Index i = 0; i < n; ++i) a[i] = std::polar(1.0, kPi * static_cast<double>(i) * c);
  return a;
}

std::vector<Vec2> place_users_semicircle(int k, double radius, const Vec2& center,
                                         std::uint64_t /*seed*/) {
  if (k < 1) throw ConfigError("need at least one user");
  if (!(radius > 0.0)) throw ConfigError("radius must be positive");
  std::vector<Vec2> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    const double ang = k == 1 ? kPi / 2.0 : kPi * i / (k - 1);
    out.push_back(center + radius * Vec2(std::cos(ang), std::sin(ang)));
  }
  return out;
}

SystemGeometry ris_semicircle_geometry(int k, double radius, double ris_distance) {
  SystemGeometry g;
  g.bs = Vec2(0.0, 0.0);
  g.ris = {Vec2(ris_distance, 0.0)};
  g.ues = place_users_semicircle(k, radius, g.ris.front());
  return g;
}

double link_amplitude(double reference_gain_db, double distance, double exponent) {
  return std::sqrt(db_to_linear(reference_gain_db) * std::pow(distance, -exponent));
}

ChannelSet sample_channels(const SystemGeometry& geom, const FadingConfig& fading, Index m,
                           Index n, std::uint64_t seed) {
  if (m < 1 || n < 0) throw DimensionError("need m >= 1 and n >= 0");
  geom.validate();
  if (fading.model == FadingModel::Rician && !(fading.kappa >= 0.0 && std::isfinite(fading.kappa))) {
    throw ConfigError("Rician kappa must be finite and non-negative");
  }
  Sampler s(fading, seed);
  const auto& ex = geom.exponents;
  const double g0 = geom.reference_gain_db;
  const std::size_t K = geom.ues.size();
  const std::size_t R = geom.ris.size();

  ChannelSet ch;
  ch.G.resize(R);
  ch.G_mean.resize(R);
  ch.h_r.assign(R, std::vector<CVector>(K));
  ch.h_r_mean.assign(R, std::vector<CVector>(K));
  ch.h_d.resize(K);
  ch.h_d_mean.resize(K);

  for (std::size_t r = 0; r < R; ++r) {
    const Vec2& p = geom.ris[r];
    CMatrix los;
    if (fading.bs_ris == BsRisStructure::RankOne) {
      const double dep = s.angle(direction(geom.bs, p));
      const double arr = s.angle(direction(p, geom.bs));
      los = ula_steering(m, dep) * ula_steering(n, arr).adjoint();
    } else {
      los.resize(m, n);
      for (Index e = 0; e < n; ++e) los.col(e) = ula_steering(m, s.random_angle());
    }
    const double amp = link_amplitude(g0, (p - geom.bs).norm(), ex.bs_ris);
    CMatrix mean;
    ch.G[r] = s.fade(los, amp, mean);
    ch.G_mean[r] = std::move(mean);

    for (std::size_t k = 0; k < K; ++k) {
      const Vec2& u = geom.ues[k];
      const CMatrix a = ula_steering(n, s.angle(direction(p, u)));
      const double amp_k = link_amplitude(g0, (u - p).norm(), ex.ue_ris);
      CMatrix mean_k;
      ch.h_r[r][k] = s.fade(a, amp_k, mean_k).col(0);
      ch.h_r_mean[r][k] = mean_k.col(0);
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    const Vec2& u = geom.ues[k];
    if (!fading.direct_link) {
      ch.h_d[k] = CVector::Zero(m);
      ch.h_d_mean[k] = CVector::Zero(m);
      continue;
    }
    const CMatrix a = ula_steering(m, s.angle(direction(geom.bs, u)));
    const double amp = link_amplitude(g0, (u - geom.bs).norm(), ex.bs_ue);
    CMatrix mean;
    ch.h_d[k] = s.fade(a, amp, mean).col(0);
    ch.h_d_mean[k] = mean.col(0);
  }
  return ch;
}

}  // namespace mris
