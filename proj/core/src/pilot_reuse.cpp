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

#include "mris/pilot_reuse.hpp"

#include <random>

#include "mris/beamforming.hpp"

namespace mris {
namespace {

double deg(double d) { return d * kPi / 180.0; }

Vec2 polar_point(double radius, double angle) {
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

std::string to_string(PilotScheme s) {
  switch (s) {
    case PilotScheme::NoRis:
      return "nr";
    case PilotScheme::RandomPhase:
      return "rps";
    case PilotScheme::Optimized:
      return "mo";
  }
  return "unknown";
}

PilotScheme parse_pilot_scheme(const std::string& name) {
  if (name == "nr") return PilotScheme::NoRis;
  if (name == "rps") return PilotScheme::RandomPhase;
  if (name == "mo") return PilotScheme::Optimized;
  throw ConfigError("unknown scheme '" + name + "' (expected nr, rps or mo)");
}

std::string to_string(ChannelEstimator e) {
  return e == ChannelEstimator::LeastSquares ? "ls" : "statistical";
}

ChannelEstimator parse_channel_estimator(const std::string& name) {
  if (name == "ls") return ChannelEstimator::LeastSquares;
  if (name == "statistical") return ChannelEstimator::Statistical;
  throw ConfigError("unknown estimator '" + name + "' (expected ls or statistical)");
}

void PilotConfig::validate() const {
  if (R < 0) throw ConfigError("R must be non-negative");
  if (tau_p < 1) throw ConfigError("tau_p must be positive");
  if (tau_c <= tau_p) throw ConfigError("tau_c must exceed tau_p");
  if (M < 1 || N < 1) throw ConfigError("M and N must be positive");
  if (!(sector_max_deg > sector_min_deg)) throw ConfigError("empty sector");
  if (!(ris_distance_m > 0.0 && far_radius_m >= 0.0 && far_offset_m >= 0.0)) {
    throw ConfigError("RIS/far-user distances must be non-negative (RIS distance positive)");
  }
  if (!(near_radius_m > near_min_m && near_min_m > 0.0)) {
    throw ConfigError("need 0 < near_min_m < near_radius_m");
  }
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be non-negative");
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  if (sweep_axis != "M" && sweep_axis != "K") throw ConfigError("sweep_axis must be M or K");
}

double PilotConfig::sweep_value() const {
  return sweep_axis == "K" ? static_cast<double>(num_users()) : static_cast<double>(M);
}

PilotScenario build_pilot_scenario(const PilotConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = deg(cfg.sector_min_deg);
  const double hi = deg(cfg.sector_max_deg);

  PilotScenario sc;
  sc.geometry.bs = Vec2(0.0, 0.0);
  sc.geometry.reference_gain_db = cfg.reference_gain_db;
  for (int r = 0; r < cfg.R; ++r) {
    const double ang = lo + (r + 0.5) * (hi - lo) / cfg.R;
    sc.geometry.ris.push_back(polar_point(cfg.ris_distance_m, ang));
  }
  for (int r = 0; r < cfg.R; ++r) {
    const double ang = lo + (r + 0.5) * (hi - lo) / cfg.R;
    const Vec2 center = polar_point(cfg.ris_distance_m + cfg.far_offset_m, ang);
    for (int i = 0; i < cfg.tau_p; ++i) {
      const double rad = cfg.far_radius_m * std::sqrt(unit(rng));
      sc.geometry.ues.push_back(center + polar_point(rad, 2.0 * kPi * unit(rng)));
      sc.pilot.push_back(i);
      sc.group.push_back(r);
    }
  }
  const double a2 = cfg.near_min_m * cfg.near_min_m;
  const double b2 = cfg.near_radius_m * cfg.near_radius_m;
  for (int i = 0; i < cfg.tau_p; ++i) {
    const double rad = std::sqrt(a2 + (b2 - a2) * unit(rng));
    sc.geometry.ues.push_back(polar_point(rad, lo + (hi - lo) * unit(rng)));
    sc.pilot.push_back(i);
    sc.group.push_back(cfg.R);
  }
  return sc;
}

CMatrix StatisticalCsi::covariance(Index k, bool with_ris) const {
  const Index m = h_d_mean[k].size();
  CMatrix C = var_d[k] * CMatrix::Identity(m, m);
  if (!with_ris) return C;
  for (std::size_t r = 0; r < G_mean.size(); ++r) {
    const double n = static_cast<double>(G_mean[r].cols());
    const double vr = var_r[r][k];
    C.diagonal().array() += var_G[r] * h_r_mean[r][k].squaredNorm() + var_G[r] * vr * n;
    C.noalias() += vr * G_mean[r] * G_mean[r].adjoint();
  }
  return C;
}

CVector StatisticalCsi::mean(Index k, const CVector& theta, bool with_ris) const {
  CVector h = h_d_mean[k];
  if (!with_ris) return h;
  Index off = 0;
  for (std::size_t r = 0; r < G_mean.size(); ++r) {
    const Index n = G_mean[r].cols();
    h += G_mean[r] * theta.segment(off, n).cwiseProduct(h_r_mean[r][k]);
    off += n;
  }
  return h;
}

StatisticalCsi statistical_csi(const SystemGeometry& geom, const ChannelSet& ch, double kappa) {
  StatisticalCsi s;
  s.h_d_mean = ch.h_d_mean;
  s.G_mean = ch.G_mean;
  s.h_r_mean = ch.h_r_mean;
  const double scatter = 1.0 / (kappa + 1.0);
  const auto& ex = geom.exponents;
  const double g0 = geom.reference_gain_db;
  for (const auto& u : geom.ues) {
    s.var_d.push_back(scatter * std::pow(link_amplitude(g0, (u - geom.bs).norm(), ex.bs_ue), 2));
  }
  for (const auto& p : geom.ris) {
    s.var_G.push_back(scatter * std::pow(link_amplitude(g0, (p - geom.bs).norm(), ex.bs_ris), 2));
    std::vector<double> v;
    for (const auto& u : geom.ues) {
      v.push_back(scatter * std::pow(link_amplitude(g0, (u - p).norm(), ex.ue_ris), 2));
    }
    s.var_r.push_back(std::move(v));
  }
  return s;
}

StatisticalGainModel::StatisticalGainModel(const StatisticalCsi& stat, Index ris,
                                           const std::vector<Index>& users) {
  if (ris < 0 || ris >= static_cast<Index>(stat.G_mean.size())) {
    throw DimensionError("RIS index out of range");
  }
  if (users.empty()) throw Error("statistical gain needs at least one user");
  const CMatrix& G = stat.G_mean[ris];
  N_ = G.cols();
  for (Index k : users) {
    c_.push_back(stat.h_d_mean[k]);
    A_.push_back(G * stat.h_r_mean[ris][k].asDiagonal());
  }
}

double StatisticalGainModel::value(const CVector& theta) const {
  if (theta.size() != N_) throw DimensionError("theta length differs from RIS size");
  double v = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) v += (c_[i] + A_[i] * theta).squaredNorm();
  return v;
}

CVector StatisticalGainModel::egrad(const CVector& theta) const {
  if (theta.size() != N_) throw DimensionError("theta length differs from RIS size");
  CVector g = CVector::Zero(N_);
  for (std::size_t i = 0; i < c_.size(); ++i) {
    g.noalias() += 2.0 * A_[i].adjoint() * (c_[i] + A_[i] * theta);
  }
  return g;
}

Problem statistical_gain_problem(const StatisticalGainModel& model, double scale) {
  Problem prob{Manifold::complex_circle(model.num_elements()), {}, {}, Sense::Maximize};
  const double inv = 1.0 / scale;
  prob.cost = [&model, inv](const ManifoldPoint& x) { return inv * model.value(x.ambient()); };
  prob.egrad = [&model, inv](const ManifoldPoint& x) {
    return CVector(inv * model.egrad(x.ambient()));
  };
  return prob;
}

CMatrix dft_pilots(int tau_p) {
  CMatrix F(tau_p, tau_p);
  const double s = 1.0 / std::sqrt(static_cast<double>(tau_p));
  for (int i = 0; i < tau_p; ++i) {
    for (int j = 0; j < tau_p; ++j) F(i, j) = s * std::polar(1.0, -2.0 * kPi * i * j / tau_p);
  }
  return F;
}

CMatrix estimate_channels_ls(const CMatrix& Y, const CMatrix& pilots, double pilot_power_mw) {
  if (Y.cols() != pilots.rows()) throw DimensionError("pilot block length mismatch");
  const double tau_p = static_cast<double>(pilots.rows());
  return Y * pilots / std::sqrt(tau_p * pilot_power_mw);
}

PilotTrial run_pilot_trial(const PilotConfig& cfg, int trial, std::uint64_t seed) {
  cfg.validate();
  const PilotScenario sc = build_pilot_scenario(cfg, derive_seed(seed, 1));
  const Index K = cfg.num_users();
  const Index M = cfg.M;
  const Index N = cfg.N;
  const Index RN = cfg.R * N;
  const double p = dbm_to_mw(cfg.pilot_power_dbm);
  const double noise = dbm_to_mw(cfg.noise_dbm);
  const double prelog = pilot_prelog(cfg.tau_p, cfg.tau_c);

  const FadingConfig fading{FadingModel::Rician, cfg.kappa, AngleModel::Geometric,
                            BsRisStructure::RankOne, true};
  ChannelSet ch = sample_channels(sc.geometry, fading, M, N, derive_seed(seed, 2));
  ch.noise_power_mw = noise;
  const StatisticalCsi stat = statistical_csi(sc.geometry, ch, cfg.kappa);

  const CMatrix pilots = dft_pilots(cfg.tau_p);
  std::mt19937_64 rng(derive_seed(seed, 3));
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise / 2.0));
  CMatrix pilot_noise(M, cfg.tau_p);
  for (Index j = 0; j < pilot_noise.cols(); ++j) {
    for (Index i = 0; i < M; ++i) pilot_noise(i, j) = Complex(gauss(rng), gauss(rng));
  }

  CVector theta_rand(RN);
  for (int r = 0; r < cfg.R; ++r) {
    theta_rand.segment(r * N, N) =
        random_point(Manifold::complex_circle(N), derive_seed(seed, 4, r)).ambient();
  }

  CMatrix Hd(M, K);
  for (Index k = 0; k < K; ++k) Hd.col(k) = ch.h_d[k];

  PilotTrial out;
  out.trial = trial;
  for (PilotScheme scheme : cfg.schemes) {
    const bool with_ris = scheme != PilotScheme::NoRis && cfg.R > 0;
    CVector theta = theta_rand;
    if (scheme == PilotScheme::Optimized) {
      for (int r = 0; r < cfg.R; ++r) {
        std::vector<Index> users;
        for (Index k = 0; k < K; ++k) {
          if (sc.group[k] == r) users.push_back(k);
        }
        const StatisticalGainModel model(stat, r, users);
        const CVector start = theta_rand.segment(r * N, N);
        const double v0 = model.value(start);
        const Problem prob = statistical_gain_problem(model, v0 > 0.0 ? v0 : 1.0);
        SolverOptions opts = cfg.solver_opts;
        opts.record_time = false;
        const SolverResult res = solve_rcg(prob, ManifoldPoint(prob.manifold, start), opts);
        theta.segment(r * N, N) = res.point.ambient();
      }
    }
    const CMatrix H = with_ris ? ch.composite_matrix(theta) : Hd;

    // Uplink training with full pilot reuse.
    CMatrix Y = pilot_noise;
    const double amp = std::sqrt(cfg.tau_p * p);
    for (Index k = 0; k < K; ++k) Y.noalias() += amp * H.col(k) * pilots.col(sc.pilot[k]).adjoint();
    const CMatrix per_pilot = estimate_channels_ls(Y, pilots, p);

    CMatrix Hhat(M, K);
    if (cfg.estimator == ChannelEstimator::LeastSquares) {
      for (Index k = 0; k < K; ++k) Hhat.col(k) = per_pilot.col(sc.pilot[k]);
    } else {
      const double est_noise = noise / (cfg.tau_p * p);
      for (int i = 0; i < cfg.tau_p; ++i) {
        CMatrix psi = est_noise * CMatrix::Identity(M, M);
        CVector mean_sum = CVector::Zero(M);
        for (Index k = 0; k < K; ++k) {
          if (sc.pilot[k] != i) continue;
          psi += stat.covariance(k, with_ris);
          mean_sum += stat.mean(k, theta, with_ris);
        }
        const CVector innovation = psi.llt().solve(per_pilot.col(i) - mean_sum);
        for (Index k = 0; k < K; ++k) {
          if (sc.pilot[k] != i) continue;
          Hhat.col(k) = stat.mean(k, theta, with_ris) + stat.covariance(k, with_ris) * innovation;
        }
      }
    }

    const CMatrix V = mmse_combiner(Hhat, RVector::Constant(K, p), noise);
    const RVector sinr = compute_sinr(H, {V, RVector::Constant(K, p), LinkDirection::Uplink}, noise);
    const RVector se = spectral_efficiency(sinr, prelog);
    out.user_se.push_back(se);

    double near = 0.0, far = 0.0;
    int n_near = 0, n_far = 0;
    for (Index k = 0; k < K; ++k) {
      if (sc.group[k] == cfg.R) {
        near += se[k];
        ++n_near;
      } else {
        far += se[k];
        ++n_far;
      }
    }
    auto add = [&](const std::string& cls, double v) {
      out.rows.push_back({to_string(scheme), cfg.sweep_axis, cfg.sweep_value(), cls, trial, v});
    };
    add("near", near / n_near);
    if (n_far > 0) add("far", far / n_far);
    add("all", se.mean());
  }
  return out;
}

}  // namespace mris
