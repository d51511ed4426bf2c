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

#include "mris/energy.hpp"

#include <algorithm>

#include "mris/beamforming.hpp"

namespace mris {
namespace {

// Users whose SINR is within this relative distance of the target stop the
// iteration early; the reported feasibility uses the caller's looser tol.
constexpr double kInnerTol = 1e-10;

CMatrix stack_direct(const ChannelSet& ch) {
  CMatrix Hd(ch.num_antennas(), ch.num_users());
  for (Index k = 0; k < ch.num_users(); ++k) Hd.col(k) = ch.h_d[k];
  return Hd;
}

double total_dbm(const RVector& p) { return mw_to_dbm(p.sum()); }

}  // namespace

PowerControlResult power_control_fixed_point(const CMatrix& H, const CMatrix& W,
                                             const RVector& gamma_targets, double noise_mw,
                                             const RVector& p_max, int max_iters, double tol) {
  const Index K = H.cols();
  if (W.rows() != H.rows() || W.cols() != K || gamma_targets.size() != K || p_max.size() != K) {
    throw DimensionError("power control: inconsistent dimensions");
  }
  if ((gamma_targets.array() <= 0.0).any()) throw Error("SINR targets must be positive");

  // F(k, j) = |w_k^H h_j|^2
  const Eigen::MatrixXd F = (W.adjoint() * H).cwiseAbs2();
  const RVector gain = F.diagonal();
  Eigen::MatrixXd off = F;
  off.diagonal().setZero();
  RVector noise(K);
  for (Index k = 0; k < K; ++k) noise[k] = noise_mw * W.col(k).squaredNorm();

  auto sinr_of = [&](const RVector& p) -> RVector {
    const RVector denom = off * p + noise;
    return (p.array() * gain.array() / denom.array()).matrix();
  };

  PowerControlResult out;
  RVector p = p_max;
  for (int it = 0; it < max_iters; ++it) {
    const RVector interference = off * p + noise;
    RVector next(K);
    for (Index k = 0; k < K; ++k) {
      next[k] = gain[k] > 0.0 ? std::min(p_max[k], gamma_targets[k] * interference[k] / gain[k])
                              : p_max[k];
    }
    const double change = ((next - p).array().abs() / p.array().max(1e-300)).maxCoeff();
    p = next;
    out.iters = it + 1;
    const RVector s = sinr_of(p);
    bool settled = true;
    for (Index k = 0; k < K; ++k) {
      const bool at_cap = p[k] >= p_max[k] && s[k] < gamma_targets[k];
      if (!at_cap && std::abs(s[k] / gamma_targets[k] - 1.0) > kInnerTol) settled = false;
    }
    if (settled || change < 1e-14) break;
  }

  out.p = p;
  const RVector s = sinr_of(p);
  out.feasible = true;
  for (Index k = 0; k < K; ++k) {
    if (std::abs(s[k] / gamma_targets[k] - 1.0) > tol) out.feasible = false;
  }
  return out;
}

EeThetaModel::EeThetaModel(const ChannelSet& ch, const CMatrix& W, const RVector& p,
                           const RVector& lambda, double noise_mw)
    : K_(ch.num_users()), N_(ch.num_ris() * ch.num_elements()), p_(p), lambda_(lambda) {
  if (W.cols() != K_ || W.rows() != ch.num_antennas() || p.size() != K_ ||
      lambda.size() != K_) {
    throw DimensionError("EE objective: inconsistent dimensions");
  }
  noise_.resize(K_);
  for (Index k = 0; k < K_; ++k) noise_[k] = noise_mw * W.col(k).squaredNorm();
  b_ = W.adjoint() * stack_direct(ch);

  const Index n = ch.num_elements();
  CMatrix V(N_, K_);  // G^H w_k, stacked over RIS
  CMatrix Hr(N_, K_);
  for (Index r = 0; r < ch.num_ris(); ++r) {
    V.middleRows(r * n, n) = ch.G[r].adjoint() * W;
    for (Index k = 0; k < K_; ++k) Hr.block(r * n, k, n, 1) = ch.h_r[r][k];
  }
  r_.resize(K_);
  for (Index k = 0; k < K_; ++k) {
    r_[k] = (Hr.array().colwise() * V.col(k).conjugate().array()).matrix().transpose();
  }
}

RVector EeThetaModel::sinr(const CVector& theta) const {
  if (theta.size() != N_) throw DimensionError("theta length differs from RIS size");
  RVector out(K_);
  for (Index k = 0; k < K_; ++k) {
    const CVector s = b_.row(k).transpose() + r_[k] * theta;
    const RVector a = s.cwiseAbs2();
    const double signal = p_[k] * a[k];
    const double interference = p_.dot(a) - signal + noise_[k];
    out[k] = signal / interference;
  }
  return out;
}

double EeThetaModel::value(const CVector& theta) const { return lambda_.dot(sinr(theta)); }

CVector EeThetaModel::egrad(const CVector& theta) const {
  if (theta.size() != N_) throw DimensionError("theta length differs from RIS size");
  CVector g = CVector::Zero(N_);
  for (Index k = 0; k < K_; ++k) {
    if (lambda_[k] == 0.0) continue;
    const CVector s = b_.row(k).transpose() + r_[k] * theta;
    const RVector a = s.cwiseAbs2();
    const double S = p_[k] * a[k];
    const double I = p_.dot(a) - S + noise_[k];
    // d|s_kj|^2 has egrad 2 s_kj conj(r_kj); apply the quotient rule.
    CVector c(K_);
    for (Index j = 0; j < K_; ++j) {
      c[j] = j == k ? Complex(2.0 * p_[k] / I) * s[j]
                    : Complex(-2.0 * S * p_[j] / (I * I)) * s[j];
    }
    g += lambda_[k] * (r_[k].adjoint() * c);
  }
  return g;
}

EeObjective ee_theta_objective(const ChannelSet& ch, const CVector& theta, const CMatrix& W,
                               const RVector& p, const RVector& lambda, double noise_mw) {
  const EeThetaModel model(ch, W, p, lambda, noise_mw);
  return {model.value(theta), model.egrad(theta)};
}

Problem ee_theta_problem(const EeThetaModel& model, double scale) {
  Problem prob{Manifold::complex_circle(model.num_elements()), {}, {}, Sense::Maximize};
  const double inv = 1.0 / scale;
  prob.cost = [&model, inv](const ManifoldPoint& x) { return inv * model.value(x.ambient()); };
  prob.egrad = [&model, inv](const ManifoldPoint& x) {
    return CVector(inv * model.egrad(x.ambient()));
  };
  return prob;
}

std::string to_string(EeScheme s) {
  switch (s) {
    case EeScheme::NoRis:
      return "no_ris";
    case EeScheme::RandomPhase:
      return "random";
    case EeScheme::Sd:
      return "sd";
    case EeScheme::Cg:
      return "cg";
    case EeScheme::Pso:
      return "pso";
  }
  return "unknown";
}

EeScheme parse_ee_scheme(const std::string& name) {
  if (name == "no_ris") return EeScheme::NoRis;
  if (name == "random") return EeScheme::RandomPhase;
  if (name == "sd") return EeScheme::Sd;
  if (name == "cg") return EeScheme::Cg;
  if (name == "pso") return EeScheme::Pso;
  throw ConfigError("unknown scheme '" + name + "' (expected no_ris, random, sd, cg or pso)");
}

void EnergyConfig::validate() const {
  if (M < 1 || K < 1 || N < 1) throw ConfigError("M, N and K must be positive");
  if (se_targets.empty()) throw ConfigError("se_targets must not be empty");
  if (se_targets.size() != 1 && static_cast<Index>(se_targets.size()) != K) {
    throw ConfigError("se_targets needs one value or one per user");
  }
  for (double t : se_targets) {
    if (!(t > 0.0)) throw ConfigError("se_targets must be positive");
  }
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  if (outer_iters < 1) throw ConfigError("outer_iters must be positive");
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  if (sweep_axis != "min_se" && sweep_axis != "n_elements" && sweep_axis != "noise_power") {
    throw ConfigError("sweep_axis must be min_se, n_elements or noise_power");
  }
}

double EnergyConfig::sweep_value() const {
  if (sweep_axis == "n_elements") return static_cast<double>(N);
  if (sweep_axis == "noise_power") return noise_dbm;
  return se_targets.front();
}

RVector EnergyConfig::gamma_targets() const {
  RVector g(K);
  for (Index k = 0; k < K; ++k) {
    const double se = se_targets.size() == 1 ? se_targets.front() : se_targets[k];
    g[k] = std::exp2(se) - 1.0;
  }
  return g;
}

EnergyRow run_energy_scheme(const EnergyConfig& cfg, const ChannelSet& ch, EeScheme scheme,
                            const CVector& theta0, std::uint64_t seed) {
  const Index K = ch.num_users();
  const double noise = ch.noise_power_mw;
  const RVector gamma = cfg.gamma_targets();
  const RVector pmax = RVector::Constant(K, dbm_to_mw(cfg.pmax_dbm));
  const CMatrix Hd = stack_direct(ch);
  const bool optimize = scheme == EeScheme::Sd || scheme == EeScheme::Cg ||
                        scheme == EeScheme::Pso;

  auto channel = [&](const CVector& theta) {
    return scheme == EeScheme::NoRis ? Hd : ch.composite_matrix(theta);
  };

  CVector theta = theta0;
  CMatrix H = channel(theta);
  RVector p = pmax;
  CMatrix W = mmse_combiner(H, p, noise);
  PowerControlResult pc =
      power_control_fixed_point(H, W, gamma, noise, pmax, cfg.pc_max_iters, cfg.pc_tol);
  p = pc.p;
  RVector lambda = RVector::Ones(K);
  double prev = total_dbm(p);

  EnergyRow row;
  row.scheme = to_string(scheme);
  row.sweep_axis = cfg.sweep_axis;
  row.sweep_value = cfg.sweep_value();

  for (int t = 1; t <= cfg.outer_iters; ++t) {
    row.outer_iters_used = t;
    W = mmse_combiner(H, p, noise);
    if (optimize) {
      const EeThetaModel model(ch, W, p, lambda, noise);
      const double v0 = model.value(theta);
      if (v0 > 0.0) {
        const Problem prob = ee_theta_problem(model, v0);
        SolverOptions opts = cfg.solver_opts;
        opts.record_time = false;
        opts.seed = derive_seed(seed, 10, t);
        SolverKind kind = SolverKind::Rcg;
        if (scheme == EeScheme::Sd) kind = SolverKind::Rgd;
        if (scheme == EeScheme::Pso) {
          kind = SolverKind::Pso;
          opts.max_iters = cfg.pso_iters;
        }
        const SolverResult r =
            solve(kind, prob, ManifoldPoint(prob.manifold, theta), opts, cfg.pso);
        theta = r.point.ambient();
        H = channel(theta);
      }
      W = mmse_combiner(H, p, noise);
    }
    const RVector sinr = compute_sinr(H, {W, p, LinkDirection::Uplink}, noise);
    const double step = cfg.mu / std::sqrt(static_cast<double>(t));
    lambda = (lambda + step * (gamma - sinr)).cwiseMax(0.0);

    pc = power_control_fixed_point(H, W, gamma, noise, pmax, cfg.pc_max_iters, cfg.pc_tol);
    p = pc.p;
    const double now = total_dbm(p);
    if (std::abs(now - prev) < cfg.outer_tol_db) break;
    prev = now;
  }

  const RVector sinr = compute_sinr(H, {W, p, LinkDirection::Uplink}, noise);
  row.p_ut_dbm = total_dbm(p);
  row.feasible = pc.feasible;
  row.max_target_error = ((sinr.array() / gamma.array()) - 1.0).abs().maxCoeff();
  return row;
}

EnergyTrial run_energy_trial(const EnergyConfig& cfg, int trial, std::uint64_t seed) {
  cfg.validate();
  SystemGeometry geom = ris_semicircle_geometry(static_cast<int>(cfg.K), cfg.radius_m,
                                                cfg.ris_distance_m);
  geom.reference_gain_db = cfg.reference_gain_db;
  ChannelSet ch = sample_channels(geom, cfg.fading, cfg.M, cfg.N, derive_seed(seed, 1));
  ch.noise_power_mw = dbm_to_mw(cfg.noise_dbm);
  const CVector theta0 =
      random_point(Manifold::complex_circle(cfg.N), derive_seed(seed, 2)).ambient();

  EnergyTrial out;
  out.trial = trial;
  for (EeScheme s : cfg.schemes) {
    EnergyRow row = run_energy_scheme(cfg, ch, s, theta0, derive_seed(seed, 3));
    row.trial = trial;
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace mris
