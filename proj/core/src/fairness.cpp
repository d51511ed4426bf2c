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

#include "mris/fairness.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "mris/beamforming.hpp"

namespace mris {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double trace_of_inverse(const CMatrix& gram) {
  Eigen::LDLT<CMatrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success) return kInf;
  const Eigen::VectorXd d = ldlt.vectorD().real();
  const double dmax = d.cwiseAbs().maxCoeff();
  // The Gram matrix squares the channel condition number.
  if (!(d.minCoeff() > dmax / (kMaxConditionNumber * kMaxConditionNumber))) return kInf;
  const CMatrix inv = ldlt.solve(CMatrix::Identity(gram.rows(), gram.cols()));
  return inv.diagonal().real().sum();
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Trace inverse of (H + delta c r^T)^H (H + delta c r^T) from precomputed
// pieces: Q, u = H^H c, |c|^2 and r.
struct RankOneUpdate {
  const CMatrix& Q;
  CVector u;
  double c2;
  CVector r;

  double operator()(Complex delta) const {
    const CVector rc = r.conjugate();
    CMatrix q = Q;
    q.noalias() += delta * u * r.transpose();
    q.noalias() += std::conj(delta) * rc * u.adjoint();
    q.noalias() += std::norm(delta) * c2 * rc * r.transpose();
    return trace_of_inverse(q);
  }
};

}  // namespace

TraceInverseModel::TraceInverseModel(const ChannelSet& ch) {
  ch.validate();
  const Index M = ch.num_antennas();
  const Index K = ch.num_users();
  const Index N = ch.num_elements();
  const Index R = ch.num_ris();
  Hd_.resize(M, K);
  for (Index k = 0; k < K; ++k) Hd_.col(k) = ch.h_d[k];
  G_.resize(M, R * N);
  Hr_.resize(R * N, K);
  for (Index r = 0; r < R; ++r) {
    G_.middleCols(r * N, N) = ch.G[r];
    for (Index k = 0; k < K; ++k) Hr_.block(r * N, k, N, 1) = ch.h_r[r][k];
  }
}

CMatrix TraceInverseModel::channel(const CVector& theta) const {
  if (theta.size() != G_.cols()) throw DimensionError("theta length differs from RIS size");
  if (G_.cols() == 0) return Hd_;
  return Hd_ + G_ * (theta.asDiagonal() * Hr_);
}

double TraceInverseModel::value(const CVector& theta) const {
  const CMatrix H = channel(theta);
  return trace_of_inverse(H.adjoint() * H);
}

CVector TraceInverseModel::egrad(const CVector& theta) const {
  const CMatrix H = channel(theta);
  const CMatrix Qinv =
      (H.adjoint() * H).ldlt().solve(CMatrix::Identity(H.cols(), H.cols()));
  const CMatrix B = H * (Qinv * Qinv);
  // A_k^H b_k = conj(H_r(:, k)) .* (G^H b_k)
  const CMatrix GB = G_.adjoint() * B;
  return -2.0 * Hr_.conjugate().cwiseProduct(GB).rowwise().sum();
}

CommonSinr trace_inverse_objective(const ChannelSet& ch, const CVector& theta, double noise_mw,
                                   double pmax_mw) {
  const TraceInverseModel model(ch);
  const double g = model.value(theta);
  if (!std::isfinite(g)) throw SingularChannelError("H(theta) is numerically singular");
  CommonSinr out;
  out.gamma = pmax_mw / (noise_mw * g);
  out.egrad = (-pmax_mw / (noise_mw * g * g)) * model.egrad(theta);
  return out;
}

Problem trace_inverse_problem(const TraceInverseModel& model, double scale) {
  Problem p{Manifold::complex_circle(model.num_elements()), {}, {}, Sense::Minimize};
  const double inv = 1.0 / scale;
  p.cost = [&model, inv](const ManifoldPoint& x) { return inv * model.value(x.ambient()); };
  p.egrad = [&model, inv](const ManifoldPoint& x) { return CVector(inv * model.egrad(x.ambient())); };
  return p;
}

AnalyticalResult per_element_analytical(const TraceInverseModel& model, const CVector& theta0,
                                        int max_sweeps, double rel_tol) {
  constexpr int kGrid = 360;
  constexpr double kTol = 1e-6;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;

  AnalyticalResult out;
  out.theta = theta0;
  CMatrix H = model.channel(theta0);
  CMatrix Q = H.adjoint() * H;
  double g = trace_of_inverse(Q);
  out.trace_inverse = g;
  out.history.push_back(g);
  const CMatrix& Gm = model.bs_ris();
  const CMatrix& Hr = model.ris_ue();

  for (int s = 0; s < max_sweeps; ++s) {
    const double g_start = g;
    for (Index n = 0; n < model.num_elements(); ++n) {
      const CVector c = Gm.col(n);
      RankOneUpdate f{Q, H.adjoint() * c, c.squaredNorm(), Hr.row(n).transpose()};
      const Complex cur = out.theta[n];
      auto at = [&](double phi) { return f(std::polar(1.0, phi) - cur); };

      const double step = 2.0 * kPi / kGrid;
      int best = 0;
      double best_val = kInf;
      for (int i = 0; i < kGrid; ++i) {
        const double v = at(i * step);
        if (v < best_val) {
          best_val = v;
          best = i;
        }
      }
      double lo = (best - 1) * step;
      double hi = (best + 1) * step;
      double x1 = hi - invphi * (hi - lo);
      double x2 = lo + invphi * (hi - lo);
      double f1 = at(x1);
      double f2 = at(x2);
      while (hi - lo > kTol) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - invphi * (hi - lo);
          f1 = at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + invphi * (hi - lo);
          f2 = at(x2);
        }
      }
      double phi = 0.5 * (lo + hi);
      double val = at(phi);
      if (best_val < val) {
        phi = best * step;
        val = best_val;
      }
      if (!(val <= g)) continue;

      const Complex next = std::polar(1.0, phi);
      const Complex delta = next - cur;
      H.noalias() += delta * c * f.r.transpose();
      out.theta[n] = next;
      Q = H.adjoint() * H;
      g = trace_of_inverse(Q);
    }
    out.sweeps = s + 1;
    out.history.push_back(g);
    if (g_start - g <= rel_tol * g_start) break;
  }
  out.trace_inverse = g;
  return out;
}

void FairnessConfig::validate() const {
  if (M < 1 || K < 1) throw ConfigError("M and K must be positive");
  if (K > M) throw ConfigError("K must not exceed M for zero forcing");
  if (N < 0) throw ConfigError("N must be non-negative");
  if (pmax_dbm.empty()) throw ConfigError("pmax_dbm sweep must not be empty");
  if (analytical_max_sweeps < 1) throw ConfigError("analytical_max_sweeps must be positive");
  if (max_resamples < 0) throw ConfigError("max_resamples must be non-negative");
}

FairnessTrial run_fairness_trial(const FairnessConfig& cfg, int trial, std::uint64_t seed) {
  cfg.validate();
  FairnessTrial out;
  out.trial = trial;

  SystemGeometry geom = ris_semicircle_geometry(static_cast<int>(cfg.K), cfg.radius_m,
                                                cfg.ris_distance_m);
  geom.reference_gain_db = cfg.reference_gain_db;
  const double noise = dbm_to_mw(cfg.noise_dbm);
  const Manifold ccm = cfg.N > 0 ? Manifold::complex_circle(cfg.N) : Manifold::complex_circle(1);

  ChannelSet ch;
  CVector theta0;
  for (int attempt = 0;; ++attempt) {
    ch = sample_channels(geom, cfg.fading, cfg.M, cfg.N, derive_seed(seed, 1, attempt));
    ch.noise_power_mw = noise;
    theta0 = cfg.N > 0 ? random_point(ccm, derive_seed(seed, 2, attempt)).ambient()
                       : CVector(0);
    if (condition_number(ch.composite_matrix(theta0)) < kMaxConditionNumber) break;
    if (attempt >= cfg.max_resamples) {
      throw SingularChannelError("no full-rank channel after " +
                                 std::to_string(cfg.max_resamples) + " resamples");
    }
    ++out.resamples;
  }

  const TraceInverseModel model(ch);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  struct Outcome {
    std::string method;
    CVector theta;
    double runtime_ms;
    int iters;
  };
  std::vector<Outcome> outcomes;

  {
    const auto t0 = std::chrono::steady_clock::now();
    CVector theta = theta0;
    int iters = 0;
    if (cfg.N > 0) {
      const double g0 = model.value(theta0);
      const Problem prob = trace_inverse_problem(model, g0);
      SolverOptions opts = cfg.solver_opts;
      opts.seed = derive_seed(seed, 3);
      opts.record_time = false;
      const SolverResult r = solve(cfg.solver, prob, ManifoldPoint(ccm, theta0), opts, cfg.pso);
      theta = r.point.ambient();
      iters = r.trace.iterations();
    }
    outcomes.push_back({"mo", theta, cfg.record_runtime ? elapsed_ms(t0) : nan, iters});
  }
  if (cfg.random_phase) outcomes.push_back({"random_phase", theta0, cfg.record_runtime ? 0.0 : nan, 0});
  if (cfg.analytical) {
    const auto t0 = std::chrono::steady_clock::now();
    CVector theta = theta0;
    int sweeps = 0;
    if (cfg.N > 0) {
      AnalyticalResult a = per_element_analytical(model, theta0, cfg.analytical_max_sweeps,
                                                  cfg.analytical_tol);
      theta = std::move(a.theta);
      sweeps = a.sweeps;
    }
    outcomes.push_back({"analytical", theta, cfg.record_runtime ? elapsed_ms(t0) : nan, sweeps});
  }

  for (const auto& o : outcomes) {
    const CMatrix H = model.channel(o.theta);
    for (double pdbm : cfg.pmax_dbm) {
      const double pmax = dbm_to_mw(pdbm);
      FairnessRow row;
      row.method = o.method;
      row.pmax_dbm = pdbm;
      row.trial = trial;
      row.runtime_ms = o.runtime_ms;
      row.iters = o.iters;
      try {
        const EqualSinrAllocation alloc = equal_sinr_power_allocation(H, pmax, noise);
        const BeamformerState st{zf_precoder(H), alloc.p, LinkDirection::Downlink};
        const RVector sinr = compute_sinr(H, st, noise);
        row.gamma = alloc.gamma;
        row.common_rate_bps_hz = std::log2(1.0 + sinr.minCoeff());
        row.sinr_spread = (sinr.maxCoeff() - sinr.minCoeff()) / alloc.gamma;
      } catch (const SingularChannelError&) {
        row.gamma = 0.0;
        row.common_rate_bps_hz = 0.0;
        row.sinr_spread = 0.0;
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace mris
