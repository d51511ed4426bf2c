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
 * @file fairness.hpp
 * @brief Downlink max-min fairness: ZF with equal-SINR power allocation, then
 * RIS phases chosen to minimize tr((H^H H)^-1), which maximizes the common
 * SINR gamma = P_max / (noise tr((H^H H)^-1)).
 */

#pragma once

#include <string>
#include <vector>

#include "mris/channel.hpp"
#include "mris/solvers.hpp"

namespace mris {

/// H(theta) = H_d + G diag(theta) H_r with G = [G_1 ... G_R] and H_r(n, k)
/// the RIS-UE coefficient of user k at element n.
class TraceInverseModel {
 public:
  explicit TraceInverseModel(const ChannelSet& ch);

  Index num_elements() const { return G_.cols(); }
  Index num_users() const { return Hd_.cols(); }

  CMatrix channel(const CVector& theta) const;
  /// tr((H^H H)^-1); +infinity when H(theta) is numerically singular.
  double value(const CVector& theta) const;
  /// Conjugate-coordinate gradient of value(), -2 sum_k A_k^H H (H^H H)^-2 e_k.
  CVector egrad(const CVector& theta) const;

  const CMatrix& bs_ris() const { return G_; }
  const CMatrix& ris_ue() const { return Hr_; }

 private:
  CMatrix Hd_;
  CMatrix G_;
  CMatrix Hr_;
};

struct CommonSinr {
  double gamma = 0.0;
  /// Gradient of gamma (not of the trace).
  CVector egrad;
};

/// gamma(theta) and its gradient. Throws SingularChannelError on a rank
/// deficient H(theta).
CommonSinr trace_inverse_objective(const ChannelSet& ch, const CVector& theta, double noise_mw,
                                   double pmax_mw);

/// Minimize value(theta) / scale on the circle manifold.
Problem trace_inverse_problem(const TraceInverseModel& model, double scale = 1.0);

struct AnalyticalResult {
  CVector theta;
  double trace_inverse = 0.0;
  int sweeps = 0;
  /// Trace inverse after each completed sweep, starting with the initial one.
  std::vector<double> history;
};

/// Element-by-element phase updates: a 360-point grid followed by a golden
/// section refinement to 1e-6 rad, accepted only when the trace does not
/// grow. Stops after max_sweeps or when a sweep improves by less than rel_tol.
AnalyticalResult per_element_analytical(const TraceInverseModel& model, const CVector& theta0,
                                        int max_sweeps, double rel_tol = 1e-6);

struct FairnessConfig {
  Index M = 8;
  Index K = 4;
  Index N = 32;
  std::vector<double> pmax_dbm{10.0, 15.0, 20.0, 25.0, 30.0};
  double noise_dbm = -104.0;
  SolverKind solver = SolverKind::Rcg;
  bool random_phase = true;
  bool analytical = true;
  double radius_m = 20.0;
  double ris_distance_m = 700.0;
  double reference_gain_db = -30.0;
  FadingConfig fading{FadingModel::PureLos, 10.0, AngleModel::RandomUniform,
                      BsRisStructure::PerElement, true};
  SolverOptions solver_opts;
  PsoOptions pso;
  int analytical_max_sweeps = 50;
  double analytical_tol = 1e-6;
  /// Singular draws are replaced at most this many times before giving up.
  int max_resamples = 20;
  bool record_runtime = false;

  void validate() const;
};

struct FairnessRow {
  std::string method;  ///< "mo", "random_phase" or "analytical"
  double pmax_dbm = 0.0;
  int trial = 0;
  double common_rate_bps_hz = 0.0;
  double runtime_ms = 0.0;  ///< NaN unless record_runtime is set
  int iters = 0;
  /// (max_k SINR_k - min_k SINR_k) / gamma from an explicit SINR evaluation.
  double sinr_spread = 0.0;
  double gamma = 0.0;
};

struct FairnessTrial {
  int trial = 0;
  int resamples = 0;
  std::vector<FairnessRow> rows;
};

FairnessTrial run_fairness_trial(const FairnessConfig& cfg, int trial, std::uint64_t seed);

}  // namespace mris
