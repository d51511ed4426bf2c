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
 * @file energy.hpp
 * @brief Uplink transmit-power minimization under per-user SE targets:
 * alternating MMSE combining, RIS phase updates on a multiplier-weighted
 * sum-SINR surrogate, multiplier updates and fixed-point power control.
 */

#pragma once

#include <string>
#include <vector>

#include "mris/channel.hpp"
#include "mris/solvers.hpp"

namespace mris {

struct PowerControlResult {
  RVector p;
  bool feasible = false;
  int iters = 0;
};

/// Iterates p_k <- min(p_max_k, p_k gamma_k / SINR_k) with the combiners W
/// held fixed. Feasible when every SINR_k lies within tol (relative) of its
/// target; infeasible when a user sits at p_max below target.
PowerControlResult power_control_fixed_point(const CMatrix& H, const CMatrix& W,
                                             const RVector& gamma_targets, double noise_mw,
                                             const RVector& p_max, int max_iters = 2000,
                                             double tol = 1e-3);

/// sum_k lambda_k SINR_k(theta) for fixed uplink combiners and powers.
/// With s_kj(theta) = w_k^H h_j(theta) = b_kj + r_kj^T theta, the gradient is
/// assembled from the precomputed rows r_kj = conj(G^H w_k) .* h_r,j.
class EeThetaModel {
 public:
  EeThetaModel(const ChannelSet& ch, const CMatrix& W, const RVector& p, const RVector& lambda,
               double noise_mw);

  Index num_elements() const { return N_; }
  RVector sinr(const CVector& theta) const;
  double value(const CVector& theta) const;
  CVector egrad(const CVector& theta) const;

 private:
  Index K_ = 0;
  Index N_ = 0;
  RVector p_;
  RVector lambda_;
  RVector noise_;           // noise * ||w_k||^2
  CMatrix b_;               // b(k, j) = w_k^H h_d,j
  std::vector<CMatrix> r_;  // r_[k].row(j) = r_kj^T
};

struct EeObjective {
  double value = 0.0;
  CVector egrad;
};
EeObjective ee_theta_objective(const ChannelSet& ch, const CVector& theta, const CMatrix& W,
                               const RVector& p, const RVector& lambda, double noise_mw);

/// Maximize model.value(theta) / scale on the circle manifold.
Problem ee_theta_problem(const EeThetaModel& model, double scale = 1.0);

enum class EeScheme { NoRis, RandomPhase, Sd, Cg, Pso };
std::string to_string(EeScheme s);
EeScheme parse_ee_scheme(const std::string& name);

struct EnergyConfig {
  Index M = 64;
  Index N = 100;
  Index K = 8;
  double pmax_dbm = 30.0;
  double noise_dbm = -104.0;
  /// One value per user, or a single value applied to all users.
  std::vector<double> se_targets{1.0};
  std::vector<EeScheme> schemes{EeScheme::NoRis, EeScheme::RandomPhase, EeScheme::Sd,
                                EeScheme::Cg, EeScheme::Pso};
  int outer_iters = 10;
  double outer_tol_db = 0.01;
  double mu = 0.1;
  double radius_m = 20.0;
  double ris_distance_m = 700.0;
  double reference_gain_db = -30.0;
  FadingConfig fading{FadingModel::PureLos, 10.0, AngleModel::RandomUniform,
                      BsRisStructure::PerElement, true};
  SolverOptions solver_opts;
  PsoOptions pso;
  int pso_iters = 100;
  int pc_max_iters = 2000;
  double pc_tol = 1e-3;
  /// Reported with every row: "min_se", "n_elements" or "noise_power".
  std::string sweep_axis = "min_se";

  void validate() const;
  double sweep_value() const;
  RVector gamma_targets() const;
};

struct EnergyRow {
  std::string scheme;
  std::string sweep_axis;
  double sweep_value = 0.0;
  int trial = 0;
  double p_ut_dbm = 0.0;
  bool feasible = false;
  int outer_iters_used = 0;
  /// Largest |SINR_k / gamma_k - 1| at the final point.
  double max_target_error = 0.0;
};

struct EnergyTrial {
  int trial = 0;
  std::vector<EnergyRow> rows;
};

/// Runs the alternating loop for one scheme on a given channel draw. theta0
/// is the starting (and, for RandomPhase, final) phase vector.
EnergyRow run_energy_scheme(const EnergyConfig& cfg, const ChannelSet& ch, EeScheme scheme,
                            const CVector& theta0, std::uint64_t seed);

EnergyTrial run_energy_trial(const EnergyConfig& cfg, int trial, std::uint64_t seed);

}  // namespace mris
