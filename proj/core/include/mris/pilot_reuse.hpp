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
 * @file pilot_reuse.hpp
 * @brief Intra-cell pilot reuse with R RIS: one group of tau_p users per RIS
 * plus one directly served group, every group reusing the same tau_p pilots.
 * RIS phases are chosen from statistical (line-of-sight) channel knowledge.
 */

#pragma once

#include <string>
#include <vector>

#include "mris/channel.hpp"
#include "mris/solvers.hpp"

namespace mris {

enum class PilotScheme { NoRis, RandomPhase, Optimized };
std::string to_string(PilotScheme s);
/// Accepts "nr", "rps" and "mo".
PilotScheme parse_pilot_scheme(const std::string& name);

enum class ChannelEstimator {
  LeastSquares,  ///< per-pilot LS; co-pilot users share one estimate
  Statistical    ///< linear MMSE around the known line-of-sight means
};
std::string to_string(ChannelEstimator e);
ChannelEstimator parse_channel_estimator(const std::string& name);

struct PilotConfig {
  int R = 3;
  int tau_p = 4;
  Index M = 32;
  Index N = 64;
  int tau_c = 200;
  double pilot_power_dbm = 10.0;  ///< also the data power
  double noise_dbm = -94.0;
  double sector_min_deg = 30.0;
  double sector_max_deg = 150.0;
  double ris_distance_m = 100.0;
  /// RIS-aided users are dropped in a disk of far_radius_m whose center lies
  /// far_offset_m beyond their RIS, on the same bearing from the BS.
  double far_offset_m = 25.0;
  double far_radius_m = 10.0;
  /// Directly served users fall in the annulus [near_min_m, near_radius_m].
  double near_min_m = 40.0;
  double near_radius_m = 80.0;
  double reference_gain_db = -30.0;
  double kappa = 10.0;
  std::vector<PilotScheme> schemes{PilotScheme::NoRis, PilotScheme::RandomPhase,
                                   PilotScheme::Optimized};
  ChannelEstimator estimator = ChannelEstimator::Statistical;
  SolverOptions solver_opts;
  /// Reported with every row: "M" or "K".
  std::string sweep_axis = "M";

  int num_users() const { return (R + 1) * tau_p; }
  void validate() const;
  double sweep_value() const;
};

struct PilotScenario {
  SystemGeometry geometry;
  /// Pilot index of each user.
  std::vector<int> pilot;
  /// Group of each user: 0..R-1 for RIS-aided groups, R for the near group.
  std::vector<int> group;
};

/// RIS on an angular grid (r + 1/2) / R across the sector, users dropped per
/// group, pilots 0..tau_p-1 within every group.
PilotScenario build_pilot_scenario(const PilotConfig& cfg, std::uint64_t seed);

/// Line-of-sight means plus the per-entry variances of the scattered parts.
struct StatisticalCsi {
  std::vector<CVector> h_d_mean;
  std::vector<CMatrix> G_mean;
  std::vector<std::vector<CVector>> h_r_mean;
  std::vector<double> var_d;               ///< per user
  std::vector<double> var_G;               ///< per RIS
  std::vector<std::vector<double>> var_r;  ///< [ris][user]

  /// Covariance of h_k(theta) around its mean; independent of theta.
  CMatrix covariance(Index k, bool with_ris) const;
  /// Mean of h_k(theta).
  CVector mean(Index k, const CVector& theta, bool with_ris) const;
};

StatisticalCsi statistical_csi(const SystemGeometry& geom, const ChannelSet& ch, double kappa);

/// sum_{k in users} ||h_d,k_mean + G_r_mean diag(theta) h_r,k_mean||^2.
class StatisticalGainModel {
 public:
  StatisticalGainModel(const StatisticalCsi& stat, Index ris, const std::vector<Index>& users);

  Index num_elements() const { return N_; }
  double value(const CVector& theta) const;
  CVector egrad(const CVector& theta) const;

 private:
  Index N_ = 0;
  std::vector<CVector> c_;
  std::vector<CMatrix> A_;
};

/// Maximize the statistical gain on the circle manifold.
Problem statistical_gain_problem(const StatisticalGainModel& model, double scale = 1.0);

/// tau_p x tau_p unitary DFT pilot book; column i is pilot i.
CMatrix dft_pilots(int tau_p);

/// h_hat^(i) = Y phi_i / sqrt(tau_p p) for every pilot i (columns of the result).
CMatrix estimate_channels_ls(const CMatrix& Y, const CMatrix& pilots, double pilot_power_mw);

struct PilotRow {
  std::string scheme;
  std::string sweep_axis;
  double sweep_value = 0.0;
  std::string user_class;  ///< "near", "far" or "all"
  int trial = 0;
  double se_bps_hz = 0.0;
};

struct PilotTrial {
  int trial = 0;
  std::vector<PilotRow> rows;
  /// Per-user SE for each scheme, in cfg.schemes order.
  std::vector<RVector> user_se;
};

PilotTrial run_pilot_trial(const PilotConfig& cfg, int trial, std::uint64_t seed);

}  // namespace mris
