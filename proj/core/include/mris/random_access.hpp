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
 * @file random_access.hpp
 * @brief RIS-aided grant-free random access: DFT reflection codebook, multi-beam
 * reflection design by mask fitting on the circle manifold, channel sounding
 * schedules and the two-step access protocol.
 *
 * Reflection patterns are array factors s(phi) = a(phi)^T theta of the RIS
 * (the incident-wave phase is folded into theta), so the DFT beam pointing at
 * u = cos(phi) is theta = conj(a(u)).
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mris/solvers.hpp"

namespace mris {

/// a(phi)_n = exp(j pi n cos phi), evaluated at the direction cosine u.
CVector steering_from_cosine(Index n, double u);

/// |a(phi)^T theta|^2.
double pattern_gain(const CVector& theta, double angle_rad);
RVector pattern(const CVector& theta, const RVector& angles_rad);

struct DftCodebook {
  std::vector<CVector> beams;  ///< unit-modulus configurations, beam b points at u_b
  RVector cosines;             ///< u_b = (2b - n + 1) / n
  std::vector<int> in_sector;  ///< beam indices whose pointing angle lies in the sector

  Index size() const { return static_cast<Index>(beams.size()); }
  /// Pointing angle of beam b in radians.
  double angle(int b) const { return std::acos(cosines[b]); }
};

DftCodebook dft_beam_codebook(Index n_h, double sector_min_deg, double sector_max_deg);

struct MaskFitOptions {
  int grid_size = 512;
  double in_band_weight = 1.0;
  double out_band_weight = 4.0;
  /// In-band target = efficiency * 2N / (in-band width in cosine space), capped at N^2.
  double efficiency = 0.5;
  /// Zero-weight transition band beyond each in-band edge, as a fraction of the half width.
  double guard_fraction = 1.0;
  /// Extra starts from the naive pattern with seeded phase jitter; best cost wins.
  int restarts = 3;
  double jitter_rad = 0.5;
  std::uint64_t seed = 1;
  SolverOptions solver;
};

/// sum_i w_i (|a_i^T theta|^2 - g_i)^2 over a fixed angle grid.
class MaskFitModel {
 public:
  MaskFitModel(Index n, const RVector& angles_rad, RVector target, RVector weights);

  Index num_elements() const { return n_; }
  double value(const CVector& theta) const;
  CVector egrad(const CVector& theta) const;
  const RVector& target() const { return target_; }

 private:
  Index n_;
  CMatrix A_;  // row i = a(phi_i)^T
  RVector target_;
  RVector weights_;
};

Problem mask_fit_problem(const MaskFitModel& model, double scale = 1.0);

struct MultibeamDesign {
  CVector theta;
  double in_band_mean = 0.0;
  double in_band_min = 0.0;
  double out_band_mean = 0.0;
  SolverStatus status = SolverStatus::MaxIters;
  /// Ripple or leakage bound missed (min < 0.6 mean or leakage > 0.15 mean).
  bool below_spec = false;
};

/// Phase-only projection of sum_j conj(a(phi_j)).
CVector naive_multibeam(Index n, const std::vector<double>& centers_rad);

/// Mask fit over a uniform grid on the sector; the in-band region is every grid
/// point within half_width_rad of an intended center. Starts from the naive
/// multi-beam.
MultibeamDesign multibeam_design(Index n, const std::vector<double>& centers_rad,
                                 double half_width_rad, double sector_min_deg,
                                 double sector_max_deg, const MaskFitOptions& opts);

enum class BeamScheme { Single, Multi };
std::string to_string(BeamScheme s);
/// Accepts "single_beam" and "multi_beam".
BeamScheme parse_beam_scheme(const std::string& name);

struct GfraConfig {
  Index M = 128;
  Index n_h = 64;
  double sector_min_deg = 45.0;
  double sector_max_deg = 135.0;
  int tau_p = 4;
  std::vector<int> device_counts{10, 25, 50, 75, 100, 125, 150, 175, 200, 250, 300, 400, 500, 600};
  double sinr_threshold_db = 0.0;
  std::vector<BeamScheme> schemes{BeamScheme::Single, BeamScheme::Multi};
  int grid_beams = 49;
  int groups = 7;
  double ris_distance_m = 50.0;
  double device_min_m = 10.0;
  double device_max_m = 50.0;
  double reference_gain_db = -30.0;
  double bs_ris_exponent = 2.5;
  double ris_ue_exponent = 2.0;
  /// Rician factor of the BS-RIS link; RIS-device links are pure LoS.
  double kappa = 10.0;
  bool bs_ris_los_only = false;
  double device_power_dbm = 0.0;
  double dl_power_dbm = 30.0;
  double noise_dbm = -94.0;
  MaskFitOptions mask;

  void validate() const;
};

struct BeamSchedule {
  BeamScheme kind = BeamScheme::Single;
  /// Sounding configurations in transmission order.
  std::vector<CVector> configs;
  /// Intended beam indices (into beam_angles) of each configuration.
  std::vector<std::vector<int>> intended;
  /// Pointing angles of the sounded beams in radians.
  std::vector<double> beam_angles;
  /// Access beam (codebook index) each sounded beam maps to.
  std::vector<int> access_beam;
  int groups = 0;
  /// Designs that missed the ripple/leakage bounds.
  int below_spec = 0;

  int num_configs() const { return static_cast<int>(configs.size()); }
};

/// Single: one configuration per in-sector DFT beam. Multi: a uniform grid of
/// grid_beams angles, configurations 0..groups-1 hold the consecutive groups
/// floor(b / groups) and groups..2 groups-1 the interleaved groups b mod groups.
BeamSchedule build_schedule(BeamScheme kind, const DftCodebook& codebook, const GfraConfig& cfg);

/// Beam index from the decoded consecutive and interleaved group indices.
int decode_multibeam(int consecutive, int interleaved, int groups);

struct SoundingDecision {
  int beam = 0;  ///< index into BeamSchedule::beam_angles
  bool low_confidence = false;
};

/// measured(c) = received sounding power in configuration c.
SoundingDecision choose_beam(const BeamSchedule& schedule, const RVector& measured,
                             std::uint64_t seed);

/// Expected number of singleton resources when n devices pick resource r
/// independently with probability probs[r].
double singleton_oracle(int n, const std::vector<double>& probs);

/// Probability that a device uniform in the sector ends on each access
/// resource (beam, pilot) under ideal sounding, in in-sector beam order.
std::vector<double> resource_probabilities(const BeamSchedule& schedule, const DftCodebook& codebook,
                                           const GfraConfig& cfg);

struct GfraRow {
  std::string scheme;
  int device_count = 0;
  int trial = 0;
  int successes = 0;
  double throughput = 0.0;
  double sum_se_bpcu = 0.0;
};

/// Codebook and both schedules; built once per configuration.
struct GfraDeployment {
  DftCodebook codebook;
  BeamSchedule single;
  BeamSchedule multi;
  const BeamSchedule& schedule(BeamScheme s) const { return s == BeamScheme::Single ? single : multi; }
};

GfraDeployment prepare_gfra(const GfraConfig& cfg);

/// One drop of device_count devices; every scheme sees the same devices, channels and pilots.
std::vector<GfraRow> run_gfra_trial(const GfraConfig& cfg, const GfraDeployment& dep,
                                    int device_count, int trial, std::uint64_t seed);

}  // namespace mris
