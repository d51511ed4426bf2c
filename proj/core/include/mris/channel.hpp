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
 * @file channel.hpp
 * @brief Geometry, path loss and small-scale fading for RIS-aided multi-user
 * links, and the composite channel h_k = h_d,k + sum_r G_r diag(theta_r) h_r,k.
 *
 * All arrays are half-wavelength uniform linear arrays along the x axis, so a
 * signal arriving from direction phi (measured from the x axis) has response
 * a(phi)_n = exp(j pi n cos phi).
 */

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mris/types.hpp"

namespace mris {

using Vec2 = Eigen::Vector2d;

struct PathlossExponents {
  double ue_ris = 2.0;
  double bs_ris = 2.5;
  double bs_ue = 4.0;
};

struct SystemGeometry {
  Vec2 bs{0.0, 0.0};
  std::vector<Vec2> ris;
  std::vector<Vec2> ues;
  PathlossExponents exponents;
  /// Gain at 1 m; -infinity switches every link off.
  double reference_gain_db = -30.0;

  /// Throws ConfigError on coincident nodes or non-positive exponents.
  void validate() const;
};

enum class FadingModel { PureLos, Rician };

/// How the line-of-sight angles are chosen.
enum class AngleModel {
  RandomUniform,  ///< every LoS angle uniform on [0, 2 pi)
  Geometric       ///< angles follow the node positions
};

/// Structure of the BS-RIS line-of-sight component.
enum class BsRisStructure {
  RankOne,    ///< a_M(departure) a_N(arrival)^H
  PerElement  ///< column n is a_M(phi_n) with its own random angle phi_n
};

struct FadingConfig {
  FadingModel model = FadingModel::PureLos;
  double kappa = 10.0;
  AngleModel angles = AngleModel::RandomUniform;
  BsRisStructure bs_ris = BsRisStructure::RankOne;
  bool direct_link = true;
};

struct ChannelSet {
  std::vector<CMatrix> G;                 ///< per RIS, M x N
  std::vector<std::vector<CVector>> h_r;  ///< [ris][user], N
  std::vector<CVector> h_d;               ///< per user, M
  double noise_power_mw = 0.0;

  /// Line-of-sight (mean) parts, already path-loss scaled. Equal to the
  /// realization under pure LoS.
  std::vector<CMatrix> G_mean;
  std::vector<std::vector<CVector>> h_r_mean;
  std::vector<CVector> h_d_mean;

  Index num_antennas() const { return h_d.empty() ? 0 : h_d.front().size(); }
  Index num_elements() const { return G.empty() ? 0 : G.front().cols(); }
  Index num_users() const { return static_cast<Index>(h_d.size()); }
  Index num_ris() const { return static_cast<Index>(G.size()); }

  /// A_k = [G_1 diag(h_r,1,k), ..., G_R diag(h_r,R,k)], M x (R N).
  CMatrix cascade(Index k) const;
  /// Same cascade built from the mean parts.
  CMatrix mean_cascade(Index k) const;
  /// h_k(theta) for theta = concatenation of the R per-RIS phase vectors.
  CVector composite(Index k, const CVector& theta) const;
  /// Columns h_1(theta), ..., h_K(theta).
  CMatrix composite_matrix(const CVector& theta) const;

  void validate() const;
};

/// Steering vector of an n-element half-wavelength ULA.
CVector ula_steering(Index n, double angle);

/// k points evenly spaced in angle over [0, pi] on a circle; k = 1 sits at
/// pi/2. The seed is unused (kept for jittered variants).
std::vector<Vec2> place_users_semicircle(int k, double radius, const Vec2& center,
                                         std::uint64_t seed = 0);

/// BS at the origin, one RIS at (ris_distance, 0) and k users on a semicircle
/// of the given radius centered on the RIS.
SystemGeometry ris_semicircle_geometry(int k, double radius, double ris_distance);

/// Amplitude scale sqrt(g_ref d^-exponent) of one link.
double link_amplitude(double reference_gain_db, double distance, double exponent);

/// One Monte-Carlo realization with m BS antennas and n elements per RIS.
ChannelSet sample_channels(const SystemGeometry& geom, const FadingConfig& fading, Index m,
                           Index n, std::uint64_t seed);

}  // namespace mris
