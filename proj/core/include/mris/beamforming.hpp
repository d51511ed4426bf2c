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

#pragma once

#include "mris/types.hpp"

namespace mris {

/// Channels with a larger condition number are treated as singular.
inline constexpr double kMaxConditionNumber = 1e8;
/// Coherence block length in symbols.
inline constexpr int kCoherenceBlock = 200;

enum class LinkDirection { Uplink, Downlink };

/// Precoder (downlink) or combiner (uplink) columns plus per-user powers in mW.
struct BeamformerState {
  CMatrix W;
  RVector p;
  LinkDirection direction = LinkDirection::Downlink;
};

/// Condition number of H (largest over smallest singular value).
double condition_number(const CMatrix& H);

/// Column-normalized zero-forcing precoder H (H^H H)^-1. Throws
/// SingularChannelError when K > M or H is numerically rank deficient.
CMatrix zf_precoder(const CMatrix& H);

struct EqualSinrAllocation {
  RVector p;
  double gamma = 0.0;
};

/// Powers that give every user the same SINR under normalized ZF with a total
/// budget pmax_mw.
EqualSinrAllocation equal_sinr_power_allocation(const CMatrix& H, double pmax_mw,
                                                double noise_mw);

/// w_k = (sum_j p_j h_j h_j^H + noise I)^-1 h_k (columns not normalized).
CMatrix mmse_combiner(const CMatrix& H, const RVector& p, double noise_mw);

/// Per-user SINR. Downlink: p_k|w_k^H h_k|^2 / (sum_{j!=k} p_j|w_j^H h_k|^2 + noise).
/// Uplink: p_k|w_k^H h_k|^2 / (sum_{j!=k} p_j|w_k^H h_j|^2 + noise ||w_k||^2).
RVector compute_sinr(const CMatrix& H, const BeamformerState& state, double noise_mw);

/// prelog * log2(1 + sinr), entrywise.
RVector spectral_efficiency(const RVector& sinr, double prelog);

/// 1 - tau_p / tau_c.
double pilot_prelog(int tau_p, int tau_c = kCoherenceBlock);

}  // namespace mris
