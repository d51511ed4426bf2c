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

#include "mris/beamforming.hpp"

#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace mris {
namespace {

void require_full_rank(const CMatrix& H) {
  if (H.cols() == 0) throw DimensionError("channel matrix has no users");
  if (H.cols() > H.rows()) {
    std::ostringstream os;
    os << "zero forcing needs K <= M, got K=" << H.cols() << ", M=" << H.rows();
    throw SingularChannelError(os.str());
  }
  const double c = condition_number(H);
  if (!(c < kMaxConditionNumber)) {
    std::ostringstream os;
    os << "channel matrix is numerically singular (condition number " << c << ")";
    throw SingularChannelError(os.str());
  }
}

}  // namespace

double condition_number(const CMatrix& H) {
  Eigen::JacobiSVD<CMatrix> svd(H);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  const double lo = s[s.size() - 1];
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / lo;
}

CMatrix zf_precoder(const CMatrix& H) {
  require_full_rank(H);
  const CMatrix gram = H.adjoint() * H;
  CMatrix Z = H * gram.ldlt().solve(CMatrix::Identity(H.cols(), H.cols()));
  for (Index k = 0; k < Z.cols(); ++k) Z.col(k).normalize();
  return Z;
}

EqualSinrAllocation equal_sinr_power_allocation(const CMatrix& H, double pmax_mw,
                                                double noise_mw) {
  require_full_rank(H);
  const CMatrix gram = H.adjoint() * H;
  const CMatrix inv = gram.ldlt().solve(CMatrix::Identity(H.cols(), H.cols()));
  const RVector d = inv.diagonal().real();
  const double tr = d.sum();
  EqualSinrAllocation out;
  out.p = pmax_mw * d / tr;
  out.gamma = pmax_mw / (noise_mw * tr);
  return out;
}

CMatrix mmse_combiner(const CMatrix& H, const RVector& p, double noise_mw) {
  if (!(noise_mw > 0.0)) throw Error("MMSE combining needs positive noise power");
  if (p.size() != H.cols()) throw DimensionError("power vector length differs from K");
  CMatrix C = noise_mw * CMatrix::Identity(H.rows(), H.rows());
  C.noalias() += H * p.cwiseMax(0.0).asDiagonal() * H.adjoint();
  return C.llt().solve(H);
}

RVector compute_sinr(const CMatrix& H, const BeamformerState& state, double noise_mw) {
  const Index K = H.cols();
  if (state.W.rows() != H.rows() || state.W.cols() != K || state.p.size() != K) {
    throw DimensionError("beamformer and channel dimensions differ");
  }
  // gains(i, j) = |w_i^H h_j|^2
  const Eigen::MatrixXd gains = (state.W.adjoint() * H).cwiseAbs2();
  RVector sinr(K);
  for (Index k = 0; k < K; ++k) {
    double interference = 0.0;
    double noise = noise_mw;
    for (Index j = 0; j < K; ++j) {
      if (j == k) continue;
      interference += state.direction == LinkDirection::Downlink ? state.p[j] * gains(j, k)
                                                                 : state.p[j] * gains(k, j);
    }
    if (state.direction == LinkDirection::Uplink) noise *= state.W.col(k).squaredNorm();
    const double denom = interference + noise;
    const double signal = state.p[k] * gains(k, k);
    sinr[k] = denom > 0.0 ? signal / denom : (signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  return sinr;
}

RVector spectral_efficiency(const RVector& sinr, double prelog) {
  RVector se(sinr.size());
  for (Index k = 0; k < sinr.size(); ++k) se[k] = prelog * std::log2(1.0 + sinr[k]);
  return se;
}

double pilot_prelog(int tau_p, int tau_c) {
  if (tau_c <= 0 || tau_p < 0 || tau_p > tau_c) throw ConfigError("need 0 <= tau_p <= tau_c");
  return 1.0 - static_cast<double>(tau_p) / tau_c;
}

}  // namespace mris
