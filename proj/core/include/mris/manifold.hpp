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
 * @file manifold.hpp
 * @brief Geometry of the complex circle manifold, the complex Stiefel manifold
 * and finite products of the two.
 *
 * Every point is stored as a flat ambient column vector. Stiefel factors are
 * stored column-major (m*k entries); product points are the concatenation of
 * their factors. The metric is the embedded one, <u, v> = Re(u^H v), and the
 * Euclidean gradient convention is egrad = 2 df/d(conj x), so that the real
 * directional derivative of f at x along v equals Re<egrad, v>.
 */

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mris/types.hpp"

namespace mris {

/// Maximum constraint violation a valid point may carry.
inline constexpr double kPointTolerance = 1e-10;
/// Points violating their constraint by more than this are rejected.
inline constexpr double kInvalidPointTolerance = 1e-8;

class Manifold {
 public:
  enum class Kind { ComplexCircle, ComplexStiefel, Product };

  /// Unit-modulus vectors in C^n.
  static Manifold complex_circle(Index n);
  /// Matrices X in C^{m x k} with X^H X = I_k.
  static Manifold stiefel(Index m, Index k);
  static Manifold product(std::vector<Manifold> factors);

  Kind kind() const { return kind_; }
  /// Number of complex ambient entries.
  Index ambient_size() const { return size_; }
  /// Real dimension of the manifold.
  Index dimension() const;
  /// Rows/cols of the ambient matrix (n x 1 for the circle manifold).
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  const std::vector<Manifold>& factors() const { return factors_; }
  /// Offset of factor i inside a product ambient vector.
  Index offset(std::size_t i) const { return offsets_.at(i); }

  // Raw ambient-array operations. They only check shapes; the typed wrappers
  // below (project_tangent, retract, ...) add point and base validation.
  CVector project(const CVector& x, const CVector& v) const;
  CVector retract(const CVector& x, const CVector& v) const;
  /// Largest constraint violation of x (0 for an exact point).
  double point_error(const CVector& x) const;
  /// Largest tangency violation of v at x.
  double tangent_error(const CVector& x, const CVector& v) const;
  CVector random(std::mt19937_64& rng) const;

  void check_shape(const CVector& v, const char* what) const;

  bool operator==(const Manifold& other) const;
  bool operator!=(const Manifold& other) const { return !(*this == other); }
  std::string describe() const;

 private:
  Manifold() = default;

  Kind kind_ = Kind::ComplexCircle;
  Index rows_ = 0;
  Index cols_ = 0;
  Index size_ = 0;
  std::vector<Manifold> factors_;
  std::vector<Index> offsets_;
};

class ManifoldPoint {
 public:
  /// Throws DimensionError on a shape mismatch and InvalidPointError if the
  /// constraint is violated by more than kInvalidPointTolerance.
  ManifoldPoint(Manifold manifold, CVector ambient);

  const Manifold& manifold() const { return manifold_; }
  const CVector& ambient() const { return ambient_; }
  Index size() const { return ambient_.size(); }

  /// Ambient matrix view of a Stiefel point.
  Eigen::Map<const CMatrix> matrix() const {
    return {ambient_.data(), manifold_.rows(), manifold_.cols()};
  }

  bool same_as(const ManifoldPoint& other) const;

 private:
  Manifold manifold_;
  CVector ambient_;
};

class TangentVector {
 public:
  static TangentVector zero(const ManifoldPoint& base);

  const ManifoldPoint& base() const { return base_; }
  const CVector& ambient() const { return ambient_; }

  TangentVector scaled(double t) const;
  TangentVector operator-() const { return scaled(-1.0); }

 private:
  friend TangentVector project_tangent(const ManifoldPoint&, const CVector&);
  TangentVector(ManifoldPoint base, CVector ambient);

  ManifoldPoint base_;
  CVector ambient_;
};

/// Orthogonal projection of an ambient array onto the tangent space at x.
TangentVector project_tangent(const ManifoldPoint& x, const CVector& v);

/// Retraction R_x(v). Circle: entrywise normalization of x + v; Stiefel:
/// polar factor of X + V.
ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& v);

/// Riemannian gradient from the Euclidean one.
TangentVector egrad_to_rgrad(const ManifoldPoint& x, const CVector& egrad);

/// Embedded metric Re<u, v>; u and v must share their base point.
double inner(const TangentVector& u, const TangentVector& v);
double norm(const TangentVector& u);

/// Vector transport by projection onto the tangent space at y.
TangentVector transport(const ManifoldPoint& y, const TangentVector& v);

/// Deterministic random point: uniform phases on the circle manifold, polar
/// factor of a standard complex Gaussian matrix on the Stiefel manifold.
ManifoldPoint random_point(const Manifold& m, std::uint64_t seed);

}  // namespace mris
