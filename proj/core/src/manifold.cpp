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

#include "mris/manifold.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/SVD>

namespace mris {
namespace {

using ConstMatMap = Eigen::Map<const CMatrix>;
using MatMap = Eigen::Map<CMatrix>;

CMatrix herm(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

CMatrix polar_factor(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

Manifold Manifold::complex_circle(Index n) {
  if (n <= 0) {
    throw DimensionError("complex circle manifold needs n > 0, got " + std::to_string(n));
  }
  Manifold m;
  m.kind_ = Kind::ComplexCircle;
  m.rows_ = n;
  m.cols_ = 1;
  m.size_ = n;
  return m;
}

Manifold Manifold::stiefel(Index rows, Index cols) {
  if (rows <= 0 || cols <= 0 || cols > rows) {
    throw DimensionError("Stiefel manifold needs 0 < k <= m, got m=" + std::to_string(rows) +
                         ", k=" + std::to_string(cols));
  }
  Manifold m;
  m.kind_ = Kind::ComplexStiefel;
  m.rows_ = rows;
  m.cols_ = cols;
  m.size_ = rows * cols;
  return m;
}

Manifold Manifold::product(std::vector<Manifold> factors) {
  if (factors.empty()) {
    throw DimensionError("product manifold needs at least one factor");
  }
  Manifold m;
  m.kind_ = Kind::Product;
  Index offset = 0;
  for (const auto& f : factors) {
    m.offsets_.push_back(offset);
    offset += f.ambient_size();
  }
  m.size_ = offset;
  m.rows_ = offset;
  m.cols_ = 1;
  m.factors_ = std::move(factors);
  return m;
}

Index Manifold::dimension() const {
  switch (kind_) {
    case Kind::ComplexCircle:
      return rows_;
    case Kind::ComplexStiefel:
      return 2 * rows_ * cols_ - cols_ * cols_;
    case Kind::Product: {
      Index d = 0;
      for (const auto& f : factors_) d += f.dimension();
      return d;
    }
  }
  return 0;
}

void Manifold::check_shape(const CVector& v, const char* what) const {
  if (v.size() != size_) {
    std::ostringstream os;
    os << what << ": expected " << size_ << " ambient entries for " << describe() << ", got "
       << v.size();
    throw DimensionError(os.str());
  }
}

CVector Manifold::project(const CVector& x, const CVector& v) const {
  check_shape(x, "project (point)");
  check_shape(v, "project (vector)");
  switch (kind_) {
    case Kind::ComplexCircle: {
      CVector out(size_);
      for (Index i = 0; i < size_; ++i) {
        out[i] = v[i] - (v[i] * std::conj(x[i])).real() * x[i];
      }
      return out;
    }
    case Kind::ComplexStiefel: {
      ConstMatMap X(x.data(), rows_, cols_);
      ConstMatMap V(v.data(), rows_, cols_);
      CVector out(size_);
      MatMap(out.data(), rows_, cols_) = V - X * herm(X.adjoint() * V);
      return out;
    }
    case Kind::Product: {
      CVector out(size_);
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        const Index n = factors_[i].ambient_size();
        out.segment(offsets_[i], n) =
            factors_[i].project(x.segment(offsets_[i], n), v.segment(offsets_[i], n));
      }
      return out;
    }
  }
  return v;
}

CVector Manifold::retract(const CVector& x, const CVector& v) const {
  check_shape(x, "retract (point)");
  check_shape(v, "retract (vector)");
  switch (kind_) {
    case Kind::ComplexCircle: {
      CVector out(size_);
      for (Index i = 0; i < size_; ++i) {
        const Complex z = x[i] + v[i];
        const double r = std::abs(z);
        if (r == 0.0) {
          throw DegenerateRetractionError("retraction annihilates circle entry " +
                                          std::to_string(i));
        }
        out[i] = z / r;
      }
      return out;
    }
    case Kind::ComplexStiefel: {
      ConstMatMap X(x.data(), rows_, cols_);
      ConstMatMap V(v.data(), rows_, cols_);
      CVector out(size_);
      MatMap(out.data(), rows_, cols_) = polar_factor(X + V);
      return out;
    }
    case Kind::Product: {
      CVector out(size_);
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        const Index n = factors_[i].ambient_size();
        out.segment(offsets_[i], n) =
            factors_[i].retract(x.segment(offsets_[i], n), v.segment(offsets_[i], n));
      }
      return out;
    }
  }
  return x;
}

double Manifold::point_error(const CVector& x) const {
  check_shape(x, "point_error");
  switch (kind_) {
    case Kind::ComplexCircle: {
      double worst = 0.0;
      for (Index i = 0; i < size_; ++i) {
        worst = std::max(worst, std::abs(std::abs(x[i]) - 1.0));
      }
      return worst;
    }
    case Kind::ComplexStiefel: {
      ConstMatMap X(x.data(), rows_, cols_);
      return (X.adjoint() * X - CMatrix::Identity(cols_, cols_)).norm();
    }
    case Kind::Product: {
      double worst = 0.0;
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        const Index n = factors_[i].ambient_size();
        worst = std::max(worst, factors_[i].point_error(x.segment(offsets_[i], n)));
      }
      return worst;
    }
  }
  return 0.0;
}

double Manifold::tangent_error(const CVector& x, const CVector& v) const {
  check_shape(x, "tangent_error (point)");
  check_shape(v, "tangent_error (vector)");
  switch (kind_) {
    case Kind::ComplexCircle: {
      double worst = 0.0;
      for (Index i = 0; i < size_; ++i) {
        worst = std::max(worst, std::abs((v[i] * std::conj(x[i])).real()));
      }
      return worst;
    }
    case Kind::ComplexStiefel: {
      ConstMatMap X(x.data(), rows_, cols_);
      ConstMatMap V(v.data(), rows_, cols_);
      return herm(X.adjoint() * V).norm();
    }
    case Kind::Product: {
      double worst = 0.0;
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        const Index n = factors_[i].ambient_size();
        worst = std::max(worst, factors_[i].tangent_error(x.segment(offsets_[i], n),
                                                          v.segment(offsets_[i], n)));
      }
      return worst;
    }
  }
  return 0.0;
}

CVector Manifold::random(std::mt19937_64& rng) const {
  CVector out(size_);
  switch (kind_) {
    case Kind::ComplexCircle: {
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      for (Index i = 0; i < size_; ++i) out[i] = std::polar(1.0, phase(rng));
      return out;
    }
    case Kind::ComplexStiefel: {
      std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
      CMatrix a(rows_, cols_);
      for (Index j = 0; j < cols_; ++j) {
        for (Index i = 0; i < rows_; ++i) a(i, j) = Complex(gauss(rng), gauss(rng));
      }
      MatMap(out.data(), rows_, cols_) = polar_factor(a);
      return out;
    }
    case Kind::Product: {
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        out.segment(offsets_[i], factors_[i].ambient_size()) = factors_[i].random(rng);
      }
      return out;
    }
  }
  return out;
}

bool Manifold::operator==(const Manifold& other) const {
  return kind_ == other.kind_ && rows_ == other.rows_ && cols_ == other.cols_ &&
         size_ == other.size_ && factors_ == other.factors_;
}

std::string Manifold::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::ComplexCircle:
      os << "ComplexCircle(" << rows_ << ")";
      break;
    case Kind::ComplexStiefel:
      os << "ComplexStiefel(" << rows_ << "," << cols_ << ")";
      break;
    case Kind::Product:
      os << "Product(";
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i) os << " x ";
        os << factors_[i].describe();
      }
      os << ")";
      break;
  }
  return os.str();
}

ManifoldPoint::ManifoldPoint(Manifold manifold, CVector ambient)
    : manifold_(std::move(manifold)), ambient_(std::move(ambient)) {
  manifold_.check_shape(ambient_, "ManifoldPoint");
  const double err = manifold_.point_error(ambient_);
  if (!(err <= kInvalidPointTolerance)) {
    std::ostringstream os;
    os << "point violates " << manifold_.describe() << " constraint by " << err;
    throw InvalidPointError(os.str());
  }
}

bool ManifoldPoint::same_as(const ManifoldPoint& other) const {
  return manifold_ == other.manifold_ && ambient_ == other.ambient_;
}

TangentVector::TangentVector(ManifoldPoint base, CVector ambient)
    : base_(std::move(base)), ambient_(std::move(ambient)) {}

TangentVector TangentVector::zero(const ManifoldPoint& base) {
  return TangentVector(base, CVector::Zero(base.size()));
}

TangentVector TangentVector::scaled(double t) const {
  return TangentVector(base_, t * ambient_);
}

TangentVector project_tangent(const ManifoldPoint& x, const CVector& v) {
  return TangentVector(x, x.manifold().project(x.ambient(), v));
}

ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& v) {
  if (!v.base().same_as(x)) {
    throw DimensionError("retract: tangent vector is not based at the given point");
  }
  return ManifoldPoint(x.manifold(), x.manifold().retract(x.ambient(), v.ambient()));
}

TangentVector egrad_to_rgrad(const ManifoldPoint& x, const CVector& egrad) {
  return project_tangent(x, egrad);
}

double inner(const TangentVector& u, const TangentVector& v) {
  if (!u.base().same_as(v.base())) {
    throw DimensionError("inner: tangent vectors have different base points");
  }
  return u.ambient().dot(v.ambient()).real();
}

double norm(const TangentVector& u) { return u.ambient().norm(); }

TangentVector transport(const ManifoldPoint& y, const TangentVector& v) {
  if (y.manifold() != v.base().manifold()) {
    throw DimensionError("transport: target point lies on a different manifold");
  }
  return project_tangent(y, v.ambient());
}

ManifoldPoint random_point(const Manifold& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ManifoldPoint(m, m.random(rng));
}

}  // namespace mris
