#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skewlie/errors.hpp"
#include "skewlie/tensor3.hpp"

namespace skewlie {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Coordinates of an element of the Lie algebra in the descriptor basis {E_i}.
template <typename Scalar>
using AlgebraVector = VectorX<Scalar>;
// A group element in its defining m x m real matrix representation.
template <typename Scalar>
using GroupElement = MatrixX<Scalar>;

/// Which closed-form exp/log/projection rules apply to a descriptor.
enum class Realization {
  rotation3,        // SO(3) as 3x3 rotations
  unit_quaternion,  // SU(2) as real 4x4 left-multiplication matrices of unit quaternions
  heisenberg,       // H3 as upper unitriangular 3x3
  translation,      // R^n as (n+1)x(n+1) affine translations
  torus,            // T^n as block-diagonal 2x2 rotations
  generic           // Pade scaling-and-squaring exp, Schur-Pade log, no projection
};

/// A matrix Lie group: basis of the algebra, structure constants, metric.
///
/// Immutable after construction. The constructor checks that the basis is
/// independent and closed under commutators, that supplied structure constants
/// match the commutators and that the metric is symmetric positive-definite,
/// throwing ConfigError otherwise. Jacobi then holds automatically; Ad-invariance
/// is checked separately (check_ad_invariance).
template <typename Scalar>
class GroupDescriptor {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  static constexpr Scalar kStructureTol = Scalar(1e-12);

  GroupDescriptor(std::string name, Realization realization, std::vector<Matrix> basis, Matrix metric,
                  bool admits_biinvariant_metric, Scalar injectivity_radius,
                  std::optional<Tensor3<Scalar>> structure_constants = std::nullopt)
      : name_(std::move(name)),
        realization_(realization),
        basis_(std::move(basis)),
        metric_(std::move(metric)),
        biinvariant_(admits_biinvariant_metric),
        injectivity_radius_(injectivity_radius) {
    if (basis_.empty()) throw ConfigError("group '" + name_ + "': empty basis");
    const Eigen::Index m = basis_.front().rows();
    const Eigen::Index n = static_cast<Eigen::Index>(basis_.size());
    for (const auto& e : basis_) {
      if (e.rows() != m || e.cols() != m) throw DimensionError("group '" + name_ + "': basis matrices must be m x m");
    }
    Matrix stacked(m * m, n);
    for (Eigen::Index i = 0; i < n; ++i) stacked.col(i) = Eigen::Map<const Vector>(basis_[i].data(), m * m);
    Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
    if (qr.rank() != n) throw ConfigError("group '" + name_ + "': basis matrices are linearly dependent");
    coord_solver_ = (stacked.transpose() * stacked).inverse() * stacked.transpose();
    stacked_ = std::move(stacked);

    Tensor3<Scalar> from_commutators(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const Matrix comm = basis_[i] * basis_[j] - basis_[j] * basis_[i];
        const Vector c = coordinates(comm);
        if (span_residual(comm, c) > kStructureTol) {
          throw ConfigError("group '" + name_ + "': basis is not closed under the commutator");
        }
        for (Eigen::Index k = 0; k < n; ++k) from_commutators(k, i, j) = c(k);
      }
    }
    if (structure_constants) {
      if (structure_constants->dim() != n) throw DimensionError("group '" + name_ + "': structure constant size");
      for (std::size_t q = 0; q < from_commutators.data().size(); ++q) {
        using std::abs;
        if (abs(from_commutators.data()[q] - structure_constants->data()[q]) > kStructureTol) {
          throw ConfigError("group '" + name_ + "': structure constants disagree with basis commutators");
        }
      }
      structure_ = *structure_constants;
    } else {
      structure_ = from_commutators;
    }

    if (metric_.rows() != n || metric_.cols() != n) throw DimensionError("group '" + name_ + "': metric must be n x n");
    if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > kStructureTol) {
      throw ConfigError("group '" + name_ + "': metric is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(metric_);
    if (eig.eigenvalues().minCoeff() <= Scalar(0)) throw ConfigError("group '" + name_ + "': metric not positive-definite");
    if (!(injectivity_radius_ > Scalar(0))) throw ConfigError("group '" + name_ + "': injectivity radius must be positive");
  }

  const std::string& name() const { return name_; }
  Realization realization() const { return realization_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  Eigen::Index embed_dim() const { return basis_.front().rows(); }
  const Matrix& basis(Eigen::Index i) const { return basis_.at(static_cast<std::size_t>(i)); }
  const std::vector<Matrix>& basis() const { return basis_; }
  const Tensor3<Scalar>& structure_constants() const { return structure_; }
  const Matrix& metric() const { return metric_; }
  bool admits_biinvariant_metric() const { return biinvariant_; }
  Scalar injectivity_radius() const { return injectivity_radius_; }

  /// sum_i x^i E_i
  Matrix hat(const Vector& x) const {
    require_dim(x);
    Matrix out = Matrix::Zero(embed_dim(), embed_dim());
    for (Eigen::Index i = 0; i < dim(); ++i) out += x(i) * basis_[static_cast<std::size_t>(i)];
    return out;
  }

  /// Least-squares coordinates of an m x m matrix in the basis.
  Vector coordinates(const Matrix& a) const {
    if (a.rows() != embed_dim() || a.cols() != embed_dim()) throw DimensionError("coordinates: matrix size mismatch");
    return coord_solver_ * Eigen::Map<const Vector>(a.data(), a.size());
  }

  /// Frobenius distance between a matrix and the span element with given coordinates.
  Scalar span_residual(const Matrix& a, const Vector& coords) const {
    return (stacked_ * coords - Eigen::Map<const Vector>(a.data(), a.size())).norm();
  }

  void require_dim(const Vector& x) const {
    if (x.size() != dim()) {
      throw DimensionError("algebra vector of length " + std::to_string(x.size()) + " used with group '" + name_ +
                           "' of dimension " + std::to_string(dim()));
    }
  }

  void require_embed(const Matrix& g) const {
    if (g.rows() != embed_dim() || g.cols() != embed_dim()) {
      throw DimensionError("matrix of size " + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                           " used with group '" + name_ + "'");
    }
  }

  /// Copy of this descriptor with another scalar product on the algebra.
  GroupDescriptor with_metric(Matrix metric, bool admits_biinvariant_metric) const {
    return GroupDescriptor(name_, realization_, basis_, std::move(metric), admits_biinvariant_metric,
                           injectivity_radius_, structure_);
  }

  friend bool operator==(const GroupDescriptor& a, const GroupDescriptor& b) {
    return a.name_ == b.name_ && a.dim() == b.dim() && a.embed_dim() == b.embed_dim();
  }

 private:
  std::string name_;
  Realization realization_;
  std::vector<Matrix> basis_;
  Matrix metric_;
  bool biinvariant_;
  Scalar injectivity_radius_;
  Tensor3<Scalar> structure_;
  Matrix stacked_;
  Matrix coord_solver_;
};

/// max over (i,j,k) of |c^k_{ij} + c^k_{ji}|
template <typename Scalar>
Scalar antisymmetry_residual(const GroupDescriptor<Scalar>& g) {
  const auto& c = g.structure_constants();
  Scalar worst(0);
  for (Eigen::Index k = 0; k < g.dim(); ++k)
    for (Eigen::Index i = 0; i < g.dim(); ++i)
      for (Eigen::Index j = 0; j < g.dim(); ++j) {
        using std::abs;
        worst = std::max(worst, Scalar(abs(c(k, i, j) + c(k, j, i))));
      }
  return worst;
}

/// Largest violation of the Jacobi identity, by direct summation over basis triples:
/// sum_l c^l_{ij} c^m_{lk} + c^l_{jk} c^m_{li} + c^l_{ki} c^m_{lj}.
template <typename Scalar>
Scalar jacobi_residual(const GroupDescriptor<Scalar>& g) {
  const auto& c = g.structure_constants();
  const Eigen::Index n = g.dim();
  Scalar worst(0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index m = 0; m < n; ++m) {
          Scalar acc(0);
          for (Eigen::Index l = 0; l < n; ++l) {
            acc += c(l, i, j) * c(m, l, k) + c(l, j, k) * c(m, l, i) + c(l, k, i) * c(m, l, j);
          }
          using std::abs;
          worst = std::max(worst, Scalar(abs(acc)));
        }
  return worst;
}

}  // namespace skewlie
