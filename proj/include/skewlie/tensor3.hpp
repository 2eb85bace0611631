#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skewlie/errors.hpp"

namespace skewlie {

/// Dense rank-3 coefficient tensor T(k, i, j) over an n-dimensional algebra.
/// Used for structure constants c^k_{ij} and connection functions alpha^k_{ij}.
template <typename Scalar>
class Tensor3 {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tensor3() = default;
  explicit Tensor3(Eigen::Index n) : n_(n), data_(static_cast<std::size_t>(n * n * n), Scalar(0)) {}

  Eigen::Index dim() const { return n_; }

  Scalar& operator()(Eigen::Index k, Eigen::Index i, Eigen::Index j) {
    return data_[static_cast<std::size_t>((k * n_ + i) * n_ + j)];
  }
  const Scalar& operator()(Eigen::Index k, Eigen::Index i, Eigen::Index j) const {
    return data_[static_cast<std::size_t>((k * n_ + i) * n_ + j)];
  }

  /// out_k = sum_ij T(k,i,j) x_i y_j
  Vector contract(const Vector& x, const Vector& y) const {
    if (x.size() != n_ || y.size() != n_) {
      throw DimensionError("Tensor3::contract: operand length does not match tensor dimension");
    }
    Vector out = Vector::Zero(n_);
    for (Eigen::Index k = 0; k < n_; ++k) {
      Scalar acc(0);
      for (Eigen::Index i = 0; i < n_; ++i) {
        for (Eigen::Index j = 0; j < n_; ++j) acc += (*this)(k, i, j) * x(i) * y(j);
      }
      out(k) = acc;
    }
    return out;
  }

  /// Slice T(k, ., .) as an n x n matrix.
  Matrix slice(Eigen::Index k) const {
    Matrix m(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j) m(i, j) = (*this)(k, i, j);
    return m;
  }

  Tensor3 operator*(Scalar s) const {
    Tensor3 out = *this;
    for (auto& v : out.data_) v *= s;
    return out;
  }

  Tensor3 operator+(const Tensor3& other) const {
    if (other.n_ != n_) throw DimensionError("Tensor3: dimension mismatch");
    Tensor3 out = *this;
    for (std::size_t q = 0; q < data_.size(); ++q) out.data_[q] += other.data_[q];
    return out;
  }

  const std::vector<Scalar>& data() const { return data_; }

 private:
  Eigen::Index n_ = 0;
  std::vector<Scalar> data_;
};

}  // namespace skewlie
