#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "skewlie/errors.hpp"
#include "skewlie/group.hpp"
#include "skewlie/lie_core.hpp"
#include "skewlie/tensor3.hpp"

namespace skewlie {

// A constant 1-form on the algebra, theta = sum_i theta_i dx^i. Read on the
// group it is the left-invariant form theta_e o omega_G.
template <typename Scalar>
using Covector = VectorX<Scalar>;

/// Bilinear alpha(E_i, E_j) = sum_k alpha^k_{ij} E_k encoding a left-invariant
/// connection on G (and the associated connection on the algebra).
template <typename Scalar>
class ConnectionFunction {
 public:
  ConnectionFunction(std::string group_name, Tensor3<Scalar> coeffs)
      : group_(std::move(group_name)), coeffs_(std::move(coeffs)) {}

  static ConnectionFunction zero(const GroupDescriptor<Scalar>& group) {
    return ConnectionFunction(group.name(), Tensor3<Scalar>(group.dim()));
  }

  /// alpha = c [.,.]
  static ConnectionFunction bracket_multiple(const GroupDescriptor<Scalar>& group, Scalar c) {
    return ConnectionFunction(group.name(), group.structure_constants() * c);
  }

  static ConnectionFunction explicit_tensor(const GroupDescriptor<Scalar>& group, Tensor3<Scalar> coeffs) {
    if (coeffs.dim() != group.dim()) throw DimensionError("connection tensor does not match group dimension");
    return ConnectionFunction(group.name(), std::move(coeffs));
  }

  const std::string& group_name() const { return group_; }
  Eigen::Index dim() const { return coeffs_.dim(); }
  const Tensor3<Scalar>& coeffs() const { return coeffs_; }

  void require_group(const GroupDescriptor<Scalar>& group) const {
    if (group.name() != group_ || group.dim() != dim()) {
      throw DimensionError("connection on '" + group_ + "' used with group '" + group.name() + "'");
    }
  }

 private:
  std::string group_;
  Tensor3<Scalar> coeffs_;
};

template <typename Scalar>
AlgebraVector<Scalar> evaluate_alpha(const ConnectionFunction<Scalar>& alpha, const AlgebraVector<Scalar>& x,
                                     const AlgebraVector<Scalar>& y) {
  return alpha.coeffs().contract(x, y);
}

template <typename Scalar>
bool is_skew_symmetric(const ConnectionFunction<Scalar>& alpha, Scalar tol = Scalar(1e-14)) {
  const auto& a = alpha.coeffs();
  for (Eigen::Index k = 0; k < alpha.dim(); ++k)
    for (Eigen::Index i = 0; i < alpha.dim(); ++i)
      for (Eigen::Index j = i; j < alpha.dim(); ++j) {
        using std::abs;
        if (abs(a(k, i, j) + a(k, j, i)) > tol) return false;
      }
  return true;
}

/// Levi-Civita connection of a bi-invariant metric: alpha = 1/2 [.,.].
template <typename Scalar>
ConnectionFunction<Scalar> levi_civita_biinvariant(const GroupDescriptor<Scalar>& group) {
  if (!group.admits_biinvariant_metric()) {
    throw UnsupportedGroupError("levi_civita_biinvariant: group '" + group.name() + "' has no bi-invariant metric");
  }
  return ConnectionFunction<Scalar>::bracket_multiple(group, Scalar(0.5));
}

/// Symmetric part of the covariant derivative of a constant covector:
/// S_ij = -1/2 theta(alpha(E_i,E_j) + alpha(E_j,E_i)).
/// Identically zero when alpha is skew-symmetric.
template <typename Scalar>
MatrixX<Scalar> dual_connection_symmetric_part(const ConnectionFunction<Scalar>& alpha, const Covector<Scalar>& theta) {
  if (theta.size() != alpha.dim()) throw DimensionError("covector length does not match connection");
  const Eigen::Index n = alpha.dim();
  const auto& a = alpha.coeffs();
  MatrixX<Scalar> s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Scalar acc(0);
      for (Eigen::Index k = 0; k < n; ++k) acc += theta(k) * (a(k, i, j) + a(k, j, i));
      s(i, j) = Scalar(-0.5) * acc;
    }
  return s;
}

/// max over basis triples of |<[Z,X],Y> + <X,[Z,Y]>|
template <typename Scalar>
Scalar ad_invariance_residual(const GroupDescriptor<Scalar>& group) {
  const Eigen::Index n = group.dim();
  const auto& g = group.metric();
  const auto& c = group.structure_constants();
  Scalar worst(0);
  for (Eigen::Index z = 0; z < n; ++z)
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y) {
        Scalar acc(0);
        for (Eigen::Index k = 0; k < n; ++k) acc += c(k, z, x) * g(k, y) + c(k, z, y) * g(x, k);
        using std::abs;
        worst = std::max(worst, Scalar(abs(acc)));
      }
  return worst;
}

template <typename Scalar>
bool check_ad_invariance(const GroupDescriptor<Scalar>& group, Scalar tol = Scalar(1e-12)) {
  return ad_invariance_residual(group) <= tol;
}

/// |alpha(X,Y) - alpha(Y,X) - [X,Y]|
template <typename Scalar>
Scalar torsion_residual(const GroupDescriptor<Scalar>& group, const ConnectionFunction<Scalar>& alpha,
                        const AlgebraVector<Scalar>& x, const AlgebraVector<Scalar>& y) {
  alpha.require_group(group);
  return (evaluate_alpha(alpha, x, y) - evaluate_alpha(alpha, y, x) - bracket(group, x, y)).norm();
}

/// max over basis triples of |<alpha(Z,X),Y> + <X,alpha(Z,Y)>|
template <typename Scalar>
Scalar metric_compatibility_residual(const GroupDescriptor<Scalar>& group, const ConnectionFunction<Scalar>& alpha) {
  alpha.require_group(group);
  const Eigen::Index n = group.dim();
  const auto& g = group.metric();
  const auto& a = alpha.coeffs();
  Scalar worst(0);
  for (Eigen::Index z = 0; z < n; ++z)
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y) {
        Scalar acc(0);
        for (Eigen::Index k = 0; k < n; ++k) acc += a(k, z, x) * g(k, y) + a(k, z, y) * g(x, k);
        using std::abs;
        worst = std::max(worst, Scalar(abs(acc)));
      }
  return worst;
}

}  // namespace skewlie
