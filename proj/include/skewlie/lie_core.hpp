#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <string>

#include "skewlie/errors.hpp"
#include "skewlie/group.hpp"

namespace skewlie {

// Group logarithms closer than this to the cut locus raise BranchError.
inline constexpr double kBranchTolerance = 1e-6;
// Group logarithms closer than this to the cut locus are flagged ill-conditioned.
inline constexpr double kConditioningMargin = 1e-2;
// Membership residual every sampled element must respect.
inline constexpr double kMembershipTolerance = 1e-8;
// Maximal Frobenius distance accepted by project_to_group.
inline constexpr double kProjectionReach = 0.1;

template <typename Scalar>
struct LogResult {
  AlgebraVector<Scalar> value;
  // True when the element is within kConditioningMargin of the cut locus.
  bool ill_conditioned = false;
};

namespace detail {

template <typename Scalar>
Scalar pi() {
  return Scalar(EIGEN_PI);
}

template <typename Scalar>
MatrixX<Scalar> quaternion_left(const Eigen::Matrix<Scalar, 4, 1>& q) {
  const Scalar w = q(0), x = q(1), y = q(2), z = q(3);
  MatrixX<Scalar> l(4, 4);
  l << w, -x, -y, -z,  //
      x, w, -z, y,     //
      y, z, w, -x,     //
      z, -y, x, w;
  return l;
}

// Least-squares quaternion q with L(q) closest to m; the four L(e_a) are
// Frobenius-orthogonal with squared norm 4.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> quaternion_fit(const MatrixX<Scalar>& m) {
  Eigen::Matrix<Scalar, 4, 1> q;
  q(0) = (m(0, 0) + m(1, 1) + m(2, 2) + m(3, 3)) / Scalar(4);
  q(1) = (m(1, 0) - m(0, 1) + m(3, 2) - m(2, 3)) / Scalar(4);
  q(2) = (m(2, 0) - m(0, 2) + m(1, 3) - m(3, 1)) / Scalar(4);
  q(3) = (m(3, 0) - m(0, 3) + m(2, 1) - m(1, 2)) / Scalar(4);
  return q;
}

// x / sin(x) for x in [0, pi), accurate near 0.
template <typename Scalar>
Scalar x_over_sin(Scalar x) {
  using std::sin;
  if (x < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return Scalar(1) + x2 / Scalar(6) + Scalar(7) * x2 * x2 / Scalar(360);
  }
  return x / sin(x);
}

template <typename Scalar>
void check_finite(const MatrixX<Scalar>& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite input");
}

template <typename Scalar>
MatrixX<Scalar> rotation_exp(const AlgebraVector<Scalar>& x) {
  using std::cos;
  using std::sin;
  const Scalar theta = x.norm();
  MatrixX<Scalar> k(3, 3);
  k << Scalar(0), -x(2), x(1), x(2), Scalar(0), -x(0), -x(1), x(0), Scalar(0);
  Scalar a, b;
  if (theta < Scalar(1e-4)) {
    const Scalar t2 = theta * theta;
    a = Scalar(1) - t2 / Scalar(6) + t2 * t2 / Scalar(120);
    b = Scalar(0.5) - t2 / Scalar(24) + t2 * t2 / Scalar(720);
  } else {
    a = sin(theta) / theta;
    b = (Scalar(1) - cos(theta)) / (theta * theta);
  }
  return MatrixX<Scalar>::Identity(3, 3) + a * k + b * k * k;
}

template <typename Scalar>
LogResult<Scalar> rotation_log(const MatrixX<Scalar>& r) {
  using std::atan2;
  using std::sqrt;
  const Scalar pi_v = pi<Scalar>();
  AlgebraVector<Scalar> w(3);
  w << (r(2, 1) - r(1, 2)) / Scalar(2), (r(0, 2) - r(2, 0)) / Scalar(2), (r(1, 0) - r(0, 1)) / Scalar(2);
  const Scalar c = (r.trace() - Scalar(1)) / Scalar(2);
  const Scalar s = w.norm();
  const Scalar theta = atan2(s, c);
  if (theta >= pi_v - Scalar(kBranchTolerance)) {
    throw BranchError("log_group(so3): rotation angle within branch tolerance of pi; refine the step");
  }
  LogResult<Scalar> out;
  out.ill_conditioned = theta > pi_v - Scalar(kConditioningMargin);
  if (theta < pi_v - Scalar(0.1)) {
    out.value = x_over_sin(theta) * w;
    return out;
  }
  // Near pi the skew part is small; recover the axis from the symmetric part,
  // S = (R + R^T)/2 - cI = (1 - c) a a^T.
  const MatrixX<Scalar> sym = (r + r.transpose()) / Scalar(2) - c * MatrixX<Scalar>::Identity(3, 3);
  Eigen::Index j = 0;
  sym.diagonal().maxCoeff(&j);
  const Scalar one_minus_c = Scalar(1) - c;
  const Scalar aj = sqrt(sym(j, j) / one_minus_c);
  AlgebraVector<Scalar> axis = sym.col(j) / (one_minus_c * aj);
  axis.normalize();
  if (axis.dot(w) < Scalar(0)) axis = -axis;
  out.value = theta * axis;
  return out;
}

template <typename Scalar>
MatrixX<Scalar> quaternion_exp(const AlgebraVector<Scalar>& x) {
  using std::cos;
  using std::sin;
  // Basis E_a = L(e_a)/2, so X corresponds to the pure quaternion x/2.
  const Scalar half = x.norm() / Scalar(2);
  Eigen::Matrix<Scalar, 4, 1> q;
  q(0) = cos(half);
  const Scalar scale = (half < Scalar(1e-4)) ? (Scalar(1) - half * half / Scalar(6)) / Scalar(2) : sin(half) / (Scalar(2) * half);
  q.template tail<3>() = scale * x;
  return quaternion_left<Scalar>(q);
}

template <typename Scalar>
LogResult<Scalar> quaternion_log(const MatrixX<Scalar>& g) {
  using std::atan2;
  Eigen::Matrix<Scalar, 4, 1> q = quaternion_fit(g);
  q.normalize();
  const Eigen::Matrix<Scalar, 3, 1> v = q.template tail<3>();
  const Scalar phi = atan2(v.norm(), q(0));
  const Scalar pi_v = pi<Scalar>();
  if (phi >= pi_v - Scalar(kBranchTolerance)) {
    throw BranchError("log_group(su2): quaternion angle within branch tolerance of pi; refine the step");
  }
  LogResult<Scalar> out;
  out.ill_conditioned = phi > pi_v - Scalar(kConditioningMargin);
  out.value = Scalar(2) * x_over_sin(phi) * AlgebraVector<Scalar>(v);
  return out;
}

template <typename Scalar>
MatrixX<Scalar> torus_exp(const AlgebraVector<Scalar>& x) {
  using std::cos;
  using std::sin;
  const Eigen::Index n = x.size();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar c = cos(x(i)), s = sin(x(i));
    out.template block<2, 2>(2 * i, 2 * i) << c, -s, s, c;
  }
  return out;
}

template <typename Scalar>
LogResult<Scalar> torus_log(const MatrixX<Scalar>& g) {
  using std::abs;
  using std::atan2;
  const Eigen::Index n = g.rows() / 2;
  LogResult<Scalar> out;
  out.value.resize(n);
  const Scalar pi_v = pi<Scalar>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto b = g.template block<2, 2>(2 * i, 2 * i);
    const Scalar angle = atan2(b(1, 0) - b(0, 1), b(0, 0) + b(1, 1));
    if (abs(angle) >= pi_v - Scalar(kBranchTolerance)) {
      throw BranchError("log_group(torus): angle within branch tolerance of pi; refine the step");
    }
    out.ill_conditioned = out.ill_conditioned || abs(angle) > pi_v - Scalar(kConditioningMargin);
    out.value(i) = angle;
  }
  return out;
}

}  // namespace detail

/// Identity element of the matrix representation.
template <typename Scalar>
GroupElement<Scalar> identity_element(const GroupDescriptor<Scalar>& group) {
  return MatrixX<Scalar>::Identity(group.embed_dim(), group.embed_dim());
}

/// Coordinates sum_k c^k_{ij} X^i Y^j E_k.
template <typename Scalar>
AlgebraVector<Scalar> bracket(const GroupDescriptor<Scalar>& group, const AlgebraVector<Scalar>& x,
                              const AlgebraVector<Scalar>& y) {
  group.require_dim(x);
  group.require_dim(y);
  return group.structure_constants().contract(x, y);
}

/// Generic scaling-and-squaring Pade matrix exponential. Independent of the
/// closed forms below; the generic realization routes through it.
template <typename Scalar>
MatrixX<Scalar> expm_pade(const MatrixX<Scalar>& a) {
  return a.exp();
}

template <typename Scalar>
GroupElement<Scalar> exp_group(const GroupDescriptor<Scalar>& group, const AlgebraVector<Scalar>& x) {
  group.require_dim(x);
  if (!x.allFinite()) throw NumericError("exp_group: non-finite algebra coordinates");
  switch (group.realization()) {
    case Realization::rotation3:
      return detail::rotation_exp(x);
    case Realization::unit_quaternion:
      return detail::quaternion_exp(x);
    case Realization::heisenberg: {
      const MatrixX<Scalar> a = group.hat(x);
      return identity_element(group) + a + a * a / Scalar(2);
    }
    case Realization::translation:
      return identity_element(group) + group.hat(x);
    case Realization::torus:
      return detail::torus_exp(x);
    case Realization::generic:
      break;
  }
  return expm_pade<Scalar>(group.hat(x));
}

/// Group logarithm with a conditioning flag. Throws BranchError at the cut locus.
template <typename Scalar>
LogResult<Scalar> log_group_diagnosed(const GroupDescriptor<Scalar>& group, const GroupElement<Scalar>& g) {
  group.require_embed(g);
  detail::check_finite(g, "log_group");
  switch (group.realization()) {
    case Realization::rotation3:
      return detail::rotation_log(g);
    case Realization::unit_quaternion:
      return detail::quaternion_log(g);
    case Realization::heisenberg: {
      const MatrixX<Scalar> n = g - identity_element(group);
      return {group.coordinates(n - n * n / Scalar(2)), false};
    }
    case Realization::translation:
      return {group.coordinates(g - identity_element(group)), false};
    case Realization::torus:
      return detail::torus_log(g);
    case Realization::generic:
      break;
  }
  const MatrixX<Scalar> l = g.log();
  LogResult<Scalar> out{group.coordinates(l), false};
  if (!l.allFinite() || group.span_residual(l, out.value) > Scalar(1e-9) * std::max(Scalar(1), l.norm())) {
    throw BranchError("log_group(" + group.name() + "): principal logarithm not in the algebra");
  }
  return out;
}

template <typename Scalar>
AlgebraVector<Scalar> log_group(const GroupDescriptor<Scalar>& group, const GroupElement<Scalar>& g) {
  return log_group_diagnosed(group, g).value;
}

/// Inverse using the structure of the realization (transpose for orthogonal types).
template <typename Scalar>
GroupElement<Scalar> inverse_element(const GroupDescriptor<Scalar>& group, const GroupElement<Scalar>& g) {
  group.require_embed(g);
  switch (group.realization()) {
    case Realization::rotation3:
    case Realization::unit_quaternion:
    case Realization::torus:
      return g.transpose();
    case Realization::heisenberg: {
      const MatrixX<Scalar> n = g - identity_element(group);
      return identity_element(group) - n + n * n;
    }
    case Realization::translation:
      return Scalar(2) * identity_element(group) - g;
    case Realization::generic:
      break;
  }
  return g.partialPivLu().inverse();
}

/// Coordinates of g X g^{-1}.
template <typename Scalar>
AlgebraVector<Scalar> adjoint(const GroupDescriptor<Scalar>& group, const GroupElement<Scalar>& g,
                              const AlgebraVector<Scalar>& x) {
  group.require_embed(g);
  const MatrixX<Scalar> conj = g * group.hat(x) * inverse_element(group, g);
  AlgebraVector<Scalar> out = group.coordinates(conj);
  if (group.span_residual(conj, out) > Scalar(1e-9) * std::max(Scalar(1), conj.norm())) {
    throw RepresentationError("adjoint: conjugated element left the algebra span");
  }
  return out;
}

/// Left-trivialized tangent vector: coordinates of g^{-1} v.
template <typename Scalar>
AlgebraVector<Scalar> maurer_cartan(const GroupDescriptor<Scalar>& group, const GroupElement<Scalar>& g,
                                    const MatrixX<Scalar>& v) {
  group.require_embed(g);
  group.require_embed(v);
  const MatrixX<Scalar> pulled = inverse_element(group, g) * v;
  AlgebraVector<Scalar> out = group.coordinates(pulled);
  if (group.span_residual(pulled, out) > Scalar(1e-9) * std::max(Scalar(1), pulled.norm())) {
    throw TangencyError("maurer_cartan: g^{-1} v is not in the algebra span");
  }
  return out;
}

/// Distance of a matrix from the group, measured in the defining equations.
/// The generic realization has no membership test and reports 0.
template <typename Scalar>
Scalar membership_residual(const GroupDescriptor<Scalar>& group, const MatrixX<Scalar>& g) {
  group.require_embed(g);
  using std::abs;
  const Eigen::Index m = group.embed_dim();
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(m, m);
  switch (group.realization()) {
    case Realization::rotation3:
      return (g.transpose() * g - id).norm() + abs(g.determinant() - Scalar(1));
    case Realization::unit_quaternion: {
      const auto q = detail::quaternion_fit(g);
      return (g - detail::quaternion_left<Scalar>(q)).norm() + abs(q.squaredNorm() - Scalar(1));
    }
    case Realization::heisenberg: {
      Scalar r(0);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) r += abs(g(i, j) - id(i, j));
      return r;
    }
    case Realization::translation: {
      const Eigen::Index n = m - 1;
      return (g.topLeftCorner(n, n) - id.topLeftCorner(n, n)).cwiseAbs().sum() +
             (g.row(n) - id.row(n)).cwiseAbs().sum();
    }
    case Realization::torus: {
      MatrixX<Scalar> off = g;
      Scalar r(0);
      for (Eigen::Index i = 0; i < m / 2; ++i) {
        const MatrixX<Scalar> b = g.template block<2, 2>(2 * i, 2 * i);
        r += (b.transpose() * b - MatrixX<Scalar>::Identity(2, 2)).norm() + abs(b.determinant() - Scalar(1));
        off.template block<2, 2>(2 * i, 2 * i).setZero();
      }
      return r + off.norm();
    }
    case Realization::generic:
      break;
  }
  return Scalar(0);
}

/// Nearest group element to a matrix near the group (drift-off-manifold repair).
///
/// Orthogonal types use the polar factor, SU(2) renormalizes the best-fit
/// quaternion, nilpotent and translation groups reset the constrained entries.
/// Throws ComponentError for the wrong connected component and NumericError
/// if the input is farther than kProjectionReach from the result.
template <typename Scalar>
GroupElement<Scalar> project_to_group(const GroupDescriptor<Scalar>& group, const MatrixX<Scalar>& a) {
  group.require_embed(a);
  detail::check_finite(a, "project_to_group");
  const Eigen::Index m = group.embed_dim();
  MatrixX<Scalar> out = a;
  switch (group.realization()) {
    case Realization::rotation3: {
      if (!(a.determinant() > Scalar(0))) throw ComponentError("project_to_group(so3): det <= 0");
      // Newton iteration for the orthogonal polar factor; quadratic convergence near the group.
      for (int it = 0; it < 30; ++it) {
        const MatrixX<Scalar> next = (out + out.inverse().transpose()) / Scalar(2);
        const Scalar step = (next - out).norm();
        out = next;
        if (step < Scalar(4) * Eigen::NumTraits<Scalar>::epsilon()) break;
      }
      break;
    }
    case Realization::unit_quaternion: {
      auto q = detail::quaternion_fit(a);
      if (!(q.norm() > Scalar(0.5))) throw NumericError("project_to_group(su2): matrix far from unit quaternions");
      q.normalize();
      out = detail::quaternion_left<Scalar>(q);
      break;
    }
    case Realization::heisenberg:
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) out(i, j) = (i == j) ? Scalar(1) : Scalar(0);
      break;
    case Realization::translation: {
      const Eigen::Index n = m - 1;
      out.topLeftCorner(n, n).setIdentity();
      out.row(n).setZero();
      out(n, n) = Scalar(1);
      break;
    }
    case Realization::torus: {
      using std::hypot;
      out.setZero();
      for (Eigen::Index i = 0; i < m / 2; ++i) {
        const auto b = a.template block<2, 2>(2 * i, 2 * i);
        if (!(b.determinant() > Scalar(0))) throw ComponentError("project_to_group(torus): block with det <= 0");
        Scalar c = (b(0, 0) + b(1, 1)) / Scalar(2);
        Scalar s = (b(1, 0) - b(0, 1)) / Scalar(2);
        const Scalar r = hypot(c, s);
        c /= r;
        s /= r;
        out.template block<2, 2>(2 * i, 2 * i) << c, -s, s, c;
      }
      break;
    }
    case Realization::generic:
      return out;
  }
  if ((out - a).norm() > Scalar(kProjectionReach)) {
    throw NumericError("project_to_group(" + group.name() + "): input farther than 0.1 from the group");
  }
  return out;
}

}  // namespace skewlie
