#pragma once

#include <limits>
#include <string>
#include <vector>

#include "skewlie/group.hpp"
#include "skewlie/lie_core.hpp"

namespace skewlie {

namespace detail {

template <typename Scalar>
Tensor3<Scalar> levi_civita_symbol() {
  Tensor3<Scalar> c(3);
  c(2, 0, 1) = Scalar(1);
  c(2, 1, 0) = Scalar(-1);
  c(0, 1, 2) = Scalar(1);
  c(0, 2, 1) = Scalar(-1);
  c(1, 2, 0) = Scalar(1);
  c(1, 0, 2) = Scalar(-1);
  return c;
}

template <typename Scalar>
MatrixX<Scalar> unit(Eigen::Index m, Eigen::Index i, Eigen::Index j) {
  MatrixX<Scalar> e = MatrixX<Scalar>::Zero(m, m);
  e(i, j) = Scalar(1);
  return e;
}

}  // namespace detail

/// SO(3) with [E1,E2]=E3 (cyclic). The metric is the negative Killing form
/// rescaled by 1/2, which makes {E_i} orthonormal.
template <typename Scalar = double>
GroupDescriptor<Scalar> make_so3() {
  using detail::unit;
  std::vector<MatrixX<Scalar>> basis = {
      unit<Scalar>(3, 2, 1) - unit<Scalar>(3, 1, 2),
      unit<Scalar>(3, 0, 2) - unit<Scalar>(3, 2, 0),
      unit<Scalar>(3, 1, 0) - unit<Scalar>(3, 0, 1),
  };
  return GroupDescriptor<Scalar>("so3", Realization::rotation3, std::move(basis), MatrixX<Scalar>::Identity(3, 3),
                                 true, detail::pi<Scalar>(), detail::levi_civita_symbol<Scalar>());
}

/// SU(2) as left multiplication by unit quaternions on R^4, with the halved
/// basis E_a = L(e_a)/2 so that the structure constants coincide with so(3)
/// and the covering SU(2) -> SO(3) has identity differential. In these
/// coordinates the cut locus of log sits at |X| = 2 pi.
template <typename Scalar = double>
GroupDescriptor<Scalar> make_su2() {
  std::vector<MatrixX<Scalar>> basis;
  for (int a = 1; a <= 3; ++a) {
    Eigen::Matrix<Scalar, 4, 1> q = Eigen::Matrix<Scalar, 4, 1>::Zero();
    q(a) = Scalar(1);
    basis.push_back(detail::quaternion_left<Scalar>(q) / Scalar(2));
  }
  return GroupDescriptor<Scalar>("su2", Realization::unit_quaternion, std::move(basis),
                                 MatrixX<Scalar>::Identity(3, 3), true, Scalar(2) * detail::pi<Scalar>(),
                                 detail::levi_civita_symbol<Scalar>());
}

/// Heisenberg group of upper unitriangular 3x3 matrices, [E1,E2]=E3.
/// Nilpotent and non-compact: no bi-invariant metric.
template <typename Scalar = double>
GroupDescriptor<Scalar> make_heis3() {
  using detail::unit;
  std::vector<MatrixX<Scalar>> basis = {unit<Scalar>(3, 0, 1), unit<Scalar>(3, 1, 2), unit<Scalar>(3, 0, 2)};
  Tensor3<Scalar> c(3);
  c(2, 0, 1) = Scalar(1);
  c(2, 1, 0) = Scalar(-1);
  return GroupDescriptor<Scalar>("heis3", Realization::heisenberg, std::move(basis), MatrixX<Scalar>::Identity(3, 3),
                                 false, std::numeric_limits<Scalar>::infinity(), c);
}

/// R^n realized as affine translations [[I, x], [0, 1]].
template <typename Scalar = double>
GroupDescriptor<Scalar> make_rn(int n) {
  std::vector<MatrixX<Scalar>> basis;
  for (int i = 0; i < n; ++i) basis.push_back(detail::unit<Scalar>(n + 1, i, n));
  return GroupDescriptor<Scalar>("r" + std::to_string(n), Realization::translation, std::move(basis),
                                 MatrixX<Scalar>::Identity(n, n), true, std::numeric_limits<Scalar>::infinity(),
                                 Tensor3<Scalar>(n));
}

/// Flat torus T^n as block-diagonal rotations; log is single-valued for angles in (-pi, pi).
template <typename Scalar = double>
GroupDescriptor<Scalar> make_torus(int n) {
  std::vector<MatrixX<Scalar>> basis;
  for (int i = 0; i < n; ++i) {
    basis.push_back(detail::unit<Scalar>(2 * n, 2 * i + 1, 2 * i) - detail::unit<Scalar>(2 * n, 2 * i, 2 * i + 1));
  }
  return GroupDescriptor<Scalar>("torus" + std::to_string(n), Realization::torus, std::move(basis),
                                 MatrixX<Scalar>::Identity(n, n), true, detail::pi<Scalar>(), Tensor3<Scalar>(n));
}

inline std::vector<std::string> group_names() {
  return {"so3", "su2", "heis3", "r1", "r2", "r3", "r4", "torus1", "torus2", "torus3", "torus4"};
}

/// Look up a registered group by name. Throws RegistryError on a miss.
template <typename Scalar = double>
GroupDescriptor<Scalar> make_group(const std::string& name) {
  if (name == "so3") return make_so3<Scalar>();
  if (name == "su2") return make_su2<Scalar>();
  if (name == "heis3") return make_heis3<Scalar>();
  for (int n = 1; n <= 4; ++n) {
    if (name == "r" + std::to_string(n)) return make_rn<Scalar>(n);
    if (name == "torus" + std::to_string(n)) return make_torus<Scalar>(n);
  }
  throw RegistryError("unknown group '" + name + "'");
}

}  // namespace skewlie
