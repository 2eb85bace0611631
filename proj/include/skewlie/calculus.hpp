#pragma once

#include <Eigen/Dense>
#include <functional>

#include "skewlie/connections.hpp"
#include "skewlie/paths.hpp"

namespace skewlie {

using Connection = ConnectionFunction<double>;

/// Real-valued path starting at 0: the output of every integral estimator.
struct RealPath {
  TimeGrid grid;
  Eigen::VectorXd values;  // N + 1 entries, values(0) == 0
};

/// x -> theta(x), a 1-form on the algebra with optional analytic Jacobian
/// J(i, j) = d_i theta_j.
struct CovectorField {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  bool constant = false;
  bool allow_finite_difference = true;

  static CovectorField constant_field(Eigen::VectorXd theta);
  /// theta(x) = A x + b
  static CovectorField affine(Eigen::MatrixXd a, Eigen::VectorXd b);
  static CovectorField from_function(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value,
                                     std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian = {},
                                     bool allow_finite_difference = true);

  /// Analytic Jacobian when supplied, else central differences with step 1e-5 * scale.
  Eigen::MatrixXd derivative(const Eigen::VectorXd& x) const;
};

/// x -> b_ij(x)
struct BilinearField {
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> value;

  static BilinearField constant_field(Eigen::MatrixXd b);
};

BilinearField symmetrize(const BilinearField& b);

/// Midpoint rule: sum_k theta((Y_k + Y_{k+1})/2) . Delta Y_k.
RealPath stratonovich_integral(const CovectorField& theta, const AlgebraPath& path);

/// Left-point rule: sum_k b(Y_k)(Delta Y_k, Delta Y_k).
RealPath quadratic_integral(const BilinearField& b, const AlgebraPath& path);

/// (nabla theta)_ij(x) = d_i theta_j(x) - theta(x)(alpha(E_i, E_j)).
Eigen::MatrixXd covariant_derivative(const CovectorField& theta, const Connection& alpha, const Eigen::VectorXd& x);

/// Ito integral through the conversion formula:
/// stratonovich(theta) - 1/2 quadratic(nabla theta).
RealPath ito_integral(const CovectorField& theta, const AlgebraPath& path, const Connection& alpha);

/// Ito integral on G of the left-invariant form theta_e o omega_G, reduced to the
/// left-point sum of theta_e over the stochastic-logarithm increments. Only valid
/// for skew-symmetric alpha; anything else raises ContractViolation.
RealPath group_ito_integral(const Group& group, const Eigen::VectorXd& theta_e, const GroupPath& path,
                            const Connection& alpha);
/// Same, on an already computed logarithm path.
RealPath group_ito_integral(const Eigen::VectorXd& theta_e, const AlgebraPath& log_path, const Connection& alpha);

/// Realized covariation sum_k Delta Y^i_k Delta Y^j_k, cumulatively.
RealPath quadratic_covariation(const AlgebraPath& path, Eigen::Index i, Eigen::Index j);

}  // namespace skewlie
