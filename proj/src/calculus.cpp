#include "skewlie/calculus.hpp"

#include <cmath>
#include <string>

#include "skewlie/errors.hpp"

namespace skewlie {

CovectorField CovectorField::constant_field(Eigen::VectorXd theta) {
  CovectorField f;
  const Eigen::Index n = theta.size();
  f.value = [theta = std::move(theta)](const Eigen::VectorXd&) { return theta; };
  f.jacobian = [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(n, n).eval(); };
  f.constant = true;
  return f;
}

CovectorField CovectorField::affine(Eigen::MatrixXd a, Eigen::VectorXd b) {
  if (a.rows() != b.size() || a.cols() != b.size()) throw DimensionError("CovectorField::affine: shape mismatch");
  CovectorField f;
  const Eigen::MatrixXd jac = a.transpose();  // d_i theta_j = A(j, i)
  f.value = [a = std::move(a), b = std::move(b)](const Eigen::VectorXd& x) { return (a * x + b).eval(); };
  f.jacobian = [jac](const Eigen::VectorXd&) { return jac; };
  return f;
}

CovectorField CovectorField::from_function(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value,
                                           std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian,
                                           bool allow_finite_difference) {
  CovectorField f;
  f.value = std::move(value);
  f.jacobian = std::move(jacobian);
  f.allow_finite_difference = allow_finite_difference;
  return f;
}

Eigen::MatrixXd CovectorField::derivative(const Eigen::VectorXd& x) const {
  if (jacobian) return jacobian(x);
  if (!allow_finite_difference) {
    throw PreconditionError("covector field has no analytic derivative and finite differences are disabled");
  }
  const Eigen::Index n = x.size();
  const double h = 1e-5 * std::max(1.0, x.cwiseAbs().maxCoeff());
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    jac.row(i) = ((value(xp) - value(xm)) / (2.0 * h)).transpose();
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return jac;
}

BilinearField BilinearField::constant_field(Eigen::MatrixXd b) {
  return {[b = std::move(b)](const Eigen::VectorXd&) { return b; }};
}

BilinearField symmetrize(const BilinearField& b) {
  return {[b](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd m = b.value(x);
    return (0.5 * (m + m.transpose())).eval();
  }};
}

namespace {

RealPath zero_path(const TimeGrid& grid) { return {grid, Eigen::VectorXd::Zero(grid.steps() + 1)}; }

void require_connection_matches(const Connection& alpha, const AlgebraPath& path) {
  if (alpha.dim() != path.dim() || (!path.group.empty() && alpha.group_name() != path.group)) {
    throw DimensionError("connection on '" + alpha.group_name() + "' used with a path on '" + path.group + "'");
  }
}

}  // namespace

RealPath stratonovich_integral(const CovectorField& theta, const AlgebraPath& path) {
  RealPath out = zero_path(path.grid);
  for (std::int64_t k = 0; k < path.grid.steps(); ++k) {
    const Eigen::VectorXd mid = 0.5 * (path.values.col(k) + path.values.col(k + 1));
    out.values(k + 1) = out.values(k) + theta.value(mid).dot(path.values.col(k + 1) - path.values.col(k));
  }
  return out;
}

namespace {

// d^T b d through the symmetric part of b only: an antisymmetric b gives exactly 0.
double symmetric_form(const Eigen::MatrixXd& b, const Eigen::VectorXd& d) {
  const Eigen::Index n = d.size();
  if (b.rows() != n || b.cols() != n) throw DimensionError("quadratic_integral: bilinear field dimension");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += b(i, i) * d(i) * d(i);
    for (Eigen::Index j = i + 1; j < n; ++j) acc += (b(i, j) + b(j, i)) * d(i) * d(j);
  }
  return acc;
}

}  // namespace

RealPath quadratic_integral(const BilinearField& b, const AlgebraPath& path) {
  RealPath out = zero_path(path.grid);
  for (std::int64_t k = 0; k < path.grid.steps(); ++k) {
    const Eigen::VectorXd d = path.values.col(k + 1) - path.values.col(k);
    out.values(k + 1) = out.values(k) + symmetric_form(b.value(path.values.col(k)), d);
  }
  return out;
}

Eigen::MatrixXd covariant_derivative(const CovectorField& theta, const Connection& alpha, const Eigen::VectorXd& x) {
  const Eigen::Index n = alpha.dim();
  if (x.size() != n) throw DimensionError("covariant_derivative: point dimension");
  const Eigen::VectorXd th = theta.value(x);
  Eigen::MatrixXd out = theta.constant ? Eigen::MatrixXd::Zero(n, n) : theta.derivative(x);
  const auto& a = alpha.coeffs();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) acc += th(k) * a(k, i, j);
      out(i, j) -= acc;
    }
  return out;
}

RealPath ito_integral(const CovectorField& theta, const AlgebraPath& path, const Connection& alpha) {
  require_connection_matches(alpha, path);
  const RealPath strat = stratonovich_integral(theta, path);
  const BilinearField nabla{[&](const Eigen::VectorXd& x) { return covariant_derivative(theta, alpha, x); }};
  const RealPath quad = quadratic_integral(nabla, path);
  return {path.grid, strat.values - 0.5 * quad.values};
}

RealPath group_ito_integral(const Group& group, const Eigen::VectorXd& theta_e, const GroupPath& path,
                            const Connection& alpha) {
  alpha.require_group(group);
  if (!is_skew_symmetric(alpha)) {
    throw ContractViolation("group_ito_integral: connection function is not skew-symmetric");
  }
  return group_ito_integral(theta_e, stochastic_logarithm(group, path), alpha);
}

RealPath group_ito_integral(const Eigen::VectorXd& theta_e, const AlgebraPath& log_path, const Connection& alpha) {
  require_connection_matches(alpha, log_path);
  if (!is_skew_symmetric(alpha)) {
    throw ContractViolation("group_ito_integral: connection function is not skew-symmetric");
  }
  if (theta_e.size() != log_path.dim()) throw DimensionError("group_ito_integral: covector length");
  RealPath out = zero_path(log_path.grid);
  for (std::int64_t k = 0; k < log_path.grid.steps(); ++k) {
    out.values(k + 1) = out.values(k) + theta_e.dot(log_path.values.col(k + 1) - log_path.values.col(k));
  }
  return out;
}

RealPath quadratic_covariation(const AlgebraPath& path, Eigen::Index i, Eigen::Index j) {
  if (i < 0 || j < 0 || i >= path.dim() || j >= path.dim()) {
    throw DimensionError("quadratic_covariation: index out of range");
  }
  RealPath out = zero_path(path.grid);
  for (std::int64_t k = 0; k < path.grid.steps(); ++k) {
    out.values(k + 1) =
        out.values(k) + (path.values(i, k + 1) - path.values(i, k)) * (path.values(j, k + 1) - path.values(j, k));
  }
  return out;
}

}  // namespace skewlie
