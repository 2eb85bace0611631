#include "skewlie/harmonic.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "skewlie/ensemble.hpp"
#include "skewlie/errors.hpp"
#include "skewlie/lie_core.hpp"
#include "skewlie/registry.hpp"

namespace skewlie {
namespace {

Eigen::VectorXd unit_vector(Eigen::Index n, Eigen::Index i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

// log(a^{-1} b), with chart failures reported as step errors.
Eigen::VectorXd log_chart(const Group& group, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  try {
    return log_group(group, Eigen::MatrixXd(inverse_element(group, a) * b));
  } catch (const BranchError& e) {
    throw StepError(std::string("finite-difference step left the log chart: ") + e.what());
  }
}

std::vector<Eigen::VectorXd> pullback_fd(const SmoothMap& map, const Eigen::VectorXd& x, double h, Derivative mode) {
  const int n = map.source.dim;
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(n));
  const Eigen::MatrixXd fx = mode == Derivative::forward ? map.eval(x) : Eigen::MatrixXd();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd step = h * unit_vector(n, i);
    if (mode == Derivative::forward) {
      out.push_back(log_chart(map.target, fx, map.eval(x + step)) / h);
    } else {
      out.push_back(log_chart(map.target, map.eval(x - step), map.eval(x + step)) / (2.0 * h));
    }
  }
  return out;
}

void require_source_point(const SmoothMap& map, const Eigen::VectorXd& x) {
  if (x.size() != map.source.dim) throw DimensionError("map '" + map.name + "': source point dimension");
}

Eigen::VectorXd divergence_central(const std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)>& pull,
                                   int n, Eigen::Index target_dim, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd div = Eigen::VectorXd::Zero(target_dim);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd step = h * unit_vector(n, i);
    div += (pull(x + step)[static_cast<std::size_t>(i)] - pull(x - step)[static_cast<std::size_t>(i)]) / (2.0 * h);
  }
  return div;
}

}  // namespace

std::vector<Eigen::VectorXd> pullback_maurer_cartan(const SmoothMap& map, const Eigen::VectorXd& x, double h,
                                                    Derivative mode) {
  require_source_point(map, x);
  if (mode == Derivative::analytic) {
    if (!map.analytic_pullback) throw PreconditionError("map '" + map.name + "' has no analytic pullback");
    return map.analytic_pullback(x);
  }
  if (!(h > 0.0)) throw PreconditionError("pullback_maurer_cartan: step must be positive");
  if (mode == Derivative::richardson) {
    auto coarse = pullback_fd(map, x, h, Derivative::central);
    const auto fine = pullback_fd(map, x, 0.5 * h, Derivative::central);
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    return coarse;
  }
  return pullback_fd(map, x, h, mode);
}

Eigen::VectorXd codifferential(const SmoothMap& map, const Eigen::VectorXd& x, double h, Derivative mode) {
  require_source_point(map, x);
  const int n = map.source.dim;
  const Eigen::Index m = map.target.dim();
  if (mode == Derivative::analytic) {
    if (map.analytic_codifferential) return map.analytic_codifferential(x);
    if (!map.analytic_pullback) throw PreconditionError("map '" + map.name + "' has no analytic derivatives");
    return -divergence_central(map.analytic_pullback, n, m, x, h);
  }
  if (mode == Derivative::richardson) {
    const Eigen::VectorXd coarse = codifferential(map, x, h, Derivative::central);
    const Eigen::VectorXd fine = codifferential(map, x, 0.5 * h, Derivative::central);
    return (4.0 * fine - coarse) / 3.0;
  }
  const auto pull = [&](const Eigen::VectorXd& p) { return pullback_maurer_cartan(map, p, h, mode); };
  return -divergence_central(pull, n, m, x, h);
}

Eigen::VectorXd tension_field(const SmoothMap& map, const Eigen::VectorXd& x, const Connection& alpha, double h,
                              Derivative mode) {
  alpha.require_group(map.target);
  Eigen::VectorXd tau = -codifferential(map, x, h, mode);
  for (const auto& a : pullback_maurer_cartan(map, x, h, mode)) tau += evaluate_alpha(alpha, a, a);
  return tau;
}

PluzhnikovResult pluzhnikov_check(const SmoothMap& map, const std::vector<Eigen::VectorXd>& lattice, double tol,
                                  double h, Derivative mode) {
  PluzhnikovResult r;
  bool any_error = false;
  for (const auto& x : lattice) {
    r.points.push_back(x);
    try {
      const Eigen::VectorXd res = codifferential(map, x, h, mode);
      r.max_residual = std::max(r.max_residual, res.norm());
      r.residuals.push_back(res);
      r.errors.emplace_back();
    } catch (const StepError& e) {
      any_error = true;
      r.residuals.push_back(Eigen::VectorXd::Constant(map.target.dim(), std::numeric_limits<double>::quiet_NaN()));
      r.errors.emplace_back(e.what());
    }
  }
  r.harmonic = !any_error && r.max_residual <= tol;
  return r;
}

void write_residual_csv(std::ostream& os, const PluzhnikovResult& result) {
  if (result.points.empty()) return;
  const Eigen::Index n = result.points.front().size();
  const Eigen::Index m = result.residuals.front().size();
  for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << 'x' << i;
  for (Eigen::Index i = 0; i < m; ++i) os << ",r" << i;
  os << ",error\n";
  os.precision(17);
  for (std::size_t p = 0; p < result.points.size(); ++p) {
    for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << result.points[p](i);
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << result.residuals[p](i);
    os << ',' << result.errors[p] << '\n';
  }
}

namespace {

std::vector<CheckpointSamples> make_component_samples(std::size_t paths, Eigen::Index dim,
                                                      const std::vector<double>& times) {
  std::vector<CheckpointSamples> s;
  for (Eigen::Index i = 0; i < dim; ++i) {
    s.push_back({times, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(times.size()))});
  }
  return s;
}

// Group Ito integrals of every basis covector along a (logarithm) path, recorded at the checkpoints.
void record_covector_integrals(std::vector<CheckpointSamples>& samples, std::size_t index, const AlgebraPath& log_path,
                               const Connection& alpha) {
  const Eigen::Index n = log_path.dim();
  for (Eigen::Index c = 0; c < n; ++c) {
    const RealPath integral = group_ito_integral(unit_vector(n, c), log_path, alpha);
    auto& s = samples[static_cast<std::size_t>(c)];
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      s.values(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(k)) =
          integral.values(log_path.grid.index_of(s.times[k]));
    }
  }
}

TestReport battery_report(std::string name, const std::vector<CheckpointSamples>& samples, double z_max,
                          const TimeGrid& grid, std::size_t paths, std::uint64_t seed) {
  std::vector<TestReport> parts;
  Eigen::VectorXd rate(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t c = 0; c < samples.size(); ++c) {
    parts.push_back(martingale_drift_test(samples[c], z_max, "covector_e" + std::to_string(c)));
    rate(static_cast<Eigen::Index>(c)) = samples[c].values.col(samples[c].values.cols() - 1).mean() / grid.horizon();
  }
  const Provenance prov{static_cast<std::uint64_t>(paths), grid.horizon(), grid.steps(), seed};
  TestReport r = combine_reports(std::move(name), std::move(parts), prov);
  r.thresholds = {{"z_max", z_max}};
  for (Eigen::Index c = 0; c < rate.size(); ++c) r.metrics.emplace_back("drift_rate_" + std::to_string(c), rate(c));
  r.metrics.emplace_back("drift_rate_norm", rate.norm());
  return r;
}

template <typename RunOnce>
TestReport with_refinement(const MonteCarloSettings& settings, RunOnce&& run_once) {
  TimeGrid grid = settings.grid;
  for (int attempt = 0;; ++attempt) {
    try {
      return run_once(grid);
    } catch (const BranchError& e) {
      if (attempt >= settings.max_refinements) {
        throw NumericError(std::string("injectivity radius still violated after grid refinement: ") + e.what());
      }
      grid = TimeGrid(grid.horizon(), 2 * grid.steps());
    }
  }
}

}  // namespace

TestReport harmonicity_monte_carlo(const SmoothMap& map, const Connection& alpha, const MonteCarloSettings& settings) {
  alpha.require_group(map.target);
  if (!is_skew_symmetric(alpha)) throw ContractViolation("harmonicity_monte_carlo: connection must be skew-symmetric");
  if (map.base_point.size() != map.source.dim) throw DimensionError("map '" + map.name + "': base point dimension");
  const Group& group = map.target;
  const auto times = default_checkpoints(settings.grid.horizon());
  return with_refinement(settings, [&](const TimeGrid& grid) {
    auto samples = make_component_samples(settings.ensemble_size, group.dim(), times);
    const Eigen::MatrixXd base_inverse = inverse_element(group, map.eval(map.base_point));
    const double scale = std::sqrt(grid.dt());
    for_each_path(settings.ensemble_size, settings.threads, [&](std::size_t p) {
      const NoiseSpec noise{settings.seed, static_cast<std::uint64_t>(p)};
      GroupPath image{grid, {}, group.name(), noise};
      image.values.reserve(static_cast<std::size_t>(grid.steps() + 1));
      image.values.push_back(identity_element(group));
      Eigen::VectorXd point = map.base_point;
      Eigen::VectorXd xi(map.source.dim);
      for (std::int64_t k = 0; k < grid.steps(); ++k) {
        standard_normals(noise, kStreamIncrements, static_cast<std::uint64_t>(k), xi);
        point += scale * xi;
        image.values.push_back(base_inverse * map.eval(point));
      }
      record_covector_integrals(samples, p, stochastic_logarithm(group, image), alpha);
    });
    TestReport r = battery_report("harmonicity_monte_carlo:" + map.name, samples, settings.z_max, grid,
                                  settings.ensemble_size, settings.seed);
    return r;
  });
}

HomomorphismDefect homomorphism_defect(const GroupHomomorphism& phi, std::uint64_t seed, int samples) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto random_element = [&](const Group& g) {
    Eigen::VectorXd x(g.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    x *= 0.8 / std::max(1.0, x.norm());
    return exp_group(g, x);
  };
  HomomorphismDefect d;
  for (int s = 0; s < samples; ++s) {
    const Eigen::MatrixXd g = random_element(phi.domain), h = random_element(phi.domain);
    d.multiplicativity = std::max(d.multiplicativity, (phi.eval(g * h) - phi.eval(g) * phi.eval(h)).norm());
  }
  const double t = 1e-5;
  for (Eigen::Index i = 0; i < phi.domain.dim(); ++i) {
    const Eigen::VectorXd e = unit_vector(phi.domain.dim(), i);
    const Eigen::VectorXd plus = log_group(phi.codomain, phi.eval(exp_group(phi.domain, Eigen::VectorXd(t * e))));
    const Eigen::VectorXd minus = log_group(phi.codomain, phi.eval(exp_group(phi.domain, Eigen::VectorXd(-t * e))));
    d.differential = std::max(d.differential, ((plus - minus) / (2.0 * t) - phi.differential.col(i)).norm());
  }
  return d;
}

Eigen::VectorXd homomorphism_naturality_check(const GroupHomomorphism& phi, const GroupPath& path, LogScheme scheme) {
  GroupPath image{path.grid, {}, phi.codomain.name(), path.noise};
  image.values.reserve(path.values.size());
  for (const auto& g : path.values) image.values.push_back(phi.eval(g));
  const AlgebraPath log_domain = stochastic_logarithm(phi.domain, path, scheme);
  const AlgebraPath log_image = stochastic_logarithm(phi.codomain, image, scheme);
  Eigen::VectorXd d(path.grid.steps() + 1);
  for (std::int64_t k = 0; k <= path.grid.steps(); ++k) {
    d(k) = (log_image.values.col(k) - phi.differential * log_domain.values.col(k)).norm();
  }
  return d;
}

double commutation_residual(const GroupHomomorphism& phi, const Connection& alpha_h, const Connection& alpha_g) {
  alpha_h.require_group(phi.domain);
  alpha_g.require_group(phi.codomain);
  const Eigen::Index n = phi.domain.dim();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::VectorXd ei = unit_vector(n, i), ej = unit_vector(n, j);
      const Eigen::VectorXd lhs = phi.differential * evaluate_alpha(alpha_h, ei, ej);
      const Eigen::VectorXd rhs =
          evaluate_alpha(alpha_g, Eigen::VectorXd(phi.differential * ei), Eigen::VectorXd(phi.differential * ej));
      worst = std::max(worst, (lhs - rhs).norm());
    }
  return worst;
}

void require_commutation(const GroupHomomorphism& phi, const Connection& alpha_h, const Connection& alpha_g,
                         double tol) {
  const double r = commutation_residual(phi, alpha_h, alpha_g);
  if (!(r <= tol)) {
    throw PreconditionError("homomorphism '" + phi.name + "': differential does not commute with the connection " +
                            "functions (residual " + std::to_string(r) + ")");
  }
}

TestReport homomorphism_harmonicity_experiment(const GroupHomomorphism& phi, const Connection& alpha_h,
                                               const Connection& alpha_g, const MonteCarloSettings& settings) {
  if (!is_skew_symmetric(alpha_h) || !is_skew_symmetric(alpha_g)) {
    throw ContractViolation("homomorphism experiment: connection functions must be skew-symmetric");
  }
  require_commutation(phi, alpha_h, alpha_g);
  if (!phi.domain.admits_biinvariant_metric()) {
    throw UnsupportedGroupError("homomorphism experiment: domain '" + phi.domain.name() +
                                "' has no bi-invariant metric to sample Brownian motion");
  }
  const auto times = default_checkpoints(settings.grid.horizon());
  return with_refinement(settings, [&](const TimeGrid& grid) {
    auto samples = make_component_samples(settings.ensemble_size, phi.codomain.dim(), times);
    for_each_path(settings.ensemble_size, settings.threads, [&](std::size_t p) {
      const GroupPath x = sample_group_bm(phi.domain, grid, {settings.seed, static_cast<std::uint64_t>(p)});
      GroupPath image{grid, {}, phi.codomain.name(), x.noise};
      image.values.reserve(x.values.size());
      for (const auto& g : x.values) image.values.push_back(phi.eval(g));
      record_covector_integrals(samples, p, stochastic_logarithm(phi.codomain, image), alpha_g);
    });
    return battery_report("homomorphism_harmonicity:" + phi.name, samples, settings.z_max, grid,
                          settings.ensemble_size, settings.seed);
  });
}

// ---------------------------------------------------------------------------
// Registries

Eigen::Vector3d corpus_xi() { return {0.48, -0.6, 0.64}; }
Eigen::Vector3d corpus_a() { return {0.9, 0.3, -0.2}; }
Eigen::Vector3d corpus_b() { return {-0.1, 0.5, 0.7}; }

namespace {

// Rotation of v about the axis of w by |w| (Rodrigues' vector form).
Eigen::Vector3d rotate(const Eigen::Vector3d& w, const Eigen::Vector3d& v) {
  const double theta = w.norm();
  if (theta == 0.0) return v;
  const Eigen::Vector3d k = w / theta;
  return v * std::cos(theta) + k.cross(v) * std::sin(theta) + k * k.dot(v) * (1.0 - std::cos(theta));
}

std::vector<Eigen::VectorXd> line_lattice(double lo, double hi, int count) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < count; ++i) {
    pts.push_back(Eigen::VectorXd::Constant(1, lo + (hi - lo) * i / (count - 1)));
  }
  return pts;
}

std::vector<Eigen::VectorXd> square_lattice(double lo, double hi, int count) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXd p(2);
      p << lo + (hi - lo) * i / (count - 1), lo + (hi - lo) * j / (count - 1);
      pts.push_back(p);
    }
  return pts;
}

// F(x) = exp(f(x) xi) into SO(3) for a polynomial f with derivatives df, d2f.
SmoothMap scalar_curve(std::string name, std::function<double(double)> f, std::function<double(double)> df,
                       std::function<double(double)> d2f) {
  const Group so3 = make_so3();
  const Eigen::VectorXd xi = corpus_xi();
  SmoothMap m{std::move(name), {1, false, 0.0}, so3, {}, {}, {}, Eigen::VectorXd::Zero(1), line_lattice(-1.0, 1.0, 9)};
  m.eval = [so3, xi, f](const Eigen::VectorXd& x) { return exp_group(so3, Eigen::VectorXd(f(x(0)) * xi)); };
  m.analytic_pullback = [xi, df](const Eigen::VectorXd& x) {
    return std::vector<Eigen::VectorXd>{df(x(0)) * xi};
  };
  m.analytic_codifferential = [xi, d2f](const Eigen::VectorXd& x) { return Eigen::VectorXd(-d2f(x(0)) * xi); };
  return m;
}

}  // namespace

std::vector<std::string> map_names() {
  return {"exp_x_so3", "exp_xsq_so3", "exp_xA_yB_so3", "exp_xcube_so3", "id_r1", "id_torus2"};
}

std::vector<std::string> pluzhnikov_corpus() { return {"exp_x_so3", "exp_xsq_so3", "exp_xA_yB_so3"}; }

SmoothMap make_map(const std::string& name) {
  if (name == "exp_x_so3") {
    return scalar_curve(
        name, [](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; });
  }
  if (name == "exp_xsq_so3") {
    return scalar_curve(
        name, [](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; });
  }
  if (name == "exp_xcube_so3") {
    return scalar_curve(
        name, [](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; },
        [](double x) { return 6.0 * x; });
  }
  if (name == "exp_xA_yB_so3") {
    const Group so3 = make_so3();
    const Eigen::Vector3d a = corpus_a(), b = corpus_b();
    SmoothMap m{name, {2, false, 0.0}, so3, {}, {}, {}, Eigen::VectorXd::Zero(2), square_lattice(-1.0, 1.0, 5)};
    m.eval = [so3, a, b](const Eigen::VectorXd& x) {
      return Eigen::MatrixXd(exp_group(so3, Eigen::VectorXd(x(0) * a)) * exp_group(so3, Eigen::VectorXd(x(1) * b)));
    };
    // F^{-1} d_x F = Ad(exp(-yB)) A, F^{-1} d_y F = B.
    m.analytic_pullback = [a, b](const Eigen::VectorXd& x) {
      return std::vector<Eigen::VectorXd>{rotate(-x(1) * b, a), b};
    };
    m.analytic_codifferential = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(3).eval(); };
    return m;
  }
  if (name == "id_r1") {
    const Group r1 = make_rn(1);
    SmoothMap m{name, {1, false, 0.0}, r1, {}, {}, {}, Eigen::VectorXd::Zero(1), line_lattice(-1.0, 1.0, 9)};
    m.eval = [r1](const Eigen::VectorXd& x) { return exp_group(r1, x); };
    m.analytic_pullback = [](const Eigen::VectorXd&) {
      return std::vector<Eigen::VectorXd>{Eigen::VectorXd::Ones(1)};
    };
    m.analytic_codifferential = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1).eval(); };
    return m;
  }
  if (name == "id_torus2") {
    const Group t2 = make_torus(2);
    const double period = 2.0 * EIGEN_PI;
    SmoothMap m{name, {2, true, period}, t2, {}, {}, {}, Eigen::VectorXd::Zero(2), square_lattice(0.0, period, 5)};
    m.eval = [t2](const Eigen::VectorXd& x) { return exp_group(t2, x); };
    m.analytic_pullback = [](const Eigen::VectorXd&) {
      return std::vector<Eigen::VectorXd>{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
    };
    m.analytic_codifferential = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2).eval(); };
    return m;
  }
  throw RegistryError("unknown map '" + name + "'");
}

std::vector<std::string> homomorphism_names() { return {"su2_to_so3", "identity_so3", "double_r1", "r1_to_so3"}; }

GroupHomomorphism make_homomorphism(const std::string& name) {
  if (name == "su2_to_so3") {
    // Rotation v -> q v q* of the unit quaternion fitted to the 4x4 matrix.
    return {name, make_su2(), make_so3(),
            [](const Eigen::MatrixXd& g) {
              Eigen::Vector4d q = detail::quaternion_fit<double>(g);
              q.normalize();
              const double w = q(0), x = q(1), y = q(2), z = q(3);
              Eigen::MatrixXd r(3, 3);
              r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
                  2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
                  2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
              return r;
            },
            Eigen::MatrixXd::Identity(3, 3)};
  }
  if (name == "identity_so3") {
    return {name, make_so3(), make_so3(), [](const Eigen::MatrixXd& g) { return g; }, Eigen::MatrixXd::Identity(3, 3)};
  }
  if (name == "double_r1") {
    // x -> 2x; scaling by a power of two is exact in floating point.
    return {name, make_rn(1), make_rn(1),
            [](const Eigen::MatrixXd& g) {
              Eigen::MatrixXd out = g;
              out(0, 1) = 2.0 * g(0, 1);
              return out;
            },
            Eigen::MatrixXd::Constant(1, 1, 2.0)};
  }
  if (name == "r1_to_so3") {
    const Group so3 = make_so3();
    const Eigen::Vector3d xi = corpus_xi();
    return {name, make_rn(1), so3,
            [so3, xi](const Eigen::MatrixXd& g) { return exp_group(so3, Eigen::VectorXd(g(0, 1) * xi)); },
            Eigen::MatrixXd(xi)};
  }
  throw RegistryError("unknown homomorphism '" + name + "'");
}

}  // namespace skewlie
