#include "skewlie/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "skewlie/ensemble.hpp"
#include "skewlie/errors.hpp"
#include "skewlie/harmonic.hpp"
#include "skewlie/lie_core.hpp"
#include "skewlie/registry.hpp"

namespace skewlie {

std::vector<std::string> experiment_names() {
  return {"theorem1", "theorem2", "levy", "naturality", "homomorphism", "pluzhnikov", "convergence"};
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void reject_unknown(const nlohmann::json& table, const std::vector<std::string>& allowed, const std::string& where) {
  if (!table.is_object()) throw ConfigError("config '" + where + "' must be a table");
  for (const auto& [k, v] : table.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("unknown config key '" + (where.empty() ? k : where + "." + k) + "'");
    }
  }
}

bool uses_group(const std::string& e) { return e == "theorem1" || e == "theorem2" || e == "levy" || e == "convergence"; }
bool uses_map(const std::string& e) { return e == "pluzhnikov" || e == "convergence"; }
bool uses_homomorphism(const std::string& e) {
  return e == "naturality" || e == "homomorphism" || e == "convergence";
}

Eigen::VectorXd unit_vector(Eigen::Index n, Eigen::Index i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

Provenance provenance_of(const ExperimentConfig& cfg, std::int64_t steps) {
  return {cfg.ensemble_size, cfg.horizon, steps, *cfg.seed};
}

// ---------------------------------------------------------------------------

// Algebra path fed to the martingale and Levy batteries for path number i.
AlgebraPath theorem_path(const ExperimentConfig& cfg, const Group& group, const TimeGrid& grid, std::size_t i) {
  const NoiseSpec noise{*cfg.seed, static_cast<std::uint64_t>(i)};
  if (cfg.experiment == "theorem1") {
    if (!cfg.drift.empty()) {
      return sample_drifted_martingale(group, grid, noise, Eigen::Map<const Eigen::VectorXd>(cfg.drift.data(), group.dim()));
    }
    return sample_flat_bm(group, grid, noise);
  }
  if (cfg.deterministic) {
    AlgebraPath y{grid, Eigen::MatrixXd(group.dim(), grid.steps() + 1), group.name(), noise};
    for (std::int64_t k = 0; k <= grid.steps(); ++k) y.values.col(k).setConstant(grid.time(k));
    if (cfg.experiment == "levy") return y;
    return stochastic_logarithm(group, stochastic_exponential(group, y));
  }
  if (cfg.experiment == "levy") return sample_flat_bm(group, grid, noise);
  return stochastic_logarithm(group, sample_group_bm(group, grid, noise));
}

double max_abs_score(const TestReport& r) {
  double m = 0.0;
  for (const auto& c : r.checkpoints)
    if (std::isfinite(c.score)) m = std::max(m, std::abs(c.score));
  for (const auto& sub : r.components) m = std::max(m, max_abs_score(sub));
  return m;
}

TestReport run_theorem1(const ExperimentConfig& cfg) {
  const Group group = make_group(cfg.group);
  const Connection alpha = make_connection(group, cfg.connection);
  if (!is_skew_symmetric(alpha)) throw ContractViolation("theorem1: connection function must be skew-symmetric");
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const auto times = default_checkpoints(cfg.horizon);
  const auto n = group.dim();
  std::vector<CheckpointSamples> samples(static_cast<std::size_t>(n));
  for (auto& s : samples) s = {times, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.ensemble_size), 4)};
  for_each_path(cfg.ensemble_size, cfg.threads, [&](std::size_t p) {
    const AlgebraPath y = theorem_path(cfg, group, grid, p);
    const AlgebraPath log_path = stochastic_logarithm(group, stochastic_exponential(group, y));
    for (Eigen::Index c = 0; c < n; ++c) {
      const RealPath integral = group_ito_integral(unit_vector(n, c), log_path, alpha);
      auto& s = samples[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < times.size(); ++k)
        s.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = integral.values(grid.index_of(times[k]));
    }
  });
  std::vector<TestReport> parts;
  for (Eigen::Index c = 0; c < n; ++c) {
    parts.push_back(martingale_drift_test(samples[static_cast<std::size_t>(c)], cfg.z_max, "covector_e" + std::to_string(c)));
  }
  TestReport r = combine_reports("theorem1", std::move(parts), provenance_of(cfg, grid.steps()));
  r.thresholds = {{"z_max", cfg.z_max}};
  r.metrics = {{"max_abs_z", max_abs_score(r)}};
  return r;
}

TestReport run_levy(const ExperimentConfig& cfg) {
  const Group group = make_group(cfg.group);
  const TimeGrid grid(cfg.horizon, cfg.steps);
  LevySamples samples = make_levy_samples(cfg.ensemble_size, group.dim(), default_checkpoints(cfg.horizon));
  for_each_path(cfg.ensemble_size, cfg.threads,
                [&](std::size_t p) { record_levy_path(samples, p, theorem_path(cfg, group, grid, p)); });
  TestReport r = levy_characterization_test(samples, group.metric().inverse(), cfg.rel_tol, cfg.z_max);
  r.name = cfg.experiment;
  r.provenance = provenance_of(cfg, grid.steps());
  for (auto& c : r.components) c.provenance = r.provenance;
  double z = 0.0, rel = 0.0;
  for (const auto& c : r.components) {
    if (c.name == "realized_covariation") {
      rel = max_abs_score(c);
    } else {
      z = std::max(z, max_abs_score(c));
    }
  }
  r.metrics = {{"max_abs_z", z}, {"max_covariation_relative_error", rel}};
  return r;
}

TestReport run_naturality(const ExperimentConfig& cfg) {
  const auto levels = naturality_study(cfg.homomorphism, cfg.horizon, cfg.min_level, cfg.max_level, *cfg.seed,
                                       cfg.ensemble_size, cfg.threads);
  TestReport r;
  r.name = "naturality:" + cfg.homomorphism;
  r.provenance = provenance_of(cfg, levels.back().steps);
  std::vector<RateRow> rows;
  bool all_zero = true, group_log_exact = true, monotone = true;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    all_zero = all_zero && l.group_log == 0.0 && l.midpoint == 0.0;
    group_log_exact = group_log_exact && l.group_log <= 1e-12;
    const double order = i == 0 ? kNaN : std::log2(levels[i - 1].midpoint / l.midpoint);
    const bool decreasing = i == 0 || l.midpoint < levels[i - 1].midpoint;
    monotone = monotone && decreasing;
    rows.push_back({"midpoint", l.steps, l.midpoint, order});
    r.checkpoints.push_back({cfg.horizon / static_cast<double>(l.steps), "midpoint_residual_N" + std::to_string(l.steps),
                             l.midpoint, 0.0, order, 0.3, decreasing || all_zero});
    r.checkpoints.push_back({cfg.horizon / static_cast<double>(l.steps), "group_log_residual_N" + std::to_string(l.steps),
                             l.group_log, 0.0, kNaN, 1e-12, l.group_log <= 1e-12});
  }
  const double order = all_zero ? kNaN : fitted_order(rows, "midpoint");
  const bool order_ok = std::abs(order - 1.0) <= 0.3;
  r.verdict = (all_zero || (monotone && order_ok && group_log_exact)) ? Verdict::pass : Verdict::fail;
  r.thresholds = {{"order_target", 1.0}, {"order_tolerance", 0.3}, {"group_log_tolerance", 1e-12}};
  double group_log_max = 0.0;
  for (const auto& l : levels) group_log_max = std::max(group_log_max, l.group_log);
  r.metrics = {{"midpoint_order", order},
               {"midpoint_monotone", monotone ? 1.0 : 0.0},
               {"group_log_max_residual", group_log_max},
               {"exact_zero", all_zero ? 1.0 : 0.0},
               {"trees", static_cast<double>(cfg.ensemble_size)}};
  return r;
}

MonteCarloSettings mc_settings(const ExperimentConfig& cfg) {
  MonteCarloSettings s;
  s.grid = TimeGrid(cfg.horizon, cfg.steps);
  s.ensemble_size = cfg.ensemble_size;
  s.seed = *cfg.seed;
  s.threads = cfg.threads;
  s.z_max = cfg.z_max;
  return s;
}

TestReport run_homomorphism(const ExperimentConfig& cfg) {
  const GroupHomomorphism phi = make_homomorphism(cfg.homomorphism);
  TestReport r = homomorphism_harmonicity_experiment(phi, make_connection(phi.domain, cfg.connection),
                                                     make_connection(phi.codomain, cfg.connection), mc_settings(cfg));
  double z = 0.0, rel = 0.0;
  for (const auto& c : r.components) {
    if (c.name == "realized_covariation") {
      rel = max_abs_score(c);
    } else {
      z = std::max(z, max_abs_score(c));
    }
  }
  r.metrics = {{"max_abs_z", z}, {"max_covariation_relative_error", rel}};
  return r;
}

TestReport checker_report(const std::string& name, const PluzhnikovResult& res, double tol) {
  TestReport r;
  r.name = name;
  r.verdict = res.harmonic ? Verdict::pass : Verdict::fail;
  for (std::size_t p = 0; p < res.points.size(); ++p) {
    std::ostringstream q;
    q.precision(6);
    q << "codifferential_at(";
    for (Eigen::Index i = 0; i < res.points[p].size(); ++i) q << (i ? " " : "") << res.points[p](i);
    q << ')';
    const double norm = res.residuals[p].norm();
    r.checkpoints.push_back({0.0, q.str(), norm, 0.0, norm, tol, res.errors[p].empty() && norm <= tol});
  }
  r.thresholds = {{"tolerance", tol}};
  r.metrics = {{"max_residual", res.max_residual}};
  for (const auto& e : res.errors)
    if (!e.empty()) r.notes.push_back(e);
  return r;
}

TestReport run_pluzhnikov(const ExperimentConfig& cfg) {
  const SmoothMap map = make_map(cfg.map);
  const Connection alpha = make_connection(map.target, cfg.connection);
  const PluzhnikovResult analytic = pluzhnikov_check(map, map.lattice, 1e-10, cfg.fd_step, Derivative::analytic);
  const PluzhnikovResult fd = pluzhnikov_check(map, map.lattice, cfg.harmonic_tol, cfg.fd_step, Derivative::central);
  const TestReport mc = harmonicity_monte_carlo(map, alpha, mc_settings(cfg));
  const double predicted =
      0.5 * tension_field(map, map.base_point, alpha, cfg.fd_step, Derivative::analytic).norm();
  const double measured = mc.metric("drift_rate_norm");

  std::vector<TestReport> parts{checker_report("checker_analytic", analytic, 1e-10),
                                checker_report("checker_finite_difference", fd, cfg.harmonic_tol), mc};
  TestReport r = combine_reports("pluzhnikov:" + cfg.map, std::move(parts), provenance_of(cfg, cfg.steps));
  const bool checkers_agree = analytic.harmonic == fd.harmonic;
  if (mc.verdict == Verdict::inconclusive) {
    r.verdict = Verdict::inconclusive;
  } else {
    r.verdict = checkers_agree && fd.harmonic == mc.passed() ? Verdict::pass : Verdict::fail;
  }
  r.thresholds = {{"analytic_tolerance", 1e-10}, {"finite_difference_tolerance", cfg.harmonic_tol},
                  {"fd_step", cfg.fd_step}, {"z_max", cfg.z_max}};
  r.metrics = {{"analytic_max_residual", analytic.max_residual},
               {"fd_max_residual", fd.max_residual},
               {"checker_harmonic", fd.harmonic ? 1.0 : 0.0},
               {"monte_carlo_harmonic", mc.passed() ? 1.0 : 0.0},
               {"drift_rate_norm", measured},
               {"predicted_drift_rate", predicted},
               {"drift_rate_relative_error", predicted > 0.0 ? std::abs(measured - predicted) / predicted : kNaN}};
  return r;
}

TestReport run_convergence(const ExperimentConfig& cfg) {
  const auto rows = convergence_study(cfg);
  TestReport r;
  r.name = "convergence";
  r.provenance = provenance_of(cfg, std::int64_t{1} << cfg.max_level);
  bool ok = true;
  const std::vector<std::pair<std::string, std::pair<double, double>>> targets{
      {"naturality_midpoint", {1.0, 0.3}}, {"pullback_central_difference", {2.0, 0.2}}};
  for (const auto& q : {"round_trip", "naturality_midpoint", "naturality_group_log", "pullback_central_difference"}) {
    bool exact = true;
    for (const auto& row : rows)
      if (row.quantity == q) {
        exact = exact && row.error <= 1e-12;
        r.checkpoints.push_back({1.0 / static_cast<double>(row.steps), std::string(q) + "_N" + std::to_string(row.steps),
                                 row.error, 0.0, row.order, kNaN, true});
      }
    const double order = exact ? kNaN : fitted_order(rows, q);
    r.metrics.emplace_back(std::string(q) + "_order", order);
    r.metrics.emplace_back(std::string(q) + "_exact", exact ? 1.0 : 0.0);
    for (const auto& [name, target] : targets) {
      if (name != q) continue;
      r.thresholds.emplace_back(name + "_order_target", target.first);
      r.thresholds.emplace_back(name + "_order_tolerance", target.second);
      ok = ok && (exact || std::abs(order - target.first) <= target.second);
    }
  }
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  reject_unknown(doc,
                 {"experiment", "group", "map", "homomorphism", "seed", "threads", "expect", "grid", "ensemble",
                  "connection", "thresholds", "control", "convergence", "output"},
                 "");
  ExperimentConfig cfg;
  const auto str = [&](const nlohmann::json& t, const char* k, std::string& dst, const std::string& prefix) {
    if (t.contains(k)) dst = get_as<std::string>(t.at(k), prefix + k);
  };
  const auto num = [&](const nlohmann::json& t, const char* k, double& dst, const std::string& prefix) {
    if (t.contains(k)) dst = get_as<double>(t.at(k), prefix + k);
  };
  if (!doc.contains("experiment")) throw ConfigError("config is missing 'experiment'");
  str(doc, "experiment", cfg.experiment, "");
  str(doc, "group", cfg.group, "");
  str(doc, "map", cfg.map, "");
  str(doc, "homomorphism", cfg.homomorphism, "");
  str(doc, "expect", cfg.expect, "");
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0) throw ConfigError("config key 'seed' must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("threads")) {
    const auto t = get_as<std::int64_t>(doc.at("threads"), "threads");
    if (t < 1 || t > 1024) throw ConfigError("config key 'threads' out of range");
    cfg.threads = static_cast<unsigned>(t);
  }
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    reject_unknown(g, {"horizon", "steps"}, "grid");
    num(g, "horizon", cfg.horizon, "grid.");
    if (g.contains("steps")) cfg.steps = get_as<std::int64_t>(g.at("steps"), "grid.steps");
  }
  if (doc.contains("ensemble")) {
    const auto& e = doc.at("ensemble");
    reject_unknown(e, {"size"}, "ensemble");
    if (e.contains("size")) {
      const auto n = get_as<std::int64_t>(e.at("size"), "ensemble.size");
      if (n < 1) throw ConfigError("config key 'ensemble.size' must be positive");
      cfg.ensemble_size = static_cast<std::uint64_t>(n);
    }
  }
  if (doc.contains("connection")) {
    const auto& c = doc.at("connection");
    reject_unknown(c, {"kind", "c", "coeffs"}, "connection");
    str(c, "kind", cfg.connection.kind, "connection.");
    num(c, "c", cfg.connection.c, "connection.");
    if (c.contains("coeffs")) cfg.connection.coeffs = get_as<std::vector<double>>(c.at("coeffs"), "connection.coeffs");
  }
  if (doc.contains("thresholds")) {
    const auto& t = doc.at("thresholds");
    reject_unknown(t, {"z_max", "rel_tol", "harmonic_tol", "fd_step"}, "thresholds");
    num(t, "z_max", cfg.z_max, "thresholds.");
    num(t, "rel_tol", cfg.rel_tol, "thresholds.");
    num(t, "harmonic_tol", cfg.harmonic_tol, "thresholds.");
    num(t, "fd_step", cfg.fd_step, "thresholds.");
  }
  if (doc.contains("control")) {
    const auto& c = doc.at("control");
    reject_unknown(c, {"drift", "deterministic"}, "control");
    if (c.contains("drift")) cfg.drift = get_as<std::vector<double>>(c.at("drift"), "control.drift");
    if (c.contains("deterministic")) cfg.deterministic = get_as<bool>(c.at("deterministic"), "control.deterministic");
  }
  if (doc.contains("convergence")) {
    const auto& c = doc.at("convergence");
    reject_unknown(c, {"min_level", "max_level"}, "convergence");
    if (c.contains("min_level")) cfg.min_level = get_as<int>(c.at("min_level"), "convergence.min_level");
    if (c.contains("max_level")) cfg.max_level = get_as<int>(c.at("max_level"), "convergence.max_level");
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    reject_unknown(o, {"dir", "paths"}, "output");
    str(o, "dir", cfg.out_dir, "output.");
    if (o.contains("paths")) cfg.write_paths = get_as<bool>(o.at("paths"), "output.paths");
  }
  return cfg;
}

Connection make_connection(const Group& group, const ConnectionSpec& spec) {
  if (spec.kind == "zero") return Connection::zero(group);
  if (spec.kind == "bracket_multiple") return Connection::bracket_multiple(group, spec.c);
  if (spec.kind == "explicit") {
    const auto n = group.dim();
    if (static_cast<Eigen::Index>(spec.coeffs.size()) != n * n * n) {
      throw DimensionError("explicit connection needs " + std::to_string(n * n * n) + " coefficients");
    }
    Tensor3<double> t(n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) t(k, i, j) = spec.coeffs[static_cast<std::size_t>((k * n + i) * n + j)];
    return Connection::explicit_tensor(group, std::move(t));
  }
  throw ConfigError("unknown connection kind '" + spec.kind + "'");
}

void validate(const ExperimentConfig& cfg) {
  const auto names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    throw RegistryError("unknown experiment '" + cfg.experiment + "'");
  }
  if (cfg.expect != "" && cfg.expect != "pass" && cfg.expect != "fail") {
    throw ConfigError("expect must be 'pass' or 'fail'");
  }
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw ConfigError("grid.horizon must be positive");
  if (cfg.steps < 2) throw ConfigError("grid.steps must be at least 2");
  if (!(cfg.z_max > 0.0) || !(cfg.rel_tol > 0.0) || !(cfg.harmonic_tol > 0.0) || !(cfg.fd_step > 0.0)) {
    throw ConfigError("thresholds must be positive");
  }
  if (cfg.ensemble_size < 1) throw ConfigError("ensemble.size must be positive");
  if (cfg.experiment != "naturality" && cfg.experiment != "convergence" && cfg.steps % 4 != 0) {
    throw ConfigError("grid.steps must be a multiple of 4 so the checkpoints T/4, T/2, 3T/4 lie on the grid");
  }
  if (cfg.experiment == "naturality" || cfg.experiment == "convergence") {
    if (cfg.min_level < 1 || cfg.max_level > 20 || cfg.max_level <= cfg.min_level) {
      throw ConfigError("convergence levels must satisfy 1 <= min_level < max_level <= 20");
    }
  }
  if (uses_group(cfg.experiment)) {
    const Group g = make_group(cfg.group);
    if (cfg.experiment != "convergence") make_connection(g, cfg.connection);
    if (!cfg.drift.empty() && static_cast<Eigen::Index>(cfg.drift.size()) != g.dim()) {
      throw DimensionError("control.drift must have " + std::to_string(g.dim()) + " entries");
    }
    if (cfg.experiment == "theorem2" && !g.admits_biinvariant_metric()) {
      throw UnsupportedGroupError("theorem2 needs a bi-invariant metric on '" + g.name() + "'");
    }
  }
  if (uses_map(cfg.experiment)) {
    const SmoothMap m = make_map(cfg.map);
    if (cfg.experiment == "pluzhnikov") make_connection(m.target, cfg.connection);
  }
  if (uses_homomorphism(cfg.experiment)) {
    const GroupHomomorphism phi = make_homomorphism(cfg.homomorphism);
    if (cfg.experiment == "homomorphism") {
      make_connection(phi.domain, cfg.connection);
      make_connection(phi.codomain, cfg.connection);
    }
  }
}

nlohmann::ordered_json canonical_config(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["experiment"] = cfg.experiment;
  if (uses_group(cfg.experiment)) j["group"] = cfg.group;
  if (uses_map(cfg.experiment)) j["map"] = cfg.map;
  if (uses_homomorphism(cfg.experiment)) j["homomorphism"] = cfg.homomorphism;
  j["connection"] = {{"kind", cfg.connection.kind}, {"c", cfg.connection.c}, {"coeffs", cfg.connection.coeffs}};
  j["grid"] = {{"horizon", cfg.horizon}, {"steps", cfg.steps}};
  j["ensemble_size"] = cfg.ensemble_size;
  j["seed"] = cfg.seed ? nlohmann::ordered_json(*cfg.seed) : nlohmann::ordered_json(nullptr);
  j["thresholds"] = {{"z_max", cfg.z_max}, {"rel_tol", cfg.rel_tol}, {"harmonic_tol", cfg.harmonic_tol},
                     {"fd_step", cfg.fd_step}};
  j["control"] = {{"drift", cfg.drift}, {"deterministic", cfg.deterministic}};
  j["convergence"] = {{"min_level", cfg.min_level}, {"max_level", cfg.max_level}};
  return j;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : canonical_config(cfg).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

TestReport run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("run_experiment: seed must be resolved before running");
  validate(cfg);
  if (cfg.experiment == "theorem1") return run_theorem1(cfg);
  if (cfg.experiment == "theorem2" || cfg.experiment == "levy") return run_levy(cfg);
  if (cfg.experiment == "naturality") return run_naturality(cfg);
  if (cfg.experiment == "homomorphism") return run_homomorphism(cfg);
  if (cfg.experiment == "pluzhnikov") return run_pluzhnikov(cfg);
  return run_convergence(cfg);
}

nlohmann::ordered_json report_document(const ExperimentConfig& cfg, const TestReport& report) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["config_hash"] = hex64(config_hash(cfg));
  j["seed"] = cfg.seed ? nlohmann::ordered_json(*cfg.seed) : nlohmann::ordered_json(nullptr);
  j["config"] = canonical_config(cfg);
  j["report"] = report.to_json();
  return j;
}

void write_outputs(const ExperimentConfig& cfg, const TestReport& report) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file(dir / "report.json", report_document(cfg, report).dump(2) + "\n");
  write_file(dir / "summary.csv", report.to_csv());
  if (cfg.experiment == "pluzhnikov") {
    const SmoothMap map = make_map(cfg.map);
    std::ostringstream os;
    write_residual_csv(os, pluzhnikov_check(map, map.lattice, cfg.harmonic_tol, cfg.fd_step, Derivative::central));
    write_file(dir / "residuals.csv", os.str());
  }
  if (cfg.experiment == "convergence") write_file(dir / "rates.csv", rate_table_csv(convergence_study(cfg)));
  if (cfg.write_paths && (cfg.experiment == "theorem1" || cfg.experiment == "theorem2" || cfg.experiment == "levy")) {
    constexpr std::size_t kMaxPaths = 16;
    const Group group = make_group(cfg.group);
    const TimeGrid grid(cfg.horizon, cfg.steps);
    std::ostringstream os;
    os.precision(17);
    os << "path,t";
    for (Eigen::Index i = 0; i < group.dim(); ++i) os << ",y" << i;
    os << '\n';
    for (std::size_t p = 0; p < std::min<std::size_t>(kMaxPaths, cfg.ensemble_size); ++p) {
      const AlgebraPath y = theorem_path(cfg, group, grid, p);
      for (std::int64_t k = 0; k <= grid.steps(); ++k) {
        os << p << ',' << grid.time(k);
        for (Eigen::Index i = 0; i < y.dim(); ++i) os << ',' << y.values(i, k);
        os << '\n';
      }
    }
    write_file(dir / "paths.csv", os.str());
  }
}

// ---------------------------------------------------------------------------

std::vector<NaturalityLevel> naturality_study(const std::string& homomorphism, double horizon, int min_level,
                                              int max_level, std::uint64_t seed, std::uint64_t trees,
                                              unsigned threads) {
  const GroupHomomorphism phi = make_homomorphism(homomorphism);
  const int count = max_level - min_level + 1;
  Eigen::MatrixXd group_log(static_cast<Eigen::Index>(trees), count), midpoint(static_cast<Eigen::Index>(trees), count);
  for_each_path(trees, threads, [&](std::size_t t) {
    const WienerTree tree(phi.domain, horizon, max_level, {seed, static_cast<std::uint64_t>(t)});
    for (int l = min_level; l <= max_level; ++l) {
      const GroupPath x = stochastic_exponential(phi.domain, tree.path(l));
      const auto row = static_cast<Eigen::Index>(t);
      group_log(row, l - min_level) = homomorphism_naturality_check(phi, x, LogScheme::group_log).maxCoeff();
      midpoint(row, l - min_level) = homomorphism_naturality_check(phi, x, LogScheme::midpoint).maxCoeff();
    }
  });
  std::vector<NaturalityLevel> out;
  for (int l = min_level; l <= max_level; ++l) {
    out.push_back({std::int64_t{1} << l, group_log.col(l - min_level).mean(), midpoint.col(l - min_level).mean()});
  }
  return out;
}

std::vector<RateRow> convergence_study(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("convergence_study: seed must be resolved before running");
  const Group group = make_group(cfg.group);
  const SmoothMap map = make_map(cfg.map);
  const int count = cfg.max_level - cfg.min_level + 1;
  const std::uint64_t trees = cfg.ensemble_size;
  std::vector<RateRow> rows;
  const auto push_series = [&](const std::string& q, const std::vector<double>& errors) {
    for (int i = 0; i < count; ++i) {
      const double order = i == 0 ? kNaN : std::log2(errors[static_cast<std::size_t>(i - 1)] / errors[static_cast<std::size_t>(i)]);
      rows.push_back({q, std::int64_t{1} << (cfg.min_level + i), errors[static_cast<std::size_t>(i)], order});
    }
  };

  // Round trip: the group path is simulated on a grid four times finer, then
  // observed on the coarse grid and compared with the coarse driving path.
  const int fine_level = cfg.max_level + 2;
  Eigen::MatrixXd trip(static_cast<Eigen::Index>(trees), count);
  for_each_path(trees, cfg.threads, [&](std::size_t t) {
    const WienerTree tree(group, cfg.horizon, fine_level, {*cfg.seed, static_cast<std::uint64_t>(t)});
    const GroupPath fine = stochastic_exponential(group, tree.path(fine_level));
    for (int l = cfg.min_level; l <= cfg.max_level; ++l) {
      const AlgebraPath coarse = tree.path(l);
      const std::int64_t stride = std::int64_t{1} << (fine_level - l);
      GroupPath observed{coarse.grid, {}, group.name(), coarse.noise};
      for (std::int64_t k = 0; k <= coarse.grid.steps(); ++k) {
        observed.values.push_back(fine.values[static_cast<std::size_t>(k * stride)]);
      }
      const AlgebraPath back = stochastic_logarithm(group, observed);
      trip(static_cast<Eigen::Index>(t), l - cfg.min_level) = (back.values - coarse.values).colwise().norm().maxCoeff();
    }
  });
  std::vector<double> trip_mean;
  for (int i = 0; i < count; ++i) trip_mean.push_back(trip.col(i).mean());
  push_series("round_trip", trip_mean);

  const auto nat = naturality_study(cfg.homomorphism, cfg.horizon, cfg.min_level, cfg.max_level, *cfg.seed, trees,
                                    cfg.threads);
  std::vector<double> mid, glog;
  for (const auto& l : nat) {
    mid.push_back(l.midpoint);
    glog.push_back(l.group_log);
  }
  push_series("naturality_midpoint", mid);
  push_series("naturality_group_log", glog);

  // Central differences with h = T / N against the analytic pullback.
  std::vector<double> fd;
  for (int l = cfg.min_level; l <= cfg.max_level; ++l) {
    const double h = cfg.horizon / static_cast<double>(std::int64_t{1} << l);
    double worst = 0.0;
    for (const auto& x : map.lattice) {
      const auto exact = pullback_maurer_cartan(map, x, h, Derivative::analytic);
      const auto approx = pullback_maurer_cartan(map, x, h, Derivative::central);
      for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, (exact[i] - approx[i]).norm());
    }
    fd.push_back(worst);
  }
  push_series("pullback_central_difference", fd);
  return rows;
}

std::string rate_table_csv(const std::vector<RateRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "quantity,N,error,order\n";
  for (const auto& r : rows) {
    os << r.quantity << ',' << r.steps << ',' << r.error << ',';
    if (std::isfinite(r.order)) os << r.order;
    os << '\n';
  }
  return os.str();
}

double fitted_order(const std::vector<RateRow>& rows, const std::string& quantity) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.quantity != quantity) continue;
    if (!(r.error > 0.0)) return kNaN;
    const double x = std::log2(static_cast<double>(r.steps)), y = -std::log2(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return kNaN;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string registry_listing(bool json) {
  const auto groups = group_names();
  const auto maps = map_names();
  const auto corpus = pluzhnikov_corpus();
  const auto homs = homomorphism_names();
  const auto experiments = experiment_names();
  if (json) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json g = nlohmann::ordered_json::array();
    for (const auto& name : groups) {
      const Group d = make_group(name);
      g.push_back({{"name", name},
                   {"dim", d.dim()},
                   {"matrix_size", d.embed_dim()},
                   {"biinvariant_metric", d.admits_biinvariant_metric()},
                   {"injectivity_radius", std::isfinite(d.injectivity_radius())
                                              ? nlohmann::ordered_json(d.injectivity_radius())
                                              : nlohmann::ordered_json("inf")}});
    }
    j["groups"] = g;
    nlohmann::ordered_json m = nlohmann::ordered_json::array();
    for (const auto& name : maps) {
      const SmoothMap s = make_map(name);
      m.push_back({{"name", name},
                   {"source_dim", s.source.dim},
                   {"target", s.target.name()},
                   {"pluzhnikov_corpus", std::find(corpus.begin(), corpus.end(), name) != corpus.end()}});
    }
    j["maps"] = m;
    nlohmann::ordered_json h = nlohmann::ordered_json::array();
    for (const auto& name : homs) {
      const GroupHomomorphism phi = make_homomorphism(name);
      h.push_back({{"name", name}, {"domain", phi.domain.name()}, {"codomain", phi.codomain.name()}});
    }
    j["homomorphisms"] = h;
    j["experiments"] = experiments;
    j["connections"] = {"zero", "bracket_multiple", "explicit"};
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "groups:\n";
  for (const auto& name : groups) {
    const Group d = make_group(name);
    os << "  " << name << "  dim " << d.dim() << ", " << d.embed_dim() << "x" << d.embed_dim() << " matrices"
       << (d.admits_biinvariant_metric() ? ", bi-invariant metric" : "") << '\n';
  }
  os << "maps:\n";
  for (const auto& name : maps) {
    const bool in_corpus = std::find(corpus.begin(), corpus.end(), name) != corpus.end();
    os << "  " << name << (in_corpus ? "  (pluzhnikov corpus)" : "") << '\n';
  }
  os << "homomorphisms:\n";
  for (const auto& name : homs) {
    const GroupHomomorphism phi = make_homomorphism(name);
    os << "  " << name << "  " << phi.domain.name() << " -> " << phi.codomain.name() << '\n';
  }
  os << "experiments:\n";
  for (const auto& name : experiments) os << "  " << name << '\n';
  os << "connections:\n  zero\n  bracket_multiple (c)\n  explicit (coeffs)\n";
  return os.str();
}

}  // namespace skewlie
