#include "skewlie/stats.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "skewlie/errors.hpp"

namespace skewlie {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

double TestReport::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return v;
  throw PreconditionError("report '" + name + "' has no metric '" + key + "'");
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

void csv_rows(const TestReport& r, const std::string& prefix, std::ostringstream& os) {
  const std::string name = prefix.empty() ? r.name : prefix + "/" + r.name;
  os.precision(17);
  for (const auto& c : r.checkpoints) {
    os << name << ',' << c.quantity << ',' << c.time << ',' << c.statistic << ',' << c.expected << ',' << c.score
       << ',' << c.threshold << ',' << (c.ok ? "ok" : "violated") << '\n';
  }
  for (const auto& sub : r.components) csv_rows(sub, name, os);
}

}  // namespace

nlohmann::ordered_json TestReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["verdict"] = to_string(verdict);
  j["ensemble_size"] = provenance.ensemble_size;
  j["grid"] = {{"T", provenance.horizon}, {"N", provenance.steps}};
  j["seed"] = provenance.seed;
  nlohmann::ordered_json th = nlohmann::ordered_json::object();
  for (const auto& [k, v] : thresholds) th[k] = number_or_null(v);
  j["thresholds"] = th;
  nlohmann::ordered_json me = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metrics) me[k] = number_or_null(v);
  j["metrics"] = me;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& c : checkpoints) {
    rows.push_back({{"time", c.time},
                    {"quantity", c.quantity},
                    {"statistic", number_or_null(c.statistic)},
                    {"expected", number_or_null(c.expected)},
                    {"score", number_or_null(c.score)},
                    {"threshold", number_or_null(c.threshold)},
                    {"ok", c.ok}});
  }
  j["checkpoints"] = rows;
  if (!notes.empty()) j["notes"] = notes;
  if (!components.empty()) {
    nlohmann::ordered_json comps = nlohmann::ordered_json::array();
    for (const auto& c : components) comps.push_back(c.to_json());
    j["components"] = comps;
  }
  return j;
}

std::string TestReport::to_csv() const {
  std::ostringstream os;
  os << "test,quantity,time,statistic,expected,score,threshold,status\n";
  csv_rows(*this, "", os);
  return os.str();
}

TestReport combine_reports(std::string name, std::vector<TestReport> parts, const Provenance& provenance) {
  TestReport out;
  out.name = std::move(name);
  out.provenance = provenance;
  bool any_fail = false, any_inconclusive = false;
  for (const auto& p : parts) {
    any_fail = any_fail || p.verdict == Verdict::fail;
    any_inconclusive = any_inconclusive || p.verdict == Verdict::inconclusive;
  }
  out.verdict = any_fail ? Verdict::fail : (any_inconclusive ? Verdict::inconclusive : Verdict::pass);
  out.components = std::move(parts);
  return out;
}

std::vector<double> default_checkpoints(double horizon) {
  return {0.25 * horizon, 0.5 * horizon, 0.75 * horizon, horizon};
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double bonferroni_z(double alpha, std::size_t tests) {
  if (!(alpha > 0.0 && alpha < 1.0) || tests == 0) throw PreconditionError("bonferroni_z: invalid level");
  const double target = alpha / static_cast<double>(tests);
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (two_sided_p(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CheckpointSamples sample_checkpoints(std::span<const RealPath> ensemble, const std::vector<double>& times) {
  if (ensemble.empty()) throw PreconditionError("sample_checkpoints: empty ensemble");
  const TimeGrid& grid = ensemble.front().grid;
  std::vector<std::int64_t> idx;
  for (double t : times) idx.push_back(grid.index_of(t));
  CheckpointSamples s{times, Eigen::MatrixXd(static_cast<Eigen::Index>(ensemble.size()),
                                             static_cast<Eigen::Index>(times.size()))};
  for (std::size_t p = 0; p < ensemble.size(); ++p) {
    if (!(ensemble[p].grid == grid)) throw PreconditionError("sample_checkpoints: mismatched grids");
    for (std::size_t k = 0; k < idx.size(); ++k) {
      s.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = ensemble[p].values(idx[k]);
    }
  }
  return s;
}

TestReport martingale_drift_test(const CheckpointSamples& samples, double z_max, std::string name) {
  const Eigen::Index paths = samples.values.rows();
  if (paths < 100) throw PreconditionError("martingale_drift_test: ensemble size must be at least 100");
  if (!(z_max > 0.0)) throw PreconditionError("martingale_drift_test: z_max must be positive");
  TestReport r;
  r.name = std::move(name);
  r.provenance.ensemble_size = static_cast<std::uint64_t>(paths);
  r.thresholds = {{"z_max", z_max},
                  {"familywise_false_positive_bound", std::min(1.0, two_sided_p(z_max) * samples.times.size())}};
  bool degenerate = false, violated = false;
  for (std::size_t k = 0; k < samples.times.size(); ++k) {
    const auto col = samples.values.col(static_cast<Eigen::Index>(k));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(paths - 1);
    const double sd = std::sqrt(var);
    CheckpointRow row{samples.times[k], "mean", mean, 0.0, std::numeric_limits<double>::quiet_NaN(), z_max, true};
    if (!(sd > 0.0)) {
      degenerate = true;
      row.ok = false;
    } else {
      row.score = mean * std::sqrt(static_cast<double>(paths)) / sd;
      row.ok = std::abs(row.score) < z_max;
      violated = violated || !row.ok;
    }
    r.checkpoints.push_back(row);
  }
  if (degenerate) {
    r.verdict = Verdict::inconclusive;
    r.notes.push_back("zero variance at a checkpoint: degenerate ensemble");
  } else {
    r.verdict = violated ? Verdict::fail : Verdict::pass;
  }
  return r;
}

TestReport martingale_drift_test(std::span<const RealPath> ensemble, const std::vector<double>& checkpoints,
                                 double z_max, std::string name) {
  return martingale_drift_test(sample_checkpoints(ensemble, checkpoints), z_max, std::move(name));
}

LevySamples make_levy_samples(std::size_t paths, Eigen::Index dim, std::vector<double> times) {
  LevySamples s;
  const auto p = static_cast<Eigen::Index>(paths);
  const auto k = static_cast<Eigen::Index>(times.size());
  s.dim = dim;
  s.covariation = Eigen::MatrixXd::Zero(p, k * dim * dim);
  for (Eigen::Index i = 0; i < dim; ++i) s.coordinates.push_back({times, Eigen::MatrixXd::Zero(p, k)});
  s.times = std::move(times);
  return s;
}

void record_levy_path(LevySamples& s, std::size_t index, const AlgebraPath& path) {
  const Eigen::Index n = s.dim;
  if (path.dim() != n) throw DimensionError("record_levy_path: path dimension");
  const auto row = static_cast<Eigen::Index>(index);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  std::size_t next = 0;
  std::vector<std::int64_t> idx;
  for (double t : s.times) idx.push_back(path.grid.index_of(t));
  for (std::int64_t k = 0; k <= path.grid.steps() && next < idx.size(); ++k) {
    if (k > 0) {
      const Eigen::VectorXd d = path.values.col(k) - path.values.col(k - 1);
      q.noalias() += d * d.transpose();
    }
    while (next < idx.size() && idx[next] == k) {
      const auto base = static_cast<Eigen::Index>(next) * n * n;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) s.covariation(row, base + i * n + j) = q(i, j);
      for (Eigen::Index i = 0; i < n; ++i) {
        s.coordinates[static_cast<std::size_t>(i)].values(row, static_cast<Eigen::Index>(next)) = path.values(i, k);
      }
      ++next;
    }
  }
}

TestReport levy_characterization_test(const LevySamples& s, const Eigen::MatrixXd& expected_rate, double rel_tol,
                                      double z_max) {
  const Eigen::Index n = s.dim;
  if (expected_rate.rows() != n || expected_rate.cols() != n) throw DimensionError("levy test: expected rate shape");
  if (!(rel_tol > 0.0)) throw PreconditionError("levy test: rel_tol must be positive");
  TestReport cov;
  cov.name = "realized_covariation";
  cov.provenance.ensemble_size = static_cast<std::uint64_t>(s.covariation.rows());
  cov.thresholds = {{"rel_tol", rel_tol}};
  bool violated = false;
  // Column sums in fixed row order keep the reduction schedule-independent.
  const Eigen::RowVectorXd mean = s.covariation.colwise().sum() / static_cast<double>(s.covariation.rows());
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double t = s.times[k];
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) {
        const double q = mean(static_cast<Eigen::Index>(k) * n * n + i * n + j);
        const double expected = expected_rate(i, j) * t;
        CheckpointRow row{t, "Q[" + std::to_string(i) + "," + std::to_string(j) + "]", q, expected,
                          std::abs(q - expected) / t, rel_tol, true};
        row.ok = row.score <= rel_tol;
        violated = violated || !row.ok;
        cov.checkpoints.push_back(row);
      }
  }
  cov.verdict = violated ? Verdict::fail : Verdict::pass;

  std::vector<TestReport> parts{cov};
  for (Eigen::Index i = 0; i < n; ++i) {
    parts.push_back(martingale_drift_test(s.coordinates[static_cast<std::size_t>(i)], z_max,
                                          "drift_component_" + std::to_string(i)));
  }
  Provenance prov;
  prov.ensemble_size = static_cast<std::uint64_t>(s.covariation.rows());
  TestReport out = combine_reports("levy_characterization", std::move(parts), prov);
  out.thresholds = {{"rel_tol", rel_tol}, {"z_max", z_max}};
  return out;
}

TestReport levy_characterization_test(std::span<const AlgebraPath> ensemble, const std::vector<double>& checkpoints,
                                      const Eigen::MatrixXd& expected_rate, double rel_tol, double z_max) {
  if (ensemble.empty()) throw PreconditionError("levy test: empty ensemble");
  LevySamples s = make_levy_samples(ensemble.size(), ensemble.front().dim(), checkpoints);
  for (std::size_t p = 0; p < ensemble.size(); ++p) {
    if (!(ensemble[p].grid == ensemble.front().grid)) throw PreconditionError("levy test: mismatched grids");
    record_levy_path(s, p, ensemble[p]);
  }
  TestReport r = levy_characterization_test(s, expected_rate, rel_tol, z_max);
  r.provenance.horizon = ensemble.front().grid.horizon();
  r.provenance.steps = ensemble.front().grid.steps();
  r.provenance.seed = ensemble.front().noise.seed;
  return r;
}

TraceSamples make_trace_samples(std::size_t paths, std::vector<double> times) {
  const auto p = static_cast<Eigen::Index>(paths);
  const auto k = static_cast<Eigen::Index>(times.size());
  return {std::move(times), Eigen::MatrixXd::Zero(p, k), Eigen::MatrixXd::Zero(p, k)};
}

namespace {

template <typename FieldAtStep>
void record_trace_impl(TraceSamples& s, std::size_t index, const AlgebraPath& path, FieldAtStep&& b_at,
                       const Eigen::MatrixXd& metric_inverse) {
  const auto row = static_cast<Eigen::Index>(index);
  std::vector<std::int64_t> idx;
  for (double t : s.times) idx.push_back(path.grid.index_of(t));
  double quad = 0.0, trace = 0.0;
  std::size_t next = 0;
  const double dt = path.grid.dt();
  for (std::int64_t k = 0; k <= path.grid.steps() && next < idx.size(); ++k) {
    while (next < idx.size() && idx[next] == k) {
      s.quadratic(row, static_cast<Eigen::Index>(next)) = quad;
      s.trace_integral(row, static_cast<Eigen::Index>(next)) = trace;
      ++next;
    }
    if (k == path.grid.steps()) break;
    const Eigen::MatrixXd bk = b_at(k);
    const Eigen::VectorXd d = path.values.col(k + 1) - path.values.col(k);
    quad += d.dot(bk * d);
    trace += (metric_inverse * bk).trace() * dt;
  }
}

}  // namespace

void record_trace_path(TraceSamples& s, std::size_t index, const AlgebraPath& path, const BilinearField& b,
                       const Eigen::MatrixXd& metric_inverse) {
  record_trace_impl(
      s, index, path, [&](std::int64_t k) { return b.value(path.values.col(k)); }, metric_inverse);
}

TestReport brownian_trace_test(const TraceSamples& s, double rel_tol) {
  TestReport r;
  r.name = "brownian_trace";
  r.provenance.ensemble_size = static_cast<std::uint64_t>(s.quadratic.rows());
  r.thresholds = {{"rel_tol", rel_tol}};
  bool violated = false, degenerate = false;
  const double paths = static_cast<double>(s.quadratic.rows());
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double lhs = s.quadratic.col(static_cast<Eigen::Index>(k)).sum() / paths;
    const double rhs = s.trace_integral.col(static_cast<Eigen::Index>(k)).sum() / paths;
    CheckpointRow row{s.times[k], "quadratic_integral", lhs, rhs, std::numeric_limits<double>::quiet_NaN(), rel_tol,
                      true};
    if (rhs == 0.0) {
      degenerate = true;
      row.ok = false;
    } else {
      row.score = std::abs(lhs - rhs) / std::abs(rhs);
      row.ok = row.score <= rel_tol;
      violated = violated || !row.ok;
    }
    r.checkpoints.push_back(row);
  }
  r.verdict = violated ? Verdict::fail : (degenerate ? Verdict::inconclusive : Verdict::pass);
  return r;
}

TestReport brownian_trace_test(std::span<const AlgebraPath> ensemble, const BilinearField& b,
                               const Eigen::MatrixXd& metric, const std::vector<double>& checkpoints, double rel_tol) {
  if (ensemble.empty()) throw PreconditionError("brownian_trace_test: empty ensemble");
  TraceSamples s = make_trace_samples(ensemble.size(), checkpoints);
  const Eigen::MatrixXd inv = metric.inverse();
  for (std::size_t p = 0; p < ensemble.size(); ++p) record_trace_path(s, p, ensemble[p], b, inv);
  TestReport r = brownian_trace_test(s, rel_tol);
  r.provenance.horizon = ensemble.front().grid.horizon();
  r.provenance.steps = ensemble.front().grid.steps();
  r.provenance.seed = ensemble.front().noise.seed;
  return r;
}

TestReport brownian_trace_test(const Group& group, std::span<const GroupPath> ensemble,
                               const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& b,
                               const std::vector<double>& checkpoints, double rel_tol) {
  if (ensemble.empty()) throw PreconditionError("brownian_trace_test: empty ensemble");
  TraceSamples s = make_trace_samples(ensemble.size(), checkpoints);
  const Eigen::MatrixXd inv = group.metric().inverse();
  for (std::size_t p = 0; p < ensemble.size(); ++p) {
    const GroupPath& x = ensemble[p];
    const AlgebraPath logx = stochastic_logarithm(group, x);
    // b is evaluated at the group element of the left endpoint of each step.
    record_trace_impl(
        s, p, logx, [&](std::int64_t k) { return b(x.values[static_cast<std::size_t>(k)]); }, inv);
  }
  TestReport r = brownian_trace_test(s, rel_tol);
  r.provenance.horizon = ensemble.front().grid.horizon();
  r.provenance.steps = ensemble.front().grid.steps();
  r.provenance.seed = ensemble.front().noise.seed;
  return r;
}

}  // namespace skewlie
