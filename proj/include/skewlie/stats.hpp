#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewlie/calculus.hpp"
#include "skewlie/paths.hpp"

namespace skewlie {

enum class Verdict { pass, fail, inconclusive };

const char* to_string(Verdict v);

/// One row of a report: a statistic observed at a checkpoint time.
struct CheckpointRow {
  double time = 0.0;
  std::string quantity;
  double statistic = 0.0;  // observed value (ensemble mean, covariation, ...)
  double expected = 0.0;   // value under the hypothesis
  double score = 0.0;      // z-score or relative error, depending on the test
  double threshold = 0.0;
  bool ok = true;
};

struct Provenance {
  std::uint64_t ensemble_size = 0;
  double horizon = 0.0;
  std::int64_t steps = 0;
  std::uint64_t seed = 0;
};

struct TestReport {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  std::vector<CheckpointRow> checkpoints;
  Provenance provenance;
  std::vector<std::pair<std::string, double>> thresholds;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  std::vector<TestReport> components;

  bool passed() const { return verdict == Verdict::pass; }
  double metric(const std::string& key) const;

  /// Stable key order; NaN scores are written as null.
  nlohmann::ordered_json to_json() const;
  /// One row per checkpoint, components flattened with a name prefix.
  std::string to_csv() const;
};

/// fail if any part fails, else inconclusive if any part is, else pass.
TestReport combine_reports(std::string name, std::vector<TestReport> parts, const Provenance& provenance);

/// {T/4, T/2, 3T/4, T}
std::vector<double> default_checkpoints(double horizon);

/// Two-sided normal tail probability P(|Z| >= z).
double two_sided_p(double z);
/// Threshold z with familywise two-sided level `alpha` over `tests` comparisons (Bonferroni).
double bonferroni_z(double alpha, std::size_t tests);

/// Values of an ensemble of real paths at checkpoint times: P x K.
struct CheckpointSamples {
  std::vector<double> times;
  Eigen::MatrixXd values;
};

CheckpointSamples sample_checkpoints(std::span<const RealPath> ensemble, const std::vector<double>& times);

/// z(t) = mean * sqrt(P) / sd at each checkpoint; pass iff max |z| < z_max.
/// Requires P >= 100. Zero variance gives an inconclusive verdict.
TestReport martingale_drift_test(const CheckpointSamples& samples, double z_max, std::string name = "martingale_drift");
TestReport martingale_drift_test(std::span<const RealPath> ensemble, const std::vector<double>& checkpoints,
                                 double z_max, std::string name = "martingale_drift");

/// Per-path realized covariations and coordinates at checkpoints.
struct LevySamples {
  std::vector<double> times;
  Eigen::Index dim = 0;
  Eigen::MatrixXd covariation;  // P x (K n n), path-major, entry (k, i, j) at k*n*n + i*n + j
  std::vector<CheckpointSamples> coordinates;  // one per algebra component
};

/// Allocate storage for `paths` entries.
LevySamples make_levy_samples(std::size_t paths, Eigen::Index dim, std::vector<double> times);
/// Record path number `index`. Safe to call concurrently for distinct indices.
void record_levy_path(LevySamples& samples, std::size_t index, const AlgebraPath& path);

/// Ensemble mean of the realized covariation Q(t) against expected_rate * t, with
/// |Q_ij(t) - expected_ij t| <= rel_tol t, plus componentwise drift tests.
TestReport levy_characterization_test(const LevySamples& samples, const Eigen::MatrixXd& expected_rate, double rel_tol,
                                      double z_max);
TestReport levy_characterization_test(std::span<const AlgebraPath> ensemble, const std::vector<double>& checkpoints,
                                      const Eigen::MatrixXd& expected_rate, double rel_tol, double z_max);

/// Quadratic integral of b against the time integral of tr b (trace with respect to the metric).
struct TraceSamples {
  std::vector<double> times;
  Eigen::MatrixXd quadratic;       // P x K
  Eigen::MatrixXd trace_integral;  // P x K
};

TraceSamples make_trace_samples(std::size_t paths, std::vector<double> times);
/// Record an algebra path (or the logarithm of a group path with a left-trivialized b).
void record_trace_path(TraceSamples& samples, std::size_t index, const AlgebraPath& path, const BilinearField& b,
                       const Eigen::MatrixXd& metric_inverse);

/// Pass iff |mean quadratic - mean trace integral| <= rel_tol * |mean trace integral| at every checkpoint.
TestReport brownian_trace_test(const TraceSamples& samples, double rel_tol);
TestReport brownian_trace_test(std::span<const AlgebraPath> ensemble, const BilinearField& b,
                               const Eigen::MatrixXd& metric, const std::vector<double>& checkpoints, double rel_tol);
/// Group paths with a left-trivialized bilinear field b(g) evaluated at each element.
TestReport brownian_trace_test(const Group& group, std::span<const GroupPath> ensemble,
                               const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& b,
                               const std::vector<double>& checkpoints, double rel_tol);

}  // namespace skewlie
