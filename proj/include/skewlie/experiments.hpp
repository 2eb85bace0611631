#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "skewlie/calculus.hpp"
#include "skewlie/stats.hpp"

namespace skewlie {

inline constexpr const char* kVersion = "0.3.0";

struct ConnectionSpec {
  std::string kind = "bracket_multiple";  // zero | bracket_multiple | explicit
  double c = 0.5;
  std::vector<double> coeffs;  // explicit: n^3 entries, index k*n*n + i*n + j
};

struct ExperimentConfig {
  std::string experiment;
  std::string group = "so3";
  std::string map = "exp_xsq_so3";
  std::string homomorphism = "su2_to_so3";
  ConnectionSpec connection;
  double horizon = 1.0;
  std::int64_t steps = 1000;
  std::uint64_t ensemble_size = 10000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  double z_max = 4.0;
  double rel_tol = 0.05;
  double harmonic_tol = 1e-6;
  double fd_step = 1e-4;
  std::vector<double> drift;   // theorem1: sample a drifted martingale instead
  bool deterministic = false;  // theorem2/levy: replace Brownian paths by t * (1, ..., 1)
  int min_level = 8;
  int max_level = 12;
  std::string out_dir = "out";
  bool write_paths = false;
  std::string expect;  // "", "pass", "fail"
};

std::vector<std::string> experiment_names();

/// Build a config from a parsed TOML/JSON document; unknown keys are errors.
ExperimentConfig config_from_json(const nlohmann::json& doc);
/// Checks registry names, grid and thresholds; throws ConfigError subclasses.
void validate(const ExperimentConfig& cfg);
/// Fields that determine the result (threads and output location excluded).
nlohmann::ordered_json canonical_config(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical config dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);

Connection make_connection(const Group& group, const ConnectionSpec& spec);

/// Runs the experiment; cfg.seed must be set.
TestReport run_experiment(const ExperimentConfig& cfg);

/// {version, config_hash, seed, config, report}
nlohmann::ordered_json report_document(const ExperimentConfig& cfg, const TestReport& report);

/// Writes report.json, summary.csv and, on request, paths.csv into cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const TestReport& report);

struct RateRow {
  std::string quantity;
  std::int64_t steps = 0;
  double error = 0.0;
  double order = 0.0;  // log2(previous error / error); NaN on the first row
};

/// Observed orders under dyadic refinement for: the log/exp round trip against
/// an independently refined simulation, the naturality residual, and the
/// finite-difference pullback.
std::vector<RateRow> convergence_study(const ExperimentConfig& cfg);
std::string rate_table_csv(const std::vector<RateRow>& rows);
/// Least-squares slope of -log2(error) against log2(steps) for one quantity.
double fitted_order(const std::vector<RateRow>& rows, const std::string& quantity);

/// Naturality residual max_k d_k averaged over `trees` Wiener trees, per level.
struct NaturalityLevel {
  std::int64_t steps = 0;
  double group_log = 0.0;
  double midpoint = 0.0;
};
std::vector<NaturalityLevel> naturality_study(const std::string& homomorphism, double horizon, int min_level,
                                              int max_level, std::uint64_t seed, std::uint64_t trees,
                                              unsigned threads);

std::string registry_listing(bool json);

}  // namespace skewlie
