// Command-line front end: run, list, converge.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>

#include "skewlie/errors.hpp"
#include "skewlie/experiments.hpp"
#include "skewlie/toml_lite.hpp"

namespace {

enum Exit : int { kOk = 0, kUnexpected = 1, kConfig = 2, kNumeric = 3, kInconclusive = 4, kIo = 5 };

struct Overrides {
  std::string config;
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<std::int64_t> steps;
  std::optional<double> horizon;
  std::string group, map, homomorphism, out, expect;
  std::optional<unsigned> threads;
  bool write_paths = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "TOML config file");
  cmd->add_option("--seed", o.seed, "Noise seed (random when neither config nor flag gives one)");
  cmd->add_option("--paths", o.paths, "Ensemble size");
  cmd->add_option("--steps", o.steps, "Grid steps N");
  cmd->add_option("--horizon", o.horizon, "Time horizon T");
  cmd->add_option("--group", o.group, "Group registry name");
  cmd->add_option("--map", o.map, "Map registry name");
  cmd->add_option("--homomorphism", o.homomorphism, "Homomorphism registry name");
  cmd->add_option("-o,--out", o.out, "Output directory");
  cmd->add_option("-j,--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--expect", o.expect, "Expected verdict")->check(CLI::IsMember({"pass", "fail"}));
}

skewlie::ExperimentConfig build_config(const Overrides& o, const std::string& forced_experiment) {
  nlohmann::json doc = o.config.empty() ? nlohmann::json::object() : skewlie::parse_toml_file(o.config);
  if (!forced_experiment.empty()) {
    doc["experiment"] = forced_experiment;
  } else if (!o.experiment.empty()) {
    doc["experiment"] = o.experiment;
  }
  skewlie::ExperimentConfig cfg = skewlie::config_from_json(doc);
  if (o.seed) cfg.seed = *o.seed;
  if (o.paths) cfg.ensemble_size = *o.paths;
  if (o.steps) cfg.steps = *o.steps;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (!o.group.empty()) cfg.group = o.group;
  if (!o.map.empty()) cfg.map = o.map;
  if (!o.homomorphism.empty()) cfg.homomorphism = o.homomorphism;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.expect.empty()) cfg.expect = o.expect;
  if (o.write_paths) cfg.write_paths = true;
  if (!cfg.seed) {
    std::random_device rd;
    cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  }
  return cfg;
}

int execute(const skewlie::ExperimentConfig& cfg, bool print_rates) {
  skewlie::validate(cfg);
  const skewlie::TestReport report = skewlie::run_experiment(cfg);
  skewlie::write_outputs(cfg, report);
  if (print_rates) std::cout << skewlie::rate_table_csv(skewlie::convergence_study(cfg));
  std::cout << cfg.experiment << ": " << skewlie::to_string(report.verdict) << " (seed " << *cfg.seed << ", report "
            << cfg.out_dir << "/report.json)\n";
  if (report.verdict == skewlie::Verdict::inconclusive) return kInconclusive;
  if (!cfg.expect.empty() && cfg.expect != skewlie::to_string(report.verdict)) return kUnexpected;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic calculus experiments on matrix Lie groups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", skewlie::kVersion);

  Overrides run_opts, conv_opts;
  bool list_json = false;
  auto* run = app.add_subcommand("run", "Run one experiment and write report.json / summary.csv");
  add_common(run, run_opts);
  run->add_option("-e,--experiment", run_opts.experiment, "Experiment name (overrides the config)");
  run->add_flag("--write-paths", run_opts.write_paths, "Also write paths.csv (first 16 paths)");
  auto* list = app.add_subcommand("list", "List groups, maps, homomorphisms and experiments");
  list->add_flag("--json", list_json, "Machine-readable output");
  auto* converge = app.add_subcommand("converge", "Observed orders under dyadic refinement");
  add_common(converge, conv_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*list) {
      std::cout << skewlie::registry_listing(list_json);
      return kOk;
    }
    if (*run) {
      if (run_opts.config.empty() && run_opts.experiment.empty()) {
        throw skewlie::ConfigError("run needs --config or --experiment");
      }
      return execute(build_config(run_opts, ""), false);
    }
    return execute(build_config(conv_opts, "convergence"), true);
  } catch (const skewlie::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const skewlie::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const skewlie::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
}
