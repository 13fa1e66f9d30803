#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sampler/adapt.hpp"

namespace sampler {

enum class TargetKind { gaussian, logistic };
enum class KernelKind { rwm, mala, ideal_hmc, hmc, mhgj_demo };
enum class TuningMode { manual, automatic };

std::string to_string(TargetKind kind);
std::string to_string(KernelKind kind);
std::string to_string(TuningMode mode);

struct TargetSpec {
  TargetKind kind = TargetKind::gaussian;
  std::size_t dim = 1;
  std::vector<double> variances;  // gaussian; empty means all ones
  std::filesystem::path dataset;  // logistic; resolved against the config file
  std::string response = "type";
  double prior_variance = 100.0;
};

/// Sampler parameters; a variant overrides only the fields it sets.
struct RunSpec {
  std::string label;
  std::optional<double> step_size;
  std::optional<int> num_steps;
  std::optional<double> trajectory_time;
  std::optional<double> proposal_scale;
};

struct TuningSpec {
  TuningMode mode = TuningMode::manual;
  RunSpec parameters;
  std::string mass = "identity";
  std::vector<double> mass_diagonal;
  // automatic mode
  std::size_t warmup = 0;
  MassMode mass_mode = MassMode::diagonal;
  std::optional<double> accept_target;
  bool compare_baseline = false;
};

struct OutputSpec {
  std::optional<std::filesystem::path> directory;
  std::size_t max_lag = 50;
  std::size_t histogram_bins = 50;
  /// One-dimensional (x, p) from which each run also writes its leapfrog path.
  std::optional<std::array<double, 2>> trajectory_start;
  bool suggest_trajectory = false;
};

/// Declarative description of an experiment: one target, one kernel, either
/// manual or automatic tuning, and optional variants that each become a run.
struct ExperimentConfig {
  std::string name;
  std::string description;
  TargetSpec target;
  KernelKind kernel = KernelKind::hmc;
  TuningSpec tuning;
  std::vector<RunSpec> runs;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> initial;
  OutputSpec output;

  /// Runs to execute in manual mode: the variants merged over the tuning
  /// parameters, or a single unnamed run.
  std::vector<RunSpec> resolved_runs() const;
};

/// Parses TOML text. Relative dataset paths resolve against `base_dir`.
/// Throws ConfigError on syntax errors, unknown keys or invalid values.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError describing the first inconsistency found.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);

/// Names of the bundled reproduction configs.
std::vector<std::string> list_experiments();

/// Directory holding the bundled configs.
std::filesystem::path bundled_config_dir();

/// `name_or_path` is either a bundled name or a path to a config file.
/// Unknown names throw ConfigError listing the bundled names.
std::filesystem::path resolve_config_path(const std::string& name_or_path);

}  // namespace sampler
