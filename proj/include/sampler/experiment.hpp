#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sampler/adapt.hpp"
#include "sampler/chain.hpp"
#include "sampler/config.hpp"
#include "sampler/diagnostics.hpp"

namespace sampler {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  /// Exact output directory; overrides the config and $SAMPLER_OUT.
  std::optional<std::filesystem::path> out_dir;
  /// Progress lines go here when set.
  std::ostream* log = nullptr;
  bool write_outputs = true;
};

struct RunRecord {
  std::string label;
  ChainResult chain;
  SummaryReport summary;
  double wall_seconds = 0.0;
  std::optional<TrajectorySuggestion> suggestion;
};

struct ExperimentResult {
  std::filesystem::path directory;
  std::vector<RunRecord> runs;
  std::optional<WarmupResult> warmup;
  nlohmann::json meta;
  bool success = true;
  std::string message;
};

std::unique_ptr<TargetDensity> make_target(const TargetSpec& spec);

/// --out if given, else output.directory, else $SAMPLER_OUT/<name>, else out/<name>.
std::filesystem::path output_directory(const ExperimentConfig& config, const RunOptions& options = {});

/// Runs every variant of the experiment. Run k draws from stream k of the
/// seed. A failed automatic tuning is reported through `success`, with the
/// tuning history still written to meta.json.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace sampler
