#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sampler/chain.hpp"
#include "sampler/diagnostics.hpp"
#include "sampler/hamiltonian.hpp"

namespace sampler {

/// 17 significant digits, enough to round-trip any double; "nan", "inf"
/// and "-inf" for non-finite values.
std::string format_double(double value);

/// One header row of coordinate names, then one row per iteration.
void write_samples_csv(const std::filesystem::path& path, const ChainResult& chain);

/// coordinate, mean, variance, q05, q50, q95, ess (empty when degenerate).
void write_summary_csv(const std::filesystem::path& path, const SummaryReport& report);

/// lag followed by one column per coordinate; degenerate coordinates are left out.
void write_acf_csv(const std::filesystem::path& path, const SummaryReport& report);

/// coordinate, center, count, density (count normalized to unit area).
void write_density_csv(const std::filesystem::path& path, const ChainResult& chain, std::size_t bins);

/// step, time, position..., momentum..., hamiltonian for one leapfrog path.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<PhaseState>& path_states,
                          const std::vector<double>& energies, double step_size);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace sampler
