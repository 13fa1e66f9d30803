#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sampler/targets.hpp"

namespace sampler {

/// What produced a chain. Fields that do not apply to a kernel stay unset.
struct ChainConfig {
  std::string kernel;
  std::string target;
  std::string mass_form = "identity";
  std::optional<double> step_size;
  std::optional<int> num_steps;
  std::optional<double> trajectory_time;
  std::optional<double> proposal_scale;
};

/// T post-transition positions plus per-iteration bookkeeping. Momenta are
/// never stored.
struct ChainResult {
  Matrix samples;                       // T x d
  std::vector<std::uint8_t> accepted;   // length T
  std::vector<std::size_t> divergences; // iteration indices
  std::vector<double> delta_h;          // length T for Hamiltonian kernels, empty otherwise
  std::uint64_t seed = 0;
  ChainConfig config;
  std::vector<std::string> coordinate_names;

  std::size_t iterations() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(samples.cols()); }
  double acceptance_rate() const;
};

/// Called with the number of completed iterations every 1000 iterations.
using ProgressFn = std::function<void(std::size_t)>;

}  // namespace sampler
