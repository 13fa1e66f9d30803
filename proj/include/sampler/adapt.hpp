#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sampler/chain.hpp"
#include "sampler/hamiltonian.hpp"
#include "sampler/random.hpp"
#include "sampler/targets.hpp"

namespace sampler {

enum class MassMode { diagonal, dense };

std::string to_string(MassMode mode);

/// Sample covariance (1 / (T - 1)) sum (x_t - mean)(x_t - mean)^T of the rows.
Matrix sample_covariance(const Matrix& samples);

struct MassEstimate {
  MassMode mode;
  /// Regularized covariance estimate (full matrix in both modes).
  Matrix covariance;
  double ridge = 0.0;
  MassMatrix mass;
};

/// Mass matrix from warmup draws: M = (Sigma + ridge I)^-1 (dense) or
/// diag(1 / diag(Sigma + ridge I)) (diagonal). The default ridge is
/// 1e-8 * trace(Sigma) / d. Throws EstimationError when there are too few
/// rows or a coordinate has zero variance after regularization.
MassEstimate estimate_mass(const Matrix& samples, MassMode mode, std::optional<double> ridge = std::nullopt,
                           std::span<const std::string> names = {});

struct StepSizeProbe {
  double step_size;
  double acceptance;
  std::size_t divergences;
};

struct StepSizeReport {
  double step_size = 0.0;
  double target_acceptance = 0.0;
  std::vector<StepSizeProbe> probes;
  bool success = false;
  std::string message;
};

struct StepSizeOptions {
  std::size_t probe_iterations = 500;
  int max_doublings = 40;
  int max_bisections = 20;
  /// Bisection stops once a probe lands this close to the target.
  double stop_tolerance = 0.01;
  /// A report succeeds when the chosen probe is this close to the target.
  double accept_tolerance = 0.05;
  /// Defaults to 0.1 * d^(-1/4).
  std::optional<double> initial_step_size;
};

/// Bracket-and-bisect search on log eps for the step size whose probe chains
/// reach `accept_target`. Each probe is a fresh chain from x0 on its own
/// stream. A failed search is reported, not thrown.
StepSizeReport tune_step_size(const TargetDensity& target, const MassMatrix& mass, int num_steps,
                              double accept_target, const Vector& x0, Rng& rng, const StepSizeOptions& options = {});

struct TrajectorySuggestion {
  int num_steps = 1;
  /// Interpolated time of the first U-turn; budget * eps when truncated.
  double uturn_time = 0.0;
  bool truncated = false;
};

/// Releases the particle from rest at x0 and integrates until the
/// displacement x_t - x0 and the velocity M^-1 p_t point apart. Starting at
/// rest puts that turn at the opposite turning point, i.e. half a period.
/// Returns L = clamp(round(s* / eps), 1, budget).
TrajectorySuggestion suggest_trajectory(const TargetDensity& target, const MassMatrix& mass, double step_size,
                                        int budget_gradients, const Vector& x0);

/// 0.85 below 20 dimensions, 0.651 from there on.
double default_accept_target(std::size_t dim);

struct WarmupOptions {
  int stage1_num_steps = 20;
  /// Hold L at this value instead of using the U-turn suggestion.
  std::optional<int> num_steps;
  int trajectory_budget = 1000;
  std::optional<Vector> x0;
  StepSizeOptions step_size;
  ProgressFn progress;
};

struct WarmupResult {
  MassMatrix mass;
  LeapfrogConfig config;
  ChainResult warmup;
  LeapfrogConfig stage1_config;
  StepSizeReport stage1_tuning;
  StepSizeReport stage2_tuning;
  MassEstimate estimate;
  std::optional<TrajectorySuggestion> trajectory;

  bool success() const { return stage1_tuning.success && stage2_tuning.success; }
};

/// Two-stage warmup. Stage 1 tunes eps for an identity-mass HMC at a
/// conservative acceptance target (halfway between `accept_target` and 1)
/// and runs it for `warmup_iterations`. Stage 2 estimates the mass from the
/// second half of that run, re-tunes eps at `accept_target` and picks L.
WarmupResult warmup_pipeline(const TargetDensity& target, std::size_t warmup_iterations, MassMode mode,
                             double accept_target, Rng& rng, const WarmupOptions& options = {});

}  // namespace sampler
