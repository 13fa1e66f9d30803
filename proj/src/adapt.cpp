#include "sampler/adapt.hpp"

#include <algorithm>
#include <cmath>

#include "sampler/errors.hpp"
#include "sampler/hmc.hpp"

namespace sampler {

std::string to_string(MassMode mode) { return mode == MassMode::dense ? "dense" : "diagonal"; }

Matrix sample_covariance(const Matrix& samples) {
  if (samples.rows() < 2) throw EstimationError("covariance needs at least two samples");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Matrix centered = samples.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);
}

MassEstimate estimate_mass(const Matrix& samples, MassMode mode, std::optional<double> ridge,
                           std::span<const std::string> names) {
  const Eigen::Index rows = samples.rows();
  const Eigen::Index d = samples.cols();
  if (d == 0) throw EstimationError("samples have no columns");
  if (rows < 2) throw EstimationError("mass estimation needs at least 2 samples, got " + std::to_string(rows));
  if (mode == MassMode::dense && rows < d + 1) {
    throw EstimationError("dense mass estimation needs at least d + 1 = " + std::to_string(d + 1) +
                          " samples, got " + std::to_string(rows));
  }
  if (!samples.allFinite()) throw EstimationError("samples contain non-finite values");

  Matrix covariance = sample_covariance(samples);
  const double lambda = ridge.value_or(1e-8 * covariance.trace() / static_cast<double>(d));
  if (!(lambda >= 0.0)) throw EstimationError("ridge must be non-negative");
  covariance.diagonal().array() += lambda;

  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(covariance(j, j) > 0.0)) {
      const std::string label = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                            : "x" + std::to_string(j);
      throw EstimationError("coordinate " + std::to_string(j) + " (" + label + ") has zero variance");
    }
  }

  if (mode == MassMode::diagonal) {
    MassMatrix mass = MassMatrix::diagonal(covariance.diagonal().cwiseInverse());
    return {mode, std::move(covariance), lambda, std::move(mass)};
  }

  Eigen::LLT<Matrix> factor(covariance);
  if (factor.info() != Eigen::Success) throw EstimationError("regularized covariance is not positive definite");
  Matrix inverse = factor.solve(Matrix::Identity(d, d));
  inverse = 0.5 * (inverse + inverse.transpose());
  try {
    MassMatrix mass = MassMatrix::dense(inverse);
    return {mode, std::move(covariance), lambda, std::move(mass)};
  } catch (const ConfigError& e) {
    throw EstimationError(std::string("inverse covariance rejected: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

StepSizeProbe run_probe(const TargetDensity& target, const MassMatrix& mass, int num_steps, double step_size,
                        const Vector& x0, std::uint64_t base_seed, std::size_t index, std::size_t iterations) {
  Rng stream = Rng::stream(base_seed, index);
  ChainResult chain = run_chain(target, mass, {step_size, num_steps}, iterations, x0, stream);
  return {step_size, chain.acceptance_rate(), chain.divergences.size()};
}

}  // namespace

StepSizeReport tune_step_size(const TargetDensity& target, const MassMatrix& mass, int num_steps,
                              double accept_target, const Vector& x0, Rng& rng, const StepSizeOptions& options) {
  if (!(accept_target > 0.05 && accept_target < 1.0)) {
    throw ContractError("acceptance target must lie in (0.05, 1)");
  }
  if (num_steps < 1) throw ConfigError("step-size tuning needs L >= 1");
  if (options.probe_iterations < 1) throw ConfigError("probe chains need at least one iteration");

  StepSizeReport report;
  report.target_acceptance = accept_target;
  const std::uint64_t base_seed = rng.next_u64();
  auto probe = [&](double step_size) {
    report.probes.push_back(run_probe(target, mass, num_steps, step_size, x0, base_seed, report.probes.size(),
                                      options.probe_iterations));
    return report.probes.back();
  };
  auto close_enough = [&](const StepSizeProbe& p) {
    return std::abs(p.acceptance - accept_target) <= options.stop_tolerance;
  };

  const double initial =
      options.initial_step_size.value_or(0.1 * std::pow(static_cast<double>(target.dim()), -0.25));
  StepSizeProbe current = probe(initial);

  // Bracket: `low` reaches the target, `high` does not.
  std::optional<double> low;
  std::optional<double> high;
  bool done = close_enough(current);
  if (!done) {
    const bool grow = current.acceptance >= accept_target;
    (grow ? low : high) = current.step_size;
    for (int i = 0; i < options.max_doublings && !(low && high); ++i) {
      current = probe(grow ? current.step_size * 2.0 : current.step_size * 0.5);
      (current.acceptance >= accept_target ? low : high) = current.step_size;
      if (close_enough(current)) {
        done = true;
        break;
      }
    }
    if (!done && !(low && high)) {
      report.step_size = current.step_size;
      report.success = false;
      report.message = "could not bracket the acceptance target within " + std::to_string(options.max_doublings) +
                       (grow ? " doublings" : " halvings");
      return report;
    }
  }

  for (int round = 0; !done && round < options.max_bisections; ++round) {
    current = probe(std::sqrt(*low * *high));
    (current.acceptance >= accept_target ? low : high) = current.step_size;
    done = close_enough(current);
  }

  const auto best = std::min_element(report.probes.begin(), report.probes.end(), [&](const auto& a, const auto& b) {
    const double da = std::abs(a.acceptance - accept_target);
    const double db = std::abs(b.acceptance - accept_target);
    return da < db || (da == db && a.step_size > b.step_size);
  });
  report.step_size = best->step_size;
  report.success = std::abs(best->acceptance - accept_target) <= options.accept_tolerance;
  if (!report.success) {
    report.message = "best probe acceptance " + std::to_string(best->acceptance) + " is not within " +
                     std::to_string(options.accept_tolerance) + " of the target";
  }
  return report;
}

// ---------------------------------------------------------------------------

TrajectorySuggestion suggest_trajectory(const TargetDensity& target, const MassMatrix& mass, double step_size,
                                        int budget_gradients, const Vector& x0) {
  LeapfrogConfig{step_size, 1}.validate();
  if (budget_gradients < 1) throw ConfigError("trajectory budget must be at least one gradient");
  if (static_cast<std::size_t>(x0.size()) != target.dim()) throw ContractError("start point has wrong dimension");

  Vector x = x0;
  Vector p = Vector::Zero(x0.size());
  Vector g = target.grad_log_density(x);
  p += 0.5 * step_size * g;  // momentum half a step ahead

  double previous = 0.0;
  for (int k = 1; k <= budget_gradients; ++k) {
    x += step_size * mass.velocity(p);
    if (!x.allFinite()) return {std::max(1, k - 1), (k - 1) * step_size, true};
    g = target.grad_log_density(x);
    if (!g.allFinite()) return {std::max(1, k - 1), (k - 1) * step_size, true};
    const Vector synced = p + 0.5 * step_size * g;
    const double criterion = (x - x0).dot(mass.velocity(synced));
    if (criterion < 0.0) {
      const double fraction = previous / (previous - criterion);
      const double uturn_time = step_size * (static_cast<double>(k - 1) + fraction);
      const auto steps = static_cast<int>(std::lround(uturn_time / step_size));
      return {std::clamp(steps, 1, budget_gradients), uturn_time, false};
    }
    previous = criterion;
    p = synced + 0.5 * step_size * g;
  }
  return {budget_gradients, budget_gradients * step_size, true};
}

double default_accept_target(std::size_t dim) { return dim < 20 ? 0.85 : 0.651; }

WarmupResult warmup_pipeline(const TargetDensity& target, std::size_t warmup_iterations, MassMode mode,
                             double accept_target, Rng& rng, const WarmupOptions& options) {
  if (warmup_iterations < 1000) throw ContractError("warmup needs at least 1000 iterations");
  if (!(accept_target > 0.05 && accept_target < 1.0)) {
    throw ContractError("acceptance target must lie in (0.05, 1)");
  }
  const Vector x0 = options.x0.value_or(Vector::Zero(static_cast<Eigen::Index>(target.dim())));
  const std::uint64_t base_seed = rng.next_u64();
  const MassMatrix identity = MassMatrix::identity(target.dim());

  // Stage 1: naive HMC.
  const double stage1_target = accept_target + 0.5 * (1.0 - accept_target);
  Rng tune1 = Rng::stream(base_seed, 0);
  StepSizeReport stage1 =
      tune_step_size(target, identity, options.stage1_num_steps, stage1_target, x0, tune1, options.step_size);
  const LeapfrogConfig stage1_config{stage1.step_size, options.stage1_num_steps};
  Rng warm = Rng::stream(base_seed, 1);
  ChainResult warmup = run_chain(target, identity, stage1_config, warmup_iterations, x0, warm, options.progress);

  // Stage 2: precondition from the second half of the warmup draws.
  const Eigen::Index keep = static_cast<Eigen::Index>(warmup_iterations / 2);
  const auto names = target.coordinate_names();
  MassEstimate estimate = estimate_mass(warmup.samples.bottomRows(keep), mode, std::nullopt, names);
  const Vector restart = warmup.samples.bottomRows(1).transpose();
  Rng tune2 = Rng::stream(base_seed, 2);
  StepSizeReport stage2 = tune_step_size(target, estimate.mass, options.stage1_num_steps, accept_target, restart,
                                         tune2, options.step_size);

  LeapfrogConfig config{stage2.step_size, options.stage1_num_steps};
  std::optional<TrajectorySuggestion> suggestion;
  if (options.num_steps) {
    config.num_steps = *options.num_steps;
  } else {
    suggestion = suggest_trajectory(target, estimate.mass, stage2.step_size, options.trajectory_budget, restart);
    config.num_steps = suggestion->num_steps;
  }
  MassMatrix mass = estimate.mass;
  return {std::move(mass), config,  std::move(warmup), stage1_config, std::move(stage1), std::move(stage2),
          std::move(estimate), suggestion};
}

}  // namespace sampler
