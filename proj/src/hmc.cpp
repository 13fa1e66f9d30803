#include "sampler/hmc.hpp"

#include <cmath>
#include <limits>

#include "sampler/errors.hpp"
#include "sampler/kernels.hpp"

namespace sampler {

HmcStep hmc_step(const TargetDensity& target, const MassMatrix& mass, const LeapfrogConfig& cfg, const Vector& x,
                 Rng& rng) {
  return hmc_step(target, mass, cfg, x, target.log_density(x), rng);
}

HmcStep hmc_step(const TargetDensity& target, const MassMatrix& mass, const LeapfrogConfig& cfg, const Vector& x,
                 double log_density_x, Rng& rng) {
  HmcStep out{x, false, false, 0.0, log_density_x};
  Vector p = mass.sample_momentum(rng);
  const double h_start = -log_density_x + mass.kinetic_energy(p);

  LeapfrogResult trajectory = leapfrog(target, mass, {x, std::move(p)}, cfg);
  double log_density_star = std::numeric_limits<double>::quiet_NaN();
  if (trajectory.divergent()) {
    out.delta_h = std::numeric_limits<double>::quiet_NaN();
  } else {
    log_density_star = target.log_density(trajectory.state.position);
    // The final momentum flip leaves K unchanged, so it is skipped.
    out.delta_h = -log_density_star + mass.kinetic_energy(trajectory.state.momentum) - h_start;
  }
  out.divergent = trajectory.divergent() || !std::isfinite(out.delta_h) || out.delta_h > kDivergenceThreshold;

  const double log_ratio = out.divergent ? -std::numeric_limits<double>::infinity() : -out.delta_h;
  out.accepted = accept_log_ratio(log_ratio, rng);
  if (out.accepted) {
    out.next = std::move(trajectory.state.position);
    out.log_density = log_density_star;
  }
  return out;
}

ChainResult run_chain(const TargetDensity& target, const MassMatrix& mass, const LeapfrogConfig& cfg,
                      std::size_t iterations, const Vector& x0, Rng& rng, const ProgressFn& progress) {
  cfg.validate();
  if (iterations < 1) throw ContractError("a chain needs at least one iteration");
  if (static_cast<std::size_t>(x0.size()) != target.dim() || mass.dim() != target.dim()) {
    throw ContractError("initial point, mass matrix and target dimensions must agree");
  }
  const double log_density_0 = target.log_density(x0);
  if (!std::isfinite(log_density_0)) throw ContractError("initial point must have positive density");

  ChainResult chain;
  chain.samples.resize(static_cast<Eigen::Index>(iterations), x0.size());
  chain.accepted.reserve(iterations);
  chain.delta_h.reserve(iterations);
  chain.seed = rng.seed();
  chain.coordinate_names = target.coordinate_names();
  chain.config = {"hmc", target.name(), to_string(mass.form()), cfg.step_size, cfg.num_steps,
                  cfg.trajectory_length(), std::nullopt};

  Vector x = x0;
  double log_density_x = log_density_0;
  for (std::size_t t = 0; t < iterations; ++t) {
    HmcStep step = hmc_step(target, mass, cfg, x, log_density_x, rng);
    if (step.accepted) {
      x = std::move(step.next);
      log_density_x = step.log_density;
    }
    chain.samples.row(static_cast<Eigen::Index>(t)) = x.transpose();
    chain.accepted.push_back(step.accepted ? 1 : 0);
    chain.delta_h.push_back(step.delta_h);
    if (step.divergent) chain.divergences.push_back(t);
    if (progress && (t + 1) % 1000 == 0) progress(t + 1);
  }
  return chain;
}

ChainResult ideal_hmc_chain(double s, std::size_t iterations, double x0, Rng& rng, const ProgressFn& progress) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("ideal HMC needs a finite trajectory time s > 0");
  if (iterations < 1) throw ContractError("a chain needs at least one iteration");

  ChainResult chain;
  chain.samples.resize(static_cast<Eigen::Index>(iterations), 1);
  chain.accepted.assign(iterations, 1);
  chain.delta_h.reserve(iterations);
  chain.seed = rng.seed();
  chain.coordinate_names = {"x0"};
  chain.config = {"ideal-hmc", "standard_gaussian", "identity", std::nullopt, std::nullopt, s, std::nullopt};

  PhaseState z{Vector::Constant(1, x0), Vector(1)};
  for (std::size_t t = 0; t < iterations; ++t) {
    z.momentum[0] = rng.normal();
    const double h_start = 0.5 * (z.position[0] * z.position[0] + z.momentum[0] * z.momentum[0]);
    z = gaussian_flow(z, s);
    const double h_end = 0.5 * (z.position[0] * z.position[0] + z.momentum[0] * z.momentum[0]);
    chain.delta_h.push_back(h_end - h_start);
    chain.samples(static_cast<Eigen::Index>(t), 0) = z.position[0];
    if (progress && (t + 1) % 1000 == 0) progress(t + 1);
  }
  return chain;
}

}  // namespace sampler
