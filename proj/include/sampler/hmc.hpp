#pragma once

#include "sampler/chain.hpp"
#include "sampler/hamiltonian.hpp"
#include "sampler/random.hpp"
#include "sampler/targets.hpp"

namespace sampler {

/// Energy increase beyond which a trajectory counts as divergent.
inline constexpr double kDivergenceThreshold = 1000.0;

struct HmcStep {
  Vector next;
  bool accepted = false;
  bool divergent = false;
  /// H(x*, p*) - H(x, p); NaN or +inf when the trajectory diverged.
  double delta_h = 0.0;
  /// log pi~ at `next`.
  double log_density = 0.0;
};

/// One leapfrog HMC transition: p ~ N(0, M), L leapfrog steps, accept with
/// probability min(1, exp(-delta_h)). Divergent trajectories are rejected.
HmcStep hmc_step(const TargetDensity& target, const MassMatrix& mass, const LeapfrogConfig& cfg, const Vector& x,
                 Rng& rng);

/// Same, reusing the known log pi~(x).
HmcStep hmc_step(const TargetDensity& target, const MassMatrix& mass, const LeapfrogConfig& cfg, const Vector& x,
                 double log_density_x, Rng& rng);

/// T HMC transitions from x0; row t of the samples is the state after
/// transition t + 1.
ChainResult run_chain(const TargetDensity& target, const MassMatrix& mass, const LeapfrogConfig& cfg,
                      std::size_t iterations, const Vector& x0, Rng& rng, const ProgressFn& progress = {});

/// HMC on the standard normal with the exact flow for time s. Every proposal
/// is accepted.
ChainResult ideal_hmc_chain(double s, std::size_t iterations, double x0, Rng& rng, const ProgressFn& progress = {});

}  // namespace sampler
