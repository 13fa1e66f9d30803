#pragma once

#include <memory>

#include "sampler/chain.hpp"
#include "sampler/hamiltonian.hpp"
#include "sampler/random.hpp"
#include "sampler/targets.hpp"

namespace sampler {

/// Outcome of one Metropolis-type transition.
struct StepOutcome {
  Vector next;
  bool accepted = false;
  /// Candidate or acceptance ratio was non-finite; the move was rejected.
  bool divergent = false;
  /// log r; -inf for a zero-density candidate, NaN when undefined.
  double log_ratio = 0.0;
};

/// Accept iff log W < min(0, log r) for W ~ U(0,1). Non-finite log r rejects
/// except +inf.
bool accept_log_ratio(double log_ratio, Rng& rng);

/// Proposal distribution q(. | x).
class Proposal {
 public:
  virtual ~Proposal() = default;
  virtual Vector sample(const Vector& x, Rng& rng) const = 0;
  /// log q(x | x*) - log q(x* | x).
  virtual double log_density_ratio(const Vector& x, const Vector& x_star) const = 0;
};

/// N(x, h I).
class RandomWalkProposal final : public Proposal {
 public:
  explicit RandomWalkProposal(double h);
  Vector sample(const Vector& x, Rng& rng) const override;
  double log_density_ratio(const Vector&, const Vector&) const override { return 0.0; }
  double scale() const { return h_; }

 private:
  double h_;
};

/// N(x + (h/2) grad log pi~(x), h I). A non-finite drift yields a NaN
/// candidate, which mh_step rejects and flags.
class MalaProposal final : public Proposal {
 public:
  MalaProposal(const TargetDensity& target, double h);
  Vector sample(const Vector& x, Rng& rng) const override;
  double log_density_ratio(const Vector& x, const Vector& x_star) const override;
  /// Proposal mean at x.
  Vector mean(const Vector& x) const;
  double scale() const { return h_; }

 private:
  double log_q(const Vector& to, const Vector& from) const;

  const TargetDensity* target_;
  double h_;
};

std::unique_ptr<Proposal> rwm_proposal(double h);
std::unique_ptr<Proposal> mala_proposal(const TargetDensity& target, double h);

/// log r = log pi~(x*) - log pi~(x) + log q(x | x*) - log q(x* | x).
double mh_log_ratio(const TargetDensity& target, const Proposal& proposal, const Vector& x, const Vector& x_star);

StepOutcome mh_step(const TargetDensity& target, const Proposal& proposal, const Vector& x, Rng& rng);

// ---------------------------------------------------------------------------
// Metropolis-Hastings-Green with Jacobians on the augmented space (x, y).

struct AugmentedState {
  Vector x;
  Vector y;
};

/// Self-inverse map g on the augmented space.
class Involution {
 public:
  virtual ~Involution() = default;
  virtual AugmentedState apply(const AugmentedState& z) const = 0;
  virtual double log_abs_det_jacobian(const AugmentedState& z) const = 0;
};

/// Conditional S(. | x) of the auxiliary variable.
class AuxiliaryConditional {
 public:
  virtual ~AuxiliaryConditional() = default;
  virtual Vector sample(const Vector& x, Rng& rng) const = 0;
  /// log s(y | x), normalized.
  virtual double log_density(const Vector& y, const Vector& x) const = 0;
};

class IdentityInvolution final : public Involution {
 public:
  AugmentedState apply(const AugmentedState& z) const override { return z; }
  double log_abs_det_jacobian(const AugmentedState&) const override { return 0.0; }
};

/// (x, y) -> (x, -y).
class MomentumFlipInvolution final : public Involution {
 public:
  AugmentedState apply(const AugmentedState& z) const override { return {z.x, -z.y}; }
  double log_abs_det_jacobian(const AugmentedState&) const override { return 0.0; }
};

/// flip o exact Gaussian flow for time s; one-dimensional only.
class GaussianFlowInvolution final : public Involution {
 public:
  explicit GaussianFlowInvolution(double s) : s_(s) {}
  AugmentedState apply(const AugmentedState& z) const override;
  double log_abs_det_jacobian(const AugmentedState&) const override { return 0.0; }

 private:
  double s_;
};

/// flip o leapfrog. A divergent trajectory maps to a NaN state.
class LeapfrogInvolution final : public Involution {
 public:
  LeapfrogInvolution(const TargetDensity& target, const MassMatrix& mass, LeapfrogConfig cfg);
  AugmentedState apply(const AugmentedState& z) const override;
  double log_abs_det_jacobian(const AugmentedState&) const override { return 0.0; }

 private:
  const TargetDensity* target_;
  const MassMatrix* mass_;
  LeapfrogConfig cfg_;
};

/// Momentum refresh y ~ N(0, M), independent of x.
class GaussianMomentum final : public AuxiliaryConditional {
 public:
  explicit GaussianMomentum(const MassMatrix& mass) : mass_(&mass) {}
  Vector sample(const Vector& x, Rng& rng) const override;
  double log_density(const Vector& y, const Vector& x) const override;

 private:
  const MassMatrix* mass_;
};

/// log r = log pi~(x*) + log s(y*|x*) - log pi~(x) - log s(y|x) + log|det grad g(x, y)|.
double mhgj_log_ratio(const TargetDensity& target, const AuxiliaryConditional& aux, const Involution& g,
                      const AugmentedState& z);

/// Gibbs refresh of y followed by the deterministic involutive proposal.
StepOutcome mhgj_step(const TargetDensity& target, const AuxiliaryConditional& aux, const Involution& g,
                      const Vector& x, Rng& rng);

ChainResult run_mh_chain(const TargetDensity& target, const Proposal& proposal, std::size_t iterations,
                         const Vector& x0, Rng& rng, const ProgressFn& progress = {});

ChainResult run_mhgj_chain(const TargetDensity& target, const AuxiliaryConditional& aux, const Involution& g,
                           std::size_t iterations, const Vector& x0, Rng& rng, const ProgressFn& progress = {});

}  // namespace sampler
