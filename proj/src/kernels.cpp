#include "sampler/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "sampler/errors.hpp"

namespace sampler {

double ChainResult::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  std::size_t count = 0;
  for (auto a : accepted) count += a;
  return static_cast<double>(count) / static_cast<double>(accepted.size());
}

bool accept_log_ratio(double log_ratio, Rng& rng) {
  const double log_w = std::log(rng.uniform());
  if (std::isnan(log_ratio)) return false;
  return log_w < std::min(0.0, log_ratio);
}

// ---------------------------------------------------------------------------

RandomWalkProposal::RandomWalkProposal(double h) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("random-walk scale h must be finite and positive");
}

Vector RandomWalkProposal::sample(const Vector& x, Rng& rng) const {
  return x + std::sqrt(h_) * rng.normal_vector(x.size());
}

MalaProposal::MalaProposal(const TargetDensity& target, double h) : target_(&target), h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("MALA scale h must be finite and positive");
}

Vector MalaProposal::mean(const Vector& x) const {
  return x + 0.5 * h_ * target_->grad_log_density(x);
}

Vector MalaProposal::sample(const Vector& x, Rng& rng) const {
  Vector noise = rng.normal_vector(x.size());
  Vector m = mean(x);
  if (!m.allFinite()) return Vector::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
  return m + std::sqrt(h_) * noise;
}

double MalaProposal::log_q(const Vector& to, const Vector& from) const {
  return -(to - mean(from)).squaredNorm() / (2.0 * h_);
}

double MalaProposal::log_density_ratio(const Vector& x, const Vector& x_star) const {
  if (x == x_star) return 0.0;
  return log_q(x, x_star) - log_q(x_star, x);
}

std::unique_ptr<Proposal> rwm_proposal(double h) { return std::make_unique<RandomWalkProposal>(h); }

std::unique_ptr<Proposal> mala_proposal(const TargetDensity& target, double h) {
  return std::make_unique<MalaProposal>(target, h);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double mh_log_ratio_cached(const TargetDensity& target, const Proposal& proposal, const Vector& x,
                           double log_density_x, const Vector& x_star) {
  const double log_density_star = target.log_density(x_star);
  if (log_density_star == kNegInf) return kNegInf;
  return log_density_star - log_density_x + proposal.log_density_ratio(x, x_star);
}

StepOutcome mh_step_cached(const TargetDensity& target, const Proposal& proposal, const Vector& x,
                           double log_density_x, Rng& rng, double& log_density_next) {
  StepOutcome out{x, false, false, 0.0};
  Vector candidate = proposal.sample(x, rng);
  if (!candidate.allFinite()) {
    out.divergent = true;
    out.log_ratio = std::numeric_limits<double>::quiet_NaN();
    accept_log_ratio(out.log_ratio, rng);
    log_density_next = log_density_x;
    return out;
  }
  out.log_ratio = mh_log_ratio_cached(target, proposal, x, log_density_x, candidate);
  out.divergent = std::isnan(out.log_ratio);
  out.accepted = accept_log_ratio(out.log_ratio, rng);
  if (out.accepted) {
    log_density_next = target.log_density(candidate);
    out.next = std::move(candidate);
  } else {
    log_density_next = log_density_x;
  }
  return out;
}

}  // namespace

double mh_log_ratio(const TargetDensity& target, const Proposal& proposal, const Vector& x, const Vector& x_star) {
  return mh_log_ratio_cached(target, proposal, x, target.log_density(x), x_star);
}

StepOutcome mh_step(const TargetDensity& target, const Proposal& proposal, const Vector& x, Rng& rng) {
  double unused = 0.0;
  return mh_step_cached(target, proposal, x, target.log_density(x), rng, unused);
}

// ---------------------------------------------------------------------------

AugmentedState GaussianFlowInvolution::apply(const AugmentedState& z) const {
  PhaseState moved = momentum_flip(gaussian_flow({z.x, z.y}, s_));
  return {std::move(moved.position), std::move(moved.momentum)};
}

LeapfrogInvolution::LeapfrogInvolution(const TargetDensity& target, const MassMatrix& mass, LeapfrogConfig cfg)
    : target_(&target), mass_(&mass), cfg_(cfg) {
  cfg_.validate();
}

AugmentedState LeapfrogInvolution::apply(const AugmentedState& z) const {
  LeapfrogResult r = leapfrog(*target_, *mass_, {z.x, z.y}, cfg_);
  if (r.divergent()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {Vector::Constant(z.x.size(), nan), Vector::Constant(z.y.size(), nan)};
  }
  return {std::move(r.state.position), -r.state.momentum};
}

Vector GaussianMomentum::sample(const Vector&, Rng& rng) const { return mass_->sample_momentum(rng); }

double GaussianMomentum::log_density(const Vector& y, const Vector&) const {
  const double d = static_cast<double>(mass_->dim());
  return -mass_->kinetic_energy(y) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + mass_->log_determinant());
}

namespace {

double mhgj_log_ratio_cached(const TargetDensity& target, const AuxiliaryConditional& aux, const Involution& g,
                             const AugmentedState& z, double log_density_x, AugmentedState& moved) {
  moved = g.apply(z);
  if (!moved.x.allFinite() || !moved.y.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  const double log_density_star = target.log_density(moved.x);
  if (log_density_star == kNegInf) return kNegInf;
  return log_density_star + aux.log_density(moved.y, moved.x) - log_density_x - aux.log_density(z.y, z.x) +
         g.log_abs_det_jacobian(z);
}

}  // namespace

double mhgj_log_ratio(const TargetDensity& target, const AuxiliaryConditional& aux, const Involution& g,
                      const AugmentedState& z) {
  AugmentedState moved;
  return mhgj_log_ratio_cached(target, aux, g, z, target.log_density(z.x), moved);
}

StepOutcome mhgj_step(const TargetDensity& target, const AuxiliaryConditional& aux, const Involution& g,
                      const Vector& x, Rng& rng) {
  StepOutcome out{x, false, false, 0.0};
  AugmentedState z{x, aux.sample(x, rng)};
  AugmentedState moved;
  out.log_ratio = mhgj_log_ratio_cached(target, aux, g, z, target.log_density(x), moved);
  out.divergent = std::isnan(out.log_ratio);
  out.accepted = accept_log_ratio(out.log_ratio, rng);
  if (out.accepted) out.next = std::move(moved.x);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ChainResult start_chain(const TargetDensity& target, std::size_t iterations, const Vector& x0, Rng& rng) {
  if (iterations < 1) throw ContractError("a chain needs at least one iteration");
  if (static_cast<std::size_t>(x0.size()) != target.dim()) throw ContractError("initial point has wrong dimension");
  if (!std::isfinite(target.log_density(x0))) throw ContractError("initial point must have positive density");
  ChainResult chain;
  chain.samples.resize(static_cast<Eigen::Index>(iterations), x0.size());
  chain.accepted.reserve(iterations);
  chain.seed = rng.seed();
  chain.coordinate_names = target.coordinate_names();
  chain.config.target = target.name();
  return chain;
}

void report(const ProgressFn& progress, std::size_t done) {
  if (progress && done % 1000 == 0) progress(done);
}

}  // namespace

ChainResult run_mh_chain(const TargetDensity& target, const Proposal& proposal, std::size_t iterations,
                         const Vector& x0, Rng& rng, const ProgressFn& progress) {
  ChainResult chain = start_chain(target, iterations, x0, rng);
  if (const auto* rw = dynamic_cast<const RandomWalkProposal*>(&proposal)) {
    chain.config.kernel = "rwm";
    chain.config.proposal_scale = rw->scale();
  } else if (const auto* mala = dynamic_cast<const MalaProposal*>(&proposal)) {
    chain.config.kernel = "mala";
    chain.config.proposal_scale = mala->scale();
  } else {
    chain.config.kernel = "mh";
  }

  Vector x = x0;
  double log_density_x = target.log_density(x);
  for (std::size_t t = 0; t < iterations; ++t) {
    double log_density_next = log_density_x;
    StepOutcome step = mh_step_cached(target, proposal, x, log_density_x, rng, log_density_next);
    x = std::move(step.next);
    log_density_x = log_density_next;
    chain.samples.row(static_cast<Eigen::Index>(t)) = x.transpose();
    chain.accepted.push_back(step.accepted ? 1 : 0);
    if (step.divergent) chain.divergences.push_back(t);
    report(progress, t + 1);
  }
  return chain;
}

ChainResult run_mhgj_chain(const TargetDensity& target, const AuxiliaryConditional& aux, const Involution& g,
                           std::size_t iterations, const Vector& x0, Rng& rng, const ProgressFn& progress) {
  ChainResult chain = start_chain(target, iterations, x0, rng);
  chain.config.kernel = "mhgj";
  Vector x = x0;
  for (std::size_t t = 0; t < iterations; ++t) {
    StepOutcome step = mhgj_step(target, aux, g, x, rng);
    x = std::move(step.next);
    chain.samples.row(static_cast<Eigen::Index>(t)) = x.transpose();
    chain.accepted.push_back(step.accepted ? 1 : 0);
    if (step.divergent) chain.divergences.push_back(t);
    report(progress, t + 1);
  }
  return chain;
}

}  // namespace sampler
