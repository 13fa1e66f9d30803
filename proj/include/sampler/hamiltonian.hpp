#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "sampler/random.hpp"
#include "sampler/targets.hpp"

namespace sampler {

/// Position-momentum pair in R^d x R^d.
struct PhaseState {
  Vector position;
  Vector momentum;
};

/// Mass matrix M of the momentum distribution N(0, M).
///
/// Dense matrices are Cholesky-factored once at construction; M^-1 p is
/// always a triangular solve, never an explicit inverse.
class MassMatrix {
 public:
  enum class Form { identity, diagonal, dense };

  static MassMatrix identity(std::size_t dim);
  /// Throws ConfigError unless every entry is finite and > 0.
  static MassMatrix diagonal(Vector entries);
  /// Throws ConfigError unless `m` is symmetric positive definite.
  static MassMatrix dense(const Matrix& m);

  Form form() const { return form_; }
  std::size_t dim() const { return dim_; }

  /// 1/2 p^T M^-1 p.
  double kinetic_energy(const Vector& p) const;
  /// M^-1 p.
  Vector velocity(const Vector& p) const;
  /// Draw from N(0, M).
  Vector sample_momentum(Rng& rng) const;
  /// log det M.
  double log_determinant() const;
  /// Dense copy of M.
  Matrix matrix() const;
  /// Diagonal of M.
  Vector diagonal_entries() const;

 private:
  MassMatrix(Form form, std::size_t dim) : form_(form), dim_(dim) {}
  void require_dim(const Vector& p) const;

  Form form_;
  std::size_t dim_;
  Vector diagonal_;
  Vector inverse_diagonal_;
  Vector sqrt_diagonal_;
  Matrix dense_;
  Eigen::LLT<Matrix> factor_;
};

std::string to_string(MassMatrix::Form form);

inline double kinetic_energy(const MassMatrix& mass, const Vector& p) { return mass.kinetic_energy(p); }
inline Vector sample_momentum(const MassMatrix& mass, Rng& rng) { return mass.sample_momentum(rng); }

/// H(x, p) = -log pi~(x) + K(p); +inf outside the support.
double hamiltonian(const TargetDensity& target, const MassMatrix& mass, const PhaseState& z);

/// (x, p) -> (x, -p).
PhaseState momentum_flip(const PhaseState& z);

/// Exact flow of H = x^2/2 + p^2/2 for time s (standard Gaussian, unit mass).
/// Throws UnsupportedConfiguration unless the state is one-dimensional.
PhaseState gaussian_flow(const PhaseState& z, double s);

/// Step size and number of leapfrog steps; s = L * eps.
struct LeapfrogConfig {
  double step_size = 0.1;
  int num_steps = 10;

  double trajectory_length() const { return step_size * num_steps; }
  /// Throws ConfigError unless eps is finite and > 0 and L >= 1.
  void validate() const;
};

struct LeapfrogResult {
  PhaseState state;
  /// 1-based leapfrog step at which a non-finite value appeared.
  std::optional<int> divergence_step;
  int gradient_evaluations = 0;

  bool divergent() const { return divergence_step.has_value(); }
};

/// L leapfrog steps with fused interior kicks:
///   p -= eps/2 grad U(x); then L times { x += eps M^-1 p; kick }, where the
/// interior kicks are full (eps) and the last one is a half kick.
/// Uses exactly L + 1 gradient evaluations when no divergence occurs.
LeapfrogResult leapfrog(const TargetDensity& target, const MassMatrix& mass, const PhaseState& z,
                        const LeapfrogConfig& cfg);

using PhaseMap = std::function<PhaseState(const PhaseState&)>;

/// log |det J| of a phase-space map at z, J from central differences with step h.
double phase_map_jacobian_logdet(const PhaseMap& map, const PhaseState& z, double h = 1e-5);

/// Finite-difference log |det| of the leapfrog map; diagnostic for small d.
double leapfrog_jacobian_logdet(const TargetDensity& target, const MassMatrix& mass, const PhaseState& z,
                                const LeapfrogConfig& cfg, double h = 1e-5);

}  // namespace sampler
