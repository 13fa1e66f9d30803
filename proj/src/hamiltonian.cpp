#include "sampler/hamiltonian.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "sampler/errors.hpp"

namespace sampler {

MassMatrix MassMatrix::identity(std::size_t dim) {
  if (dim == 0) throw ConfigError("mass matrix dimension must be >= 1");
  return MassMatrix(Form::identity, dim);
}

MassMatrix MassMatrix::diagonal(Vector entries) {
  if (entries.size() == 0) throw ConfigError("mass matrix dimension must be >= 1");
  if (!entries.allFinite() || !(entries.array() > 0.0).all()) {
    throw ConfigError("diagonal mass entries must be finite and strictly positive");
  }
  MassMatrix m(Form::diagonal, static_cast<std::size_t>(entries.size()));
  m.inverse_diagonal_ = entries.cwiseInverse();
  m.sqrt_diagonal_ = entries.cwiseSqrt();
  m.diagonal_ = std::move(entries);
  return m;
}

MassMatrix MassMatrix::dense(const Matrix& matrix) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw ConfigError("dense mass matrix must be square and non-empty");
  }
  if (!matrix.allFinite() || !matrix.isApprox(matrix.transpose(), 1e-12)) {
    throw ConfigError("dense mass matrix must be finite and symmetric");
  }
  MassMatrix m(Form::dense, static_cast<std::size_t>(matrix.rows()));
  m.dense_ = matrix;
  m.factor_.compute(matrix);
  if (m.factor_.info() != Eigen::Success || !(m.factor_.matrixLLT().diagonal().array() > 0.0).all()) {
    throw ConfigError("dense mass matrix is not positive definite");
  }
  return m;
}

void MassMatrix::require_dim(const Vector& p) const {
  if (static_cast<std::size_t>(p.size()) != dim_) {
    throw ContractError("momentum has dimension " + std::to_string(p.size()) + ", mass matrix has " +
                        std::to_string(dim_));
  }
}

double MassMatrix::kinetic_energy(const Vector& p) const {
  require_dim(p);
  switch (form_) {
    case Form::identity:
      return 0.5 * p.squaredNorm();
    case Form::diagonal:
      return 0.5 * p.cwiseProduct(p).dot(inverse_diagonal_);
    case Form::dense:
      // p^T M^-1 p = |L^-1 p|^2 with M = L L^T.
      return 0.5 * factor_.matrixL().solve(p).squaredNorm();
  }
  return 0.0;
}

Vector MassMatrix::velocity(const Vector& p) const {
  require_dim(p);
  switch (form_) {
    case Form::identity:
      return p;
    case Form::diagonal:
      return p.cwiseProduct(inverse_diagonal_);
    case Form::dense:
      return factor_.solve(p);
  }
  return p;
}

Vector MassMatrix::sample_momentum(Rng& rng) const {
  Vector z = rng.normal_vector(static_cast<Eigen::Index>(dim_));
  switch (form_) {
    case Form::identity:
      return z;
    case Form::diagonal:
      return z.cwiseProduct(sqrt_diagonal_);
    case Form::dense:
      return factor_.matrixL() * z;
  }
  return z;
}

double MassMatrix::log_determinant() const {
  switch (form_) {
    case Form::identity:
      return 0.0;
    case Form::diagonal:
      return diagonal_.array().log().sum();
    case Form::dense:
      return 2.0 * factor_.matrixLLT().diagonal().array().log().sum();
  }
  return 0.0;
}

Matrix MassMatrix::matrix() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  switch (form_) {
    case Form::identity:
      return Matrix::Identity(n, n);
    case Form::diagonal:
      return diagonal_.asDiagonal();
    case Form::dense:
      return dense_;
  }
  return Matrix::Identity(n, n);
}

Vector MassMatrix::diagonal_entries() const {
  switch (form_) {
    case Form::identity:
      return Vector::Ones(static_cast<Eigen::Index>(dim_));
    case Form::diagonal:
      return diagonal_;
    case Form::dense:
      return dense_.diagonal();
  }
  return {};
}

std::string to_string(MassMatrix::Form form) {
  switch (form) {
    case MassMatrix::Form::identity:
      return "identity";
    case MassMatrix::Form::diagonal:
      return "diagonal";
    case MassMatrix::Form::dense:
      return "dense";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

double hamiltonian(const TargetDensity& target, const MassMatrix& mass, const PhaseState& z) {
  const double log_density = target.log_density(z.position);
  if (log_density == -std::numeric_limits<double>::infinity()) return std::numeric_limits<double>::infinity();
  return -log_density + mass.kinetic_energy(z.momentum);
}

PhaseState momentum_flip(const PhaseState& z) { return {z.position, -z.momentum}; }

PhaseState gaussian_flow(const PhaseState& z, double s) {
  if (z.position.size() != 1 || z.momentum.size() != 1) {
    throw UnsupportedConfiguration("the analytic Gaussian flow is only available in one dimension");
  }
  const double c = std::cos(s);
  const double sn = std::sin(s);
  const double x = z.position[0];
  const double p = z.momentum[0];
  PhaseState out{Vector(1), Vector(1)};
  out.position[0] = x * c + p * sn;
  out.momentum[0] = -x * sn + p * c;
  return out;
}

void LeapfrogConfig::validate() const {
  if (!std::isfinite(step_size) || !(step_size > 0.0)) {
    throw ConfigError("leapfrog step size must be finite and positive");
  }
  if (num_steps < 1) throw ConfigError("leapfrog needs at least one step");
}

LeapfrogResult leapfrog(const TargetDensity& target, const MassMatrix& mass, const PhaseState& z,
                        const LeapfrogConfig& cfg) {
  cfg.validate();
  if (z.position.size() != z.momentum.size()) throw ContractError("position and momentum lengths differ");

  const double eps = cfg.step_size;
  LeapfrogResult result{z, std::nullopt, 0};
  Vector& x = result.state.position;
  Vector& p = result.state.momentum;

  auto gradient = [&](int step) -> std::optional<Vector> {
    if (!x.allFinite()) {
      result.divergence_step = step;
      return std::nullopt;
    }
    Vector g = target.grad_log_density(x);
    ++result.gradient_evaluations;
    if (!g.allFinite()) {
      result.divergence_step = step;
      return std::nullopt;
    }
    return g;
  };

  // grad U = -grad log pi~, so a kick p -= c grad U is p += c grad log pi~.
  auto g = gradient(0);
  if (!g) return result;
  p += 0.5 * eps * *g;
  for (int step = 1; step <= cfg.num_steps; ++step) {
    x += eps * mass.velocity(p);
    g = gradient(step);
    if (!g) return result;
    p += (step == cfg.num_steps ? 0.5 * eps : eps) * *g;
    if (!p.allFinite()) {
      result.divergence_step = step;
      return result;
    }
  }
  return result;
}

double phase_map_jacobian_logdet(const PhaseMap& map, const PhaseState& z, double h) {
  const Eigen::Index d = z.position.size();
  Vector flat(2 * d);
  flat << z.position, z.momentum;

  auto apply = [&](const Vector& v) {
    PhaseState out = map({v.head(d), v.tail(d)});
    Vector w(2 * d);
    w << out.position, out.momentum;
    return w;
  };

  Matrix jacobian(2 * d, 2 * d);
  Vector probe = flat;
  for (Eigen::Index j = 0; j < 2 * d; ++j) {
    probe[j] = flat[j] + h;
    const Vector up = apply(probe);
    probe[j] = flat[j] - h;
    const Vector down = apply(probe);
    probe[j] = flat[j];
    jacobian.col(j) = (up - down) / (2.0 * h);
  }
  return std::log(std::abs(jacobian.fullPivLu().determinant()));
}

double leapfrog_jacobian_logdet(const TargetDensity& target, const MassMatrix& mass, const PhaseState& z,
                                const LeapfrogConfig& cfg, double h) {
  return phase_map_jacobian_logdet(
      [&](const PhaseState& s) { return leapfrog(target, mass, s, cfg).state; }, z, h);
}

}  // namespace sampler
