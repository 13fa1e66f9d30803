#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sampler/adapt.hpp"
#include "sampler/errors.hpp"
#include "sampler/random.hpp"
#include "sampler/targets.hpp"
#include "support.hpp"

using namespace sampler;

namespace {

// Mean first, then centered cross products.
Matrix two_pass_covariance(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index t = 0; t < n; ++t) mean[j] += x(t, j);
    mean[j] /= static_cast<double>(n);
  }
  Matrix c = Matrix::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      for (Eigen::Index t = 0; t < n; ++t) c(a, b) += (x(t, a) - mean[a]) * (x(t, b) - mean[b]);
      c(a, b) /= static_cast<double>(n - 1);
    }
  return c;
}

Matrix gaussian_draws(const Vector& sd, Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, sd.size());
  for (Eigen::Index t = 0; t < n; ++t) x.row(t) = rng.normal_vector(sd.size()).cwiseProduct(sd).transpose();
  return x;
}

}  // namespace

TEST_CASE("two-point covariance by hand") {
  Matrix x(2, 1);
  x << 0.0, 2.0;
  const MassEstimate e = estimate_mass(x, MassMode::diagonal, 0.0);
  CHECK(e.covariance(0, 0) == 2.0);
  CHECK(e.mass.diagonal_entries()[0] == 0.5);
  const MassEstimate d = estimate_mass(x, MassMode::diagonal);
  CHECK(d.ridge == doctest::Approx(2e-8));
  CHECK(d.mass.diagonal_entries()[0] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("sample covariance matches a two-pass oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + trial % 5;
    const Eigen::Index n = 10 + 37 * trial;
    Matrix x(n, d);
    for (Eigen::Index t = 0; t < n; ++t) x.row(t) = (rng.normal_vector(d).array() + 3.0).matrix().transpose();
    const Matrix oracle = two_pass_covariance(x);
    CHECK((sample_covariance(x) - oracle).cwiseAbs().maxCoeff() < 1e-12);
    for (MassMode mode : {MassMode::diagonal, MassMode::dense}) {
      CHECK((estimate_mass(x, mode, 0.0).covariance - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("diagonal mass recovers inverse variances") {
  Vector sd(2);
  sd << 1.0, 10.0;
  const MassEstimate e = estimate_mass(gaussian_draws(sd, 10000, 2), MassMode::diagonal);
  CHECK(e.mass.form() == MassMatrix::Form::diagonal);
  CHECK(e.mass.diagonal_entries()[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(e.mass.diagonal_entries()[1] == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("dense mass inverts the regularized covariance") {
  Rng rng(3);
  Matrix mix(3, 3);
  mix << 1, 0, 0, 0.8, 0.6, 0, -0.3, 0.2, 2.0;
  Matrix x(5000, 3);
  for (Eigen::Index t = 0; t < x.rows(); ++t) x.row(t) = (mix * rng.normal_vector(3)).transpose();
  const MassEstimate e = estimate_mass(x, MassMode::dense);
  CHECK(e.mass.form() == MassMatrix::Form::dense);
  CHECK((e.mass.matrix() * e.covariance - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((e.mass.matrix() - e.mass.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimation errors") {
  Matrix constant = Matrix::Ones(50, 2);
  constant.col(0) = Vector::LinSpaced(50, 0, 1);
  const std::vector<std::string> names{"alpha", "beta"};
  try {
    estimate_mass(constant, MassMode::diagonal, 0.0, names);
    FAIL("expected an estimation error");
  } catch (const EstimationError& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
  }
  CHECK_THROWS_AS(estimate_mass(Matrix::Ones(1, 2), MassMode::diagonal), EstimationError);
  CHECK_THROWS_AS(estimate_mass(Matrix::Random(3, 3), MassMode::dense), EstimationError);
  CHECK_NOTHROW(estimate_mass(Matrix::Random(4, 3), MassMode::dense));
  Matrix bad = Matrix::Random(10, 2);
  bad(4, 1) = std::nan("");
  CHECK_THROWS_AS(estimate_mass(bad, MassMode::diagonal), EstimationError);
}

TEST_CASE("step size search lands near known settings") {
  const GaussianTarget g = standard_gaussian(1);
  const MassMatrix id = MassMatrix::identity(1);
  Rng rng(4);
  const StepSizeReport r90 = tune_step_size(g, id, 10, 0.90, Vector::Zero(1), rng);
  // At L = 10 the acceptance curve has leapfrog resonances and crosses 0.90
  // between 1.4 and 1.7 rather than at 1 itself.
  CHECK(r90.success);
  CHECK(r90.step_size > 0.5);
  CHECK(r90.step_size < 2.0);
  CHECK(r90.target_acceptance == 0.90);

  const StepSizeReport high = tune_step_size(g, id, 10, 0.9996, Vector::Zero(1), rng);
  CHECK(high.success);
  CHECK(high.step_size > 0.05);
  CHECK(high.step_size < 0.2);
}

TEST_CASE("step size search validates its target") {
  const GaussianTarget g = standard_gaussian(1);
  Rng rng(5);
  CHECK_THROWS_AS(tune_step_size(g, MassMatrix::identity(1), 10, 1.0, Vector::Zero(1), rng), ContractError);
  CHECK_THROWS_AS(tune_step_size(g, MassMatrix::identity(1), 10, 0.05, Vector::Zero(1), rng), ContractError);
}

TEST_CASE("probe acceptance falls as eps grows") {
  const LogisticPosterior post(load_dataset(testing::pima_path(), "type"), 100.0);
  for (double target : {0.65, 0.8, 0.95}) {
    for (std::uint64_t seed : {61u, 62u}) {
      Rng rng(seed);
      const StepSizeReport report = tune_step_size(post, MassMatrix::identity(8), 20, target, Vector::Zero(8), rng);
      auto probes = report.probes;
      std::sort(probes.begin(), probes.end(), [](const auto& a, const auto& b) { return a.step_size < b.step_size; });
      for (std::size_t i = 1; i < probes.size(); ++i) CHECK(probes[i].acceptance <= probes[i - 1].acceptance + 0.02);
      CHECK(report.success);
      const auto chosen = std::find_if(report.probes.begin(), report.probes.end(),
                                       [&](const auto& p) { return p.step_size == report.step_size; });
      REQUIRE(chosen != report.probes.end());
      CHECK(std::abs(chosen->acceptance - target) <= 0.05);
    }
  }
}

TEST_CASE("unreachable targets are reported, not thrown") {
  const GaussianTarget g = standard_gaussian(1);
  Rng rng(7);
  StepSizeOptions options;
  options.max_doublings = 2;
  options.initial_step_size = 1e-6;
  const StepSizeReport r = tune_step_size(g, MassMatrix::identity(1), 5, 0.3, Vector::Zero(1), rng, options);
  CHECK_FALSE(r.success);
  CHECK_FALSE(r.message.empty());
  CHECK(r.probes.size() == 3);
}

TEST_CASE("half-period suggestion on the gaussian") {
  const GaussianTarget g = standard_gaussian(1);
  const MassMatrix id = MassMatrix::identity(1);
  const Vector x0 = Vector::Constant(1, 1.0);
  const TrajectorySuggestion s = suggest_trajectory(g, id, 0.1, 1000, x0);
  CHECK(std::abs(s.num_steps - 31) <= 3);
  CHECK_FALSE(s.truncated);
  CHECK(s.uturn_time == doctest::Approx(std::numbers::pi).epsilon(0.01));
  for (double eps : {0.05, 0.1, 0.2}) {
    const TrajectorySuggestion t = suggest_trajectory(g, id, eps, 1000, x0);
    CHECK(std::abs(t.num_steps * eps - std::numbers::pi) <= 0.15 * std::numbers::pi);
  }
  const TrajectorySuggestion capped = suggest_trajectory(g, id, 0.1, 5, x0);
  CHECK(capped.num_steps <= 5);
  CHECK(capped.truncated);
  CHECK(suggest_trajectory(g, id, std::numbers::pi, 1000, x0).num_steps == 1);
}

TEST_CASE("half-period suggestion respects the mass") {
  // With mass m the oscillator period is 2 pi sqrt(m).
  const GaussianTarget g = standard_gaussian(1);
  const TrajectorySuggestion s =
      suggest_trajectory(g, MassMatrix::diagonal(Vector::Constant(1, 4.0)), 0.1, 1000, Vector::Constant(1, 1.0));
  CHECK(s.uturn_time == doctest::Approx(2 * std::numbers::pi).epsilon(0.02));
}

TEST_CASE("default acceptance targets") {
  CHECK(default_accept_target(1) == 0.85);
  CHECK(default_accept_target(19) == 0.85);
  CHECK(default_accept_target(20) == 0.651);
}

TEST_CASE("warmup on the standard gaussian is nearly a no-op") {
  Rng rng(8);
  const WarmupResult w = warmup_pipeline(standard_gaussian(2), 4000, MassMode::diagonal, 0.85, rng);
  CHECK(w.success());
  for (int j = 0; j < 2; ++j) CHECK(w.mass.diagonal_entries()[j] == doctest::Approx(1.0).epsilon(0.15));
  CHECK(w.warmup.iterations() == 4000);
  CHECK(w.trajectory.has_value());
  CHECK(w.config.num_steps == w.trajectory->num_steps);
  CHECK_FALSE(w.stage2_tuning.probes.empty());
  CHECK_THROWS_AS(warmup_pipeline(standard_gaussian(1), 10, MassMode::diagonal, 0.85, rng), ContractError);
}

TEST_CASE("warmup on pima spreads the mass and grows eps") {
  const LogisticPosterior post(load_dataset(testing::pima_path(), "type"), 100.0);
  Rng rng(9);
  WarmupOptions options;
  options.num_steps = 20;
  const WarmupResult w = warmup_pipeline(post, 5000, MassMode::diagonal, 0.85, rng, options);
  CHECK(w.success());
  CHECK(w.config.num_steps == 20);
  CHECK_FALSE(w.trajectory.has_value());
  const Vector m = w.mass.diagonal_entries();
  CHECK(m.maxCoeff() / m.minCoeff() > 1e3);
  CHECK(w.stage2_tuning.step_size > 10 * w.stage1_tuning.step_size);
}
