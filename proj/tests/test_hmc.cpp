#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "sampler/diagnostics.hpp"
#include "sampler/hmc.hpp"
#include "sampler/random.hpp"
#include "sampler/targets.hpp"

using namespace sampler;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

double column_mean(const Matrix& s, Eigen::Index j = 0) { return s.col(j).mean(); }

double column_variance(const Matrix& s, Eigen::Index j = 0) {
  const double m = column_mean(s, j);
  return (s.col(j).array() - m).square().sum() / (s.rows() - 1.0);
}

double lag1(const Matrix& s) {
  const Vector c = s.col(0);
  return acf({c.data(), static_cast<std::size_t>(c.size())}, 1)[1];
}

double gaussian_acceptance(double eps, int L, std::size_t T, std::uint64_t seed) {
  Rng rng(seed);
  return run_chain(standard_gaussian(1), MassMatrix::identity(1), {eps, L}, T, vec({0.0}), rng).acceptance_rate();
}

class Explosive final : public TargetDensity {
 public:
  std::size_t dim() const override { return 1; }
  std::string name() const override { return "explosive"; }

 protected:
  double eval_log_density(const Vector& x) const override { return -std::pow(x[0], 4); }
  Vector eval_grad_log_density(const Vector& x) const override { return Vector::Constant(1, -4 * std::pow(x[0], 3)); }
};

}  // namespace

TEST_CASE("ideal HMC is exact") {
  Rng rng(101);
  const ChainResult chain = ideal_hmc_chain(1.0, 100000, 0.0, rng);
  CHECK(chain.acceptance_rate() == 1.0);
  CHECK(chain.divergences.empty());
  CHECK(std::abs(column_mean(chain.samples)) < 0.02);
  CHECK(std::abs(column_variance(chain.samples) - 1.0) < 0.05);
  CHECK(chain.config.kernel == "ideal-hmc");
  CHECK(*chain.config.trajectory_time == 1.0);
}

TEST_CASE("ideal HMC lag-1 autocorrelation is cos(s)") {
  for (double s : {0.1, 1.0, 5.0}) {
    Rng rng = Rng::stream(102, static_cast<std::uint64_t>(s * 10));
    const ChainResult chain = ideal_hmc_chain(s, 100000, 0.0, rng);
    CHECK(std::abs(lag1(chain.samples) - std::cos(s)) < 0.02);
  }
}

TEST_CASE("reference acceptance at small and moderate step sizes") {
  CHECK(std::abs(gaussian_acceptance(0.01, 100, 10000, 201) - 1.0) <= 0.001);
  CHECK(std::abs(gaussian_acceptance(1.0, 10, 10000, 202) - 0.9155) <= 0.01);
}

TEST_CASE("one-step acceptance at eps = 10, L = 1 matches quadrature") {
  // E[min(1, exp(-dH))] over x, p ~ N(0, 1), with one leapfrog step of the
  // unit oscillator written out by hand.
  const double eps = 10.0;
  auto delta_h = [&](double x, double p) {
    const double half = p - 0.5 * eps * x;
    const double xs = x + eps * half;
    const double ps = half - 0.5 * eps * xs;
    return 0.5 * (xs * xs + ps * ps - x * x - p * p);
  };
  const double dx = 0.005;
  const double dp = 0.0005;
  double expected = 0.0;
  for (double x = -7.0; x <= 7.0; x += dx) {
    double inner = 0.0;
    for (double p = -7.0; p <= 7.0; p += dp) {
      inner += std::exp(-0.5 * p * p) * std::min(1.0, std::exp(-delta_h(x, p)));
    }
    expected += std::exp(-0.5 * x * x) * inner * dp;
  }
  expected *= dx / (2.0 * std::numbers::pi);

  Rng rng(203);
  const int n = 200000;
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    const Vector x = vec({rng.normal()});
    accepted += hmc_step(standard_gaussian(1), MassMatrix::identity(1), {eps, 1}, x, rng).accepted;
  }
  const double rate = static_cast<double>(accepted) / n;
  CHECK(expected == doctest::Approx(0.0051).epsilon(0.05));
  CHECK(std::abs(rate - expected) <= 4.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST_CASE("single iteration chain") {
  const GaussianTarget g = standard_gaussian(1);
  Rng rng(301);
  Rng replay(301);
  const ChainResult chain = run_chain(g, MassMatrix::identity(1), {0.5, 3}, 1, vec({0.4}), rng);
  CHECK(chain.iterations() == 1);
  const HmcStep step = hmc_step(g, MassMatrix::identity(1), {0.5, 3}, vec({0.4}), replay);
  CHECK(chain.samples(0, 0) == step.next[0]);
  CHECK((chain.accepted[0] == 1) == step.accepted);
  if (!step.accepted) CHECK(chain.samples(0, 0) == 0.4);
}

TEST_CASE("chains are bit-identical for the same seed") {
  const GaussianTarget g(vec({1.0, 4.0, 0.25}));
  Rng a(42);
  Rng b(42);
  const ChainResult ca = run_chain(g, MassMatrix::identity(3), {0.2, 8}, 3000, Vector::Zero(3), a);
  const ChainResult cb = run_chain(g, MassMatrix::identity(3), {0.2, 8}, 3000, Vector::Zero(3), b);
  CHECK(ca.samples == cb.samples);
  CHECK(ca.accepted == cb.accepted);
  CHECK(ca.delta_h == cb.delta_h);
  CHECK(ca.seed == cb.seed);
}

TEST_CASE("chain bookkeeping") {
  const GaussianTarget g = standard_gaussian(2);
  Rng rng(5);
  std::vector<std::size_t> ticks;
  const ChainResult chain =
      run_chain(g, MassMatrix::diagonal(vec({1.0, 2.0})), {0.3, 4}, 2500, vec({1, 1}), rng,
                [&](std::size_t done) { ticks.push_back(done); });
  CHECK(chain.samples.rows() == 2500);
  CHECK(chain.samples.cols() == 2);
  CHECK(chain.accepted.size() == 2500);
  CHECK(chain.delta_h.size() == 2500);
  CHECK(ticks == std::vector<std::size_t>{1000, 2000});
  CHECK(chain.config.kernel == "hmc");
  CHECK(chain.config.target == "standard_gaussian");
  CHECK(chain.config.mass_form == "diagonal");
  CHECK(*chain.config.step_size == 0.3);
  CHECK(*chain.config.num_steps == 4);
  CHECK(chain.acceptance_rate() >= 0.0);
  CHECK(chain.acceptance_rate() <= 1.0);
}

TEST_CASE("cached and uncached steps agree") {
  const GaussianTarget g = standard_gaussian(2);
  Rng a(9);
  Rng b(9);
  const Vector x = vec({0.3, -0.8});
  const HmcStep s1 = hmc_step(g, MassMatrix::identity(2), {0.4, 5}, x, a);
  const HmcStep s2 = hmc_step(g, MassMatrix::identity(2), {0.4, 5}, x, g.log_density(x), b);
  CHECK(s1.next == s2.next);
  CHECK(s1.delta_h == s2.delta_h);
}

TEST_CASE("moments at eps = 0.1, L = 10") {
  Rng rng(401);
  const ChainResult chain =
      run_chain(standard_gaussian(1), MassMatrix::identity(1), {0.1, 10}, 100000, vec({0.0}), rng);
  CHECK(std::abs(column_mean(chain.samples)) < 0.02);
  CHECK(std::abs(column_variance(chain.samples) - 1.0) < 0.05);
}

TEST_CASE("acceptance barely depends on L") {
  const double a10 = gaussian_acceptance(0.1, 10, 10000, 501);
  const double a100 = gaussian_acceptance(0.1, 100, 10000, 502);
  CHECK(std::abs(a10 - a100) < 0.005);
}

TEST_CASE("acceptance decreases with eps at fixed trajectory length") {
  for (double s : {1.0, 10.0}) {
    double previous = 2.0;
    std::uint64_t stream = 0;
    for (double eps : {0.01, 0.1, 1.0, 10.0}) {
      const int L = static_cast<int>(std::lround(s / eps));
      if (L < 1) continue;
      Rng rng = Rng::stream(601, stream++);
      const double rate =
          run_chain(standard_gaussian(1), MassMatrix::identity(1), {eps, L}, 50000, vec({0.0}), rng)
              .acceptance_rate();
      CHECK(rate < previous);
      previous = rate;
    }
  }
}

TEST_CASE("transition counts are symmetric") {
  auto bin = [](double x) { return x < -1.0 ? 0 : x < -0.3 ? 1 : x <= 0.3 ? 2 : x <= 1.0 ? 3 : 4; };
  Rng rng(701);
  const ChainResult chain =
      run_chain(standard_gaussian(1), MassMatrix::identity(1), {0.5, 3}, 100000, vec({0.0}), rng);
  std::array<std::array<double, 5>, 5> counts{};
  for (Eigen::Index t = 1; t < chain.samples.rows(); ++t) {
    counts[bin(chain.samples(t - 1, 0))][bin(chain.samples(t, 0))] += 1;
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const double n = counts[i][j] + counts[j][i];
      CHECK(std::abs(counts[i][j] - counts[j][i]) <= 4.0 * std::sqrt(n) + 2.0);
    }
  }
}

TEST_CASE("preconditioning equalizes per-coordinate ESS") {
  const GaussianTarget target(vec({1.0, 100.0}));
  const MassMatrix matched = MassMatrix::diagonal(vec({1.0, 0.01}));
  const MassMatrix identity = MassMatrix::identity(2);
  auto ess_ratio = [&](const MassMatrix& mass, double eps, int L, std::uint64_t seed) {
    Rng rng(seed);
    const SummaryReport report = summarize(run_chain(target, mass, {eps, L}, 20000, Vector::Zero(2), rng));
    const double a = *report.coordinates[0].ess;
    const double b = *report.coordinates[1].ess;
    return std::min(a, b) / std::max(a, b);
  };
  for (std::uint64_t seed : {801u, 802u, 803u}) {
    CHECK(ess_ratio(matched, 0.3, 5, seed) > 0.5);
    CHECK(ess_ratio(identity, 0.3, 5, seed) < 0.2);
  }
}

TEST_CASE("divergent trajectories are rejected and counted") {
  Rng rng(901);
  const ChainResult chain = run_chain(Explosive(), MassMatrix::identity(1), {1.5, 20}, 500, vec({0.5}), rng);
  CHECK_FALSE(chain.divergences.empty());
  for (std::size_t t : chain.divergences) CHECK(chain.accepted[t] == 0);
  CHECK(chain.samples.allFinite());
}
