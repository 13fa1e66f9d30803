#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sampler/chain.hpp"

namespace sampler {

/// rho(k) = gamma(k) / gamma(0), k = 0..max_lag, with the biased (1/T)
/// autocovariance. Throws DegenerateSeriesError for a constant series and
/// ContractError unless T > max_lag.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

/// Biased autocovariance at every lag 0..T-1, computed by FFT.
std::vector<double> autocovariance(std::span<const double> series);

inline constexpr std::size_t kMinEssLength = 100;

/// T / tau with tau = -1 + 2 sum_k (rho(2k) + rho(2k+1)), summed while the
/// pair sums stay positive (initial positive sequence). tau is floored at
/// 1 / log10(T), so antithetic chains may report ESS > T.
double ess(std::span<const double> series);

/// Type-7 quantile (linear interpolation between order statistics).
double quantile(std::span<const double> series, double probability);

struct Histogram {
  std::vector<double> centers;
  std::vector<std::size_t> counts;
  double bin_width = 0.0;
};

/// Equal-width histogram over [min, max] of the series.
Histogram histogram(std::span<const double> series, std::size_t bins);

struct CoordinateSummary {
  std::string name;
  double mean = 0.0;
  double variance = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  /// Empty when the coordinate never moved.
  std::optional<double> ess;
  std::vector<double> acf;

  bool degenerate() const { return !ess.has_value(); }
};

struct SummaryReport {
  std::vector<CoordinateSummary> coordinates;
  double acceptance_rate = 0.0;
  std::size_t divergences = 0;
  std::size_t iterations = 0;

  /// Smallest ESS over non-degenerate coordinates; empty if there are none.
  std::optional<double> min_ess() const;
};

SummaryReport summarize(const ChainResult& chain, std::size_t max_lag = 50);

}  // namespace sampler
