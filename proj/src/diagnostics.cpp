#include "sampler/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "sampler/errors.hpp"

namespace sampler {

namespace {

double mean_of(std::span<const double> series) {
  return std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
}

std::vector<double> centered(std::span<const double> series) {
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw DegenerateSeriesError("series is constant");
  const double m = mean_of(series);
  std::vector<double> out(series.begin(), series.end());
  for (double& v : out) v -= m;
  return out;
}

std::size_t next_fft_size(std::size_t n) {
  std::size_t size = 1;
  while (size < n) size <<= 1;
  return size;
}

}  // namespace

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  if (series.size() <= max_lag) throw ContractError("acf needs more observations than max_lag");
  const std::vector<double> x = centered(series);
  const std::size_t n = x.size();
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double sum = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) sum += x[t] * x[t + k];
    gamma[k] = sum / static_cast<double>(n);
  }
  std::vector<double> rho(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) rho[k] = gamma[k] / gamma[0];
  rho[0] = 1.0;
  return rho;
}

std::vector<double> autocovariance(std::span<const double> series) {
  const std::vector<double> x = centered(series);
  const std::size_t n = x.size();
  const std::size_t size = next_fft_size(2 * n);

  std::vector<double> padded(size, 0.0);
  std::copy(x.begin(), x.end(), padded.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& c : spectrum) c = std::complex<double>(std::norm(c), 0.0);
  std::vector<double> circular;
  fft.inv(circular, spectrum);

  std::vector<double> gamma(n);
  for (std::size_t k = 0; k < n; ++k) gamma[k] = circular[k] / static_cast<double>(n);
  return gamma;
}

double ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < kMinEssLength) throw ContractError("ess needs at least 100 observations");
  const std::vector<double> gamma = autocovariance(series);
  auto rho = [&](std::size_t k) { return gamma[k] / gamma[0]; };

  double pair_sum_total = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = rho(2 * k) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    pair_sum_total += pair;
  }
  const double tau_floor = 1.0 / std::log10(static_cast<double>(n));
  const double tau = std::max(-1.0 + 2.0 * pair_sum_total, tau_floor);
  return static_cast<double>(n) / tau;
}

double quantile(std::span<const double> series, double probability) {
  if (series.empty()) throw ContractError("quantile of an empty series");
  if (!(probability >= 0.0 && probability <= 1.0)) throw ContractError("quantile probability outside [0, 1]");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * probability;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Histogram histogram(std::span<const double> series, std::size_t bins) {
  if (series.empty() || bins == 0) throw ContractError("histogram needs data and at least one bin");
  const auto [min_it, max_it] = std::minmax_element(series.begin(), series.end());
  double lo = *min_it;
  double hi = *max_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.bin_width = (hi - lo) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) h.centers.push_back(lo + (static_cast<double>(b) + 0.5) * h.bin_width);
  for (double v : series) {
    auto b = static_cast<std::size_t>((v - lo) / h.bin_width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

std::optional<double> SummaryReport::min_ess() const {
  std::optional<double> best;
  for (const auto& c : coordinates) {
    if (c.ess && (!best || *c.ess < *best)) best = c.ess;
  }
  return best;
}

SummaryReport summarize(const ChainResult& chain, std::size_t max_lag) {
  if (chain.iterations() == 0) throw ContractError("cannot summarize an empty chain");
  SummaryReport report;
  report.acceptance_rate = chain.acceptance_rate();
  report.divergences = chain.divergences.size();
  report.iterations = chain.iterations();

  const std::size_t lags = std::min(max_lag, chain.iterations() - 1);
  for (Eigen::Index j = 0; j < chain.samples.cols(); ++j) {
    const Vector column = chain.samples.col(j);
    std::span<const double> series(column.data(), static_cast<std::size_t>(column.size()));
    CoordinateSummary c;
    c.name = static_cast<std::size_t>(j) < chain.coordinate_names.size() ? chain.coordinate_names[j]
                                                                         : "x" + std::to_string(j);
    const bool constant = column.minCoeff() == column.maxCoeff();
    c.mean = constant ? column[0] : mean_of(series);
    c.variance = constant ? 0.0
                          : (column.array() - c.mean).square().sum() / static_cast<double>(series.size() - 1);
    c.q05 = quantile(series, 0.05);
    c.q50 = quantile(series, 0.50);
    c.q95 = quantile(series, 0.95);
    try {
      c.acf = acf(series, lags);
      if (series.size() >= kMinEssLength) c.ess = ess(series);
    } catch (const DegenerateSeriesError&) {
      c.acf.clear();
      c.ess.reset();
    }
    report.coordinates.push_back(std::move(c));
  }
  return report;
}

}  // namespace sampler
