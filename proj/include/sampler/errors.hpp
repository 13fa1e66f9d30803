#pragma once

#include <stdexcept>
#include <string>

namespace sampler {

/// Raised when a caller breaks an operation's precondition (wrong dimension,
/// non-finite input where a finite one is required).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid tuning or sampler configuration (h <= 0, eps <= 0, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation requested on a configuration it cannot handle (e.g. analytic
/// flow for d != 1).
class UnsupportedConfiguration : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Covariance / mass estimation failure.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Autocorrelation-based statistic requested on a constant series.
class DegenerateSeriesError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sampler
