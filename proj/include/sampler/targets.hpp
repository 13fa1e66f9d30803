#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sampler {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Unnormalized log-density log pi~(x) with its gradient.
///
/// Implementations are immutable after construction; evaluation is pure and
/// may be called concurrently. The public entry points validate their input
/// and forward to the protected evaluators.
class TargetDensity {
 public:
  virtual ~TargetDensity() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> coordinate_names() const;

  /// log pi~(x); -inf where the density vanishes. Throws ContractError on a
  /// dimension mismatch.
  double log_density(const Vector& x) const;

  /// Gradient of log pi~. Throws ContractError on a dimension mismatch or a
  /// non-finite x.
  Vector grad_log_density(const Vector& x) const;

  /// U(x) = -log pi~(x).
  double potential(const Vector& x) const { return -log_density(x); }

 protected:
  virtual double eval_log_density(const Vector& x) const = 0;
  virtual Vector eval_grad_log_density(const Vector& x) const = 0;

 private:
  void require_dim(const Vector& x) const;
};

/// Centered Gaussian with diagonal covariance; log pi~(x) = -sum x_i^2 / (2 v_i).
class GaussianTarget final : public TargetDensity {
 public:
  explicit GaussianTarget(Vector variances);

  std::size_t dim() const override { return static_cast<std::size_t>(variances_.size()); }
  std::string name() const override;
  const Vector& variances() const { return variances_; }
  bool is_standard() const;

 protected:
  double eval_log_density(const Vector& x) const override;
  Vector eval_grad_log_density(const Vector& x) const override;

 private:
  Vector variances_;
  Vector precisions_;
};

GaussianTarget standard_gaussian(std::size_t dim = 1);

/// Binary-response regression data. The design's first column is the
/// intercept (all ones); `names[0]` is "Intercept".
struct LabeledDataset {
  Matrix design;
  Vector responses;
  std::vector<std::string> names;

  std::size_t rows() const { return static_cast<std::size_t>(design.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(design.cols()); }
};

/// Builds a dataset from raw covariates (no intercept) and 0/1 responses,
/// prepending the intercept column. Validates shape and binary responses.
LabeledDataset make_dataset(const Matrix& covariates, const Vector& responses,
                            std::vector<std::string> covariate_names);

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { missing_file, malformed, missing_column, non_binary_response, missing_value, too_few_rows };

  DatasetError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads a comma-separated file with a header row. Every column except
/// `response_column` becomes a covariate. Responses may be 0/1, yes/no or
/// true/false (case-insensitive).
LabeledDataset load_dataset(const std::filesystem::path& path, const std::string& response_column);

/// Logistic regression posterior with a N(0, sigma^2 I) prior on beta.
class LogisticPosterior final : public TargetDensity {
 public:
  LogisticPosterior(LabeledDataset data, double prior_variance);

  std::size_t dim() const override { return data_.cols(); }
  std::string name() const override { return "logistic"; }
  std::vector<std::string> coordinate_names() const override { return data_.names; }
  const LabeledDataset& dataset() const { return data_; }
  double prior_variance() const { return prior_variance_; }

 protected:
  double eval_log_density(const Vector& beta) const override;
  Vector eval_grad_log_density(const Vector& beta) const override;

 private:
  LabeledDataset data_;
  double prior_variance_;
};

/// log(1 + e^u) without overflow.
double log1p_exp(double u);

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
double check_gradient(const TargetDensity& target, const Vector& x, double h = 1e-5);

}  // namespace sampler
