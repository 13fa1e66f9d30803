#include "sampler/targets.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "sampler/errors.hpp"

namespace sampler {

std::vector<std::string> TargetDensity::coordinate_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim(); ++i) names.push_back("x" + std::to_string(i));
  return names;
}

void TargetDensity::require_dim(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw ContractError(name() + ": expected a point of dimension " + std::to_string(dim()) +
                        ", got " + std::to_string(x.size()));
  }
}

double TargetDensity::log_density(const Vector& x) const {
  require_dim(x);
  const double value = eval_log_density(x);
  return std::isnan(value) ? -std::numeric_limits<double>::infinity() : value;
}

Vector TargetDensity::grad_log_density(const Vector& x) const {
  require_dim(x);
  if (!x.allFinite()) throw ContractError(name() + ": gradient requested at a non-finite point");
  return eval_grad_log_density(x);
}

// ---------------------------------------------------------------------------

GaussianTarget::GaussianTarget(Vector variances) : variances_(std::move(variances)) {
  if (variances_.size() == 0) throw ConfigError("gaussian target needs dimension >= 1");
  if (!(variances_.array() > 0.0).all() || !variances_.allFinite()) {
    throw ConfigError("gaussian target variances must be finite and positive");
  }
  precisions_ = variances_.cwiseInverse();
}

GaussianTarget standard_gaussian(std::size_t dim) {
  return GaussianTarget(Vector::Ones(static_cast<Eigen::Index>(dim)));
}

bool GaussianTarget::is_standard() const { return (variances_.array() == 1.0).all(); }

std::string GaussianTarget::name() const {
  return is_standard() ? "standard_gaussian" : "gaussian";
}

double GaussianTarget::eval_log_density(const Vector& x) const {
  return -0.5 * x.cwiseProduct(x).dot(precisions_);
}

Vector GaussianTarget::eval_grad_log_density(const Vector& x) const {
  return -x.cwiseProduct(precisions_);
}

// ---------------------------------------------------------------------------

LabeledDataset make_dataset(const Matrix& covariates, const Vector& responses,
                            std::vector<std::string> covariate_names) {
  const Eigen::Index n = covariates.rows();
  if (responses.size() != n) throw ContractError("response length does not match covariate rows");
  if (static_cast<Eigen::Index>(covariate_names.size()) != covariates.cols()) {
    throw ContractError("covariate name count does not match covariate columns");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (responses[i] != 0.0 && responses[i] != 1.0) {
      throw DatasetError(DatasetError::Kind::non_binary_response,
                         "response at row " + std::to_string(i + 1) + " is not binary");
    }
  }
  if (!covariates.allFinite()) {
    throw DatasetError(DatasetError::Kind::missing_value, "covariates contain non-finite values");
  }
  LabeledDataset data;
  data.design.resize(n, covariates.cols() + 1);
  data.design.col(0).setOnes();
  data.design.rightCols(covariates.cols()) = covariates;
  data.responses = responses;
  data.names.reserve(covariate_names.size() + 1);
  data.names.emplace_back("Intercept");
  for (auto& name : covariate_names) data.names.push_back(std::move(name));
  if (data.rows() < data.cols()) {
    throw DatasetError(DatasetError::Kind::too_few_rows,
                       "dataset has " + std::to_string(data.rows()) + " rows but " +
                           std::to_string(data.cols()) + " columns including the intercept");
  }
  return data;
}

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

// Splits one CSV record; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

bool is_missing(const std::string& cell) {
  std::string lower;
  for (char c : cell) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower.empty() || lower == "na" || lower == "nan" || lower == "null";
}

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<double> parse_binary(const std::string& cell) {
  std::string lower;
  for (char c : cell) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "1" || lower == "yes" || lower == "true") return 1.0;
  if (lower == "0" || lower == "no" || lower == "false") return 0.0;
  if (auto v = parse_number(cell); v && (*v == 0.0 || *v == 1.0)) return *v;
  return std::nullopt;
}

}  // namespace

LabeledDataset load_dataset(const std::filesystem::path& path, const std::string& response_column) {
  std::ifstream in(path);
  if (!in) {
    throw DatasetError(DatasetError::Kind::missing_file, "cannot open dataset " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DatasetError(DatasetError::Kind::malformed, path.string() + ": missing header row");
  }
  const auto header = split_record(line);
  const auto response_it = std::find(header.begin(), header.end(), response_column);
  if (response_it == header.end()) {
    throw DatasetError(DatasetError::Kind::missing_column,
                       path.string() + ": no column named '" + response_column + "'");
  }
  const auto response_index = static_cast<std::size_t>(response_it - header.begin());

  std::vector<std::string> covariate_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != response_index) covariate_names.push_back(header[j]);
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> responses;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const auto cells = split_record(line);
    if (cells.size() != header.size()) {
      throw DatasetError(DatasetError::Kind::malformed,
                         path.string() + ": line " + std::to_string(line_number) + " has " +
                             std::to_string(cells.size()) + " fields, expected " +
                             std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(covariate_names.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string where =
          path.string() + ": row " + std::to_string(line_number - 1) + ", column '" + header[j] + "'";
      if (is_missing(cells[j])) {
        throw DatasetError(DatasetError::Kind::missing_value, where + " is missing");
      }
      if (j == response_index) {
        auto y = parse_binary(cells[j]);
        if (!y) {
          throw DatasetError(DatasetError::Kind::non_binary_response,
                             where + " has non-binary response '" + cells[j] + "'");
        }
        responses.push_back(*y);
      } else {
        auto v = parse_number(cells[j]);
        if (!v) throw DatasetError(DatasetError::Kind::malformed, where + " is not numeric: '" + cells[j] + "'");
        row.push_back(*v);
      }
    }
    rows.push_back(std::move(row));
  }

  Matrix covariates(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(covariate_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < covariate_names.size(); ++j) {
      covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return make_dataset(covariates, Eigen::Map<const Vector>(responses.data(), static_cast<Eigen::Index>(responses.size())),
                      std::move(covariate_names));
}

// ---------------------------------------------------------------------------

double log1p_exp(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

namespace {

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

LogisticPosterior::LogisticPosterior(LabeledDataset data, double prior_variance)
    : data_(std::move(data)), prior_variance_(prior_variance) {
  if (!(prior_variance_ > 0.0) || !std::isfinite(prior_variance_)) {
    throw ConfigError("prior variance must be finite and positive");
  }
  if (data_.design.rows() == 0 || data_.design.cols() == 0) throw ConfigError("empty dataset");
}

double LogisticPosterior::eval_log_density(const Vector& beta) const {
  const Vector eta = data_.design * beta;
  double loglik = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) loglik += data_.responses[i] * eta[i] - log1p_exp(eta[i]);
  return loglik - beta.squaredNorm() / (2.0 * prior_variance_);
}

Vector LogisticPosterior::eval_grad_log_density(const Vector& beta) const {
  Vector residual = data_.design * beta;
  for (Eigen::Index i = 0; i < residual.size(); ++i) residual[i] = data_.responses[i] - logistic(residual[i]);
  return data_.design.transpose() * residual - beta / prior_variance_;
}

// ---------------------------------------------------------------------------

double check_gradient(const TargetDensity& target, const Vector& x, double h) {
  if (!(h > 0.0)) throw ContractError("finite-difference step must be positive");
  const Vector analytic = target.grad_log_density(x);
  Vector probe = x;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = target.log_density(probe);
    probe[i] = x[i] - h;
    const double down = target.log_density(probe);
    probe[i] = x[i];
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i])));
  }
  return worst;
}

}  // namespace sampler
