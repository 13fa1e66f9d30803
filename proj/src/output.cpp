#include "sampler/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "sampler/errors.hpp"

namespace sampler {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string quoted(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string column_name(const ChainResult& chain, std::size_t j) {
  return j < chain.coordinate_names.size() ? chain.coordinate_names[j] : "x" + std::to_string(j);
}

}  // namespace

void write_samples_csv(const std::filesystem::path& path, const ChainResult& chain) {
  std::ofstream out = open_for_writing(path);
  for (std::size_t j = 0; j < chain.dim(); ++j) out << (j ? "," : "") << quoted(column_name(chain, j));
  out << '\n';
  std::string line;
  for (Eigen::Index t = 0; t < chain.samples.rows(); ++t) {
    line.clear();
    for (Eigen::Index j = 0; j < chain.samples.cols(); ++j) {
      if (j) line += ',';
      line += format_double(chain.samples(t, j));
    }
    line += '\n';
    out << line;
  }
}

void write_summary_csv(const std::filesystem::path& path, const SummaryReport& report) {
  std::ofstream out = open_for_writing(path);
  out << "coordinate,mean,variance,q05,q50,q95,ess\n";
  for (const auto& c : report.coordinates) {
    out << quoted(c.name) << ',' << format_double(c.mean) << ',' << format_double(c.variance) << ','
        << format_double(c.q05) << ',' << format_double(c.q50) << ',' << format_double(c.q95) << ','
        << (c.ess ? format_double(*c.ess) : "") << '\n';
  }
}

void write_acf_csv(const std::filesystem::path& path, const SummaryReport& report) {
  std::ofstream out = open_for_writing(path);
  std::vector<const CoordinateSummary*> columns;
  std::size_t lags = 0;
  for (const auto& c : report.coordinates) {
    if (c.acf.empty()) continue;
    columns.push_back(&c);
    lags = std::max(lags, c.acf.size());
  }
  out << "lag";
  for (const auto* c : columns) out << ',' << quoted(c->name);
  out << '\n';
  for (std::size_t k = 0; k < lags; ++k) {
    out << k;
    for (const auto* c : columns) out << ',' << (k < c->acf.size() ? format_double(c->acf[k]) : "");
    out << '\n';
  }
}

void write_density_csv(const std::filesystem::path& path, const ChainResult& chain, std::size_t bins) {
  std::ofstream out = open_for_writing(path);
  out << "coordinate,center,count,density\n";
  const double n = static_cast<double>(chain.iterations());
  for (std::size_t j = 0; j < chain.dim(); ++j) {
    const Vector column = chain.samples.col(static_cast<Eigen::Index>(j));
    const Histogram h = histogram({column.data(), static_cast<std::size_t>(column.size())}, bins);
    const std::string name = quoted(column_name(chain, j));
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      out << name << ',' << format_double(h.centers[b]) << ',' << h.counts[b] << ','
          << format_double(static_cast<double>(h.counts[b]) / (n * h.bin_width)) << '\n';
    }
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<PhaseState>& states,
                          const std::vector<double>& energies, double step_size) {
  if (states.size() != energies.size()) throw ContractError("trajectory and energies differ in length");
  std::ofstream out = open_for_writing(path);
  const Eigen::Index d = states.empty() ? 0 : states.front().position.size();
  out << "step,time";
  for (Eigen::Index j = 0; j < d; ++j) out << ",x" << j;
  for (Eigen::Index j = 0; j < d; ++j) out << ",p" << j;
  out << ",hamiltonian\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    out << k << ',' << format_double(static_cast<double>(k) * step_size);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(states[k].position[j]);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(states[k].momentum[j]);
    out << ',' << format_double(energies[k]) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out = open_for_writing(path);
  out << value.dump(2) << '\n';
}

}  // namespace sampler
