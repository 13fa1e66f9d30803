#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sampler/targets.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return SAMPLER_SOURCE_DIR; }
inline std::filesystem::path pima_path() { return source_dir() / "data" / "pima.csv"; }

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sampler-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto file = path_ / name;
    std::ofstream(file, std::ios::binary) << text;
    return file;
  }

 private:
  std::filesystem::path path_;
};

/// Central difference of log_density, written independently of check_gradient.
inline sampler::Vector fd_gradient(const sampler::TargetDensity& target, const sampler::Vector& x, double h) {
  sampler::Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sampler::Vector up = x;
    sampler::Vector down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (target.log_density(up) - target.log_density(down)) / (2.0 * h);
  }
  return g;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
