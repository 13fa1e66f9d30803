#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace sampler {

/// Seeded random stream with a platform-independent output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// Uniforms take the top 53 bits of one engine draw; normals use the
/// Marsaglia polar method on those uniforms. The standard library's
/// distributions are avoided because their algorithms are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream number `index` derived from a master seed:
  /// seed_k = splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15).
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Standard normal.
  double normal();

  /// Vector of iid standard normals.
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sampler
