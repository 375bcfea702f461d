#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace altproj {

/// Seeded pseudorandom source shared by schedules and instance generators.
///
/// Only the raw 64-bit output of std::mt19937_64 is used; the uniform,
/// normal and bounded-integer transforms are implemented here so that a seed
/// reproduces the same stream on every standard library.
class Rng {
 public:
  static constexpr std::string_view kGeneratorName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  Eigen::VectorXd gaussian(Eigen::Index dim);
  Eigen::VectorXd unit_vector(Eigen::Index dim);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace altproj
