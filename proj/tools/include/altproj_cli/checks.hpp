#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "altproj/geometry.hpp"

namespace altproj {
class Rng;
}

namespace altproj::cli {

struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> failures;  // first few offending cases

  [[nodiscard]] bool passed() const noexcept { return failures.empty(); }
};

/// Random set of the given kind (0..5 in SetKind order) in R^d.
ConvexSet random_set(int kind, Eigen::Index d, Rng& rng);
/// Random cone: generated, half-space or subspace, chosen by `kind` mod 3.
ConvexSet random_cone(int kind, Eigen::Index d, Rng& rng);

/// Idempotence, nonexpansiveness and the variational inequality on `budget`
/// random (set, point) pairs over every set kind, d <= 8.
CheckResult check_axioms(std::size_t budget, std::uint64_t seed);

/// P_A x + P_{A*} x = x and <P_A x, P_{A*} x> = 0 on `budget` random cones.
CheckResult check_moreau(std::size_t budget, std::uint64_t seed);

/// project() against the exhaustive oracle on `budget` cones, m <= 6, d <= 4.
CheckResult check_oracle(std::size_t budget, std::uint64_t seed);

/// Alternating projections against bridged alternating greedy on `budget`
/// certified cone pairs in d <= 6, compared step by step.
CheckResult check_bridge(std::size_t budget, std::uint64_t seed, std::size_t steps = 1000);

}  // namespace altproj::cli
