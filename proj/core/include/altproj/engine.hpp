#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "altproj/dictionaries.hpp"
#include "altproj/geometry.hpp"
#include "altproj/schedules.hpp"

namespace altproj {

enum class Mode { Projection, Greedy };

std::string_view to_string(Mode mode) noexcept;

struct StopRule {
  std::size_t max_iters = 1'000'000;
  double norm_tol = 1e-6;  // stop once |x_n| <= norm_tol
  /// Stop once `stagnation_window` consecutive steps have norm <= eps;
  /// a zero window disables the rule.
  std::size_t stagnation_window = 1000;
  double stagnation_eps = 1e-13;
};

void validate(const StopRule& rule);

struct TraceOptions {
  std::size_t thinning = 100;  // full iterates stored every `thinning` steps
  /// Trailing iterates kept for cluster analysis; 0 means 2 * 50 * K.
  std::size_t tail = 0;
  bool record_distances = false;
  bool checked = false;
};

enum class StopReason { NormTolerance, Stagnation, MaxIterations, ScheduleExhausted };

std::string_view to_string(StopReason reason) noexcept;

struct StepRecord {
  std::size_t n = 0;
  int index = 0;  // zero-based i(n)
  double norm = 0.0;
  double step_norm = 0.0;
  double coefficient = std::numeric_limits<double>::quiet_NaN();  // greedy only
};

struct Iterate {
  std::size_t n = 0;
  int index = -1;  // -1 for x_0
  Vector x;
};

struct Violation {
  std::size_t n = 0;
  std::string check;
  double residual = 0.0;
};

struct Trace {
  Mode mode = Mode::Projection;
  int set_count = 0;
  Vector x0;
  std::vector<StepRecord> records;  // records[k].n == k + 1
  /// Row-major records.size() x set_count when distances were requested.
  std::vector<double> distances;
  /// Sorted by n: x_0, every thinned iterate, the tail, and the last iterate.
  std::vector<Iterate> iterates;
  std::size_t tail_start = 0;  // first n belonging to the stored tail
  StopReason stop_reason = StopReason::MaxIterations;
  std::vector<Violation> violations;
  /// Largest |x_n|^2 - |x_{n-1}|^2 + |x_n - x_{n-1}|^2 seen (the decay slack);
  /// zero for an exact greedy run.
  double max_decay_slack = -std::numeric_limits<double>::infinity();
  double max_abs_identity_residual = 0.0;
  ScheduleSpec schedule;

  [[nodiscard]] std::size_t steps() const noexcept { return records.size(); }
  [[nodiscard]] double initial_norm() const { return x0.norm(); }
  [[nodiscard]] double final_norm() const;
  /// inf_n |x_n| over the run; the observable stand-in for R = lim |x_n|.
  [[nodiscard]] double r_estimate() const;
  [[nodiscard]] const Iterate* find_iterate(std::size_t n) const;
  [[nodiscard]] std::span<const Iterate> tail_iterates() const;
  [[nodiscard]] bool has_distances() const noexcept { return !distances.empty(); }
  [[nodiscard]] const Vector& final_iterate() const { return iterates.back().x; }
};

/// x_n = P_{i(n)} x_{n-1}. Sets must contain the origin.
Trace run_projection(std::span<const ConvexSet> sets, ScheduleState schedule, const Vector& x0,
                     const StopRule& stop, const TraceOptions& options = {});

/// x_n = G_{i(n)} x_{n-1}. The dictionaries' union must be half-space free.
Trace run_greedy(std::span<const Dictionary> dicts, ScheduleState schedule, const Vector& x0,
                 const StopRule& stop, const TraceOptions& options = {});

struct FunctionalCheck {
  bool passed = true;
  /// Smallest margin seen: projection mode <x_t - x_s, a> - (|x_t|^2 - |x_s|^2)/2,
  /// greedy mode min_n <x_n - x_{n-1}, a>.
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t steps_checked = 0;
};

/// Checks the sign of the functional a along steps s+1..t of a trace whose
/// indices all lie in `J`. `membership_sets` are the sets A_j indexed like the
/// schedule (the projection sets, or the polar cones of the dictionaries);
/// `a` must lie in every A_j with j in J.
FunctionalCheck segment_functional_check(const Trace& trace, std::size_t s, std::size_t t,
                                         const Vector& a, std::span<const int> J,
                                         std::span<const ConvexSet> membership_sets, Mode mode);

}  // namespace altproj
