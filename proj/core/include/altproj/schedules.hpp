#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "altproj/rng.hpp"

namespace altproj {

enum class ScheduleKind { Cyclic, SeededRandom, Custom };

std::string_view to_string(ScheduleKind kind) noexcept;

/// Description of the index sequence i(n). Indices are zero-based here;
/// files and reports use 1..K.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Cyclic;
  int count = 2;  // K
  std::uint64_t seed = 0;
  std::vector<int> list;  // Custom only
  bool wrap = true;       // Custom only

  static ScheduleSpec cyclic(int k);
  static ScheduleSpec seeded_random(int k, std::uint64_t seed);
  static ScheduleSpec custom(std::vector<int> list, int k, bool wrap = true);
};

/// Throws InvalidArgument for K < 2 and InvalidCustom for custom lists with
/// out-of-range entries, adjacent repeats (including across the wrap) or,
/// when wrapping, missing indices.
void validate(const ScheduleSpec& spec);

/// Running state of a schedule; advance with next_index().
class ScheduleState {
 public:
  explicit ScheduleState(ScheduleSpec spec);

  /// Next index, or nullopt once a non-wrapping custom list is exhausted.
  std::optional<int> next_index();

  [[nodiscard]] const ScheduleSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::string_view generator_name() const noexcept { return Rng::kGeneratorName; }

 private:
  ScheduleSpec spec_;
  Rng rng_;
  int previous_ = -1;
  std::size_t position_ = 0;
};

/// No adjacent repeats and every index 0..K-1 in every contiguous slice of
/// length `window` (the whole sequence when it is shorter).
bool validate_prefix(std::span<const int> sequence, int k, std::size_t window);

/// 50 * K.
std::size_t default_coverage_window(int k);

}  // namespace altproj
