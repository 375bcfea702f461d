#include "altproj/schedules.hpp"

#include <algorithm>
#include <string>

#include "altproj/error.hpp"

namespace altproj {

std::string_view to_string(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::Cyclic: return "cyclic";
    case ScheduleKind::SeededRandom: return "random";
    case ScheduleKind::Custom: return "custom";
  }
  return "unknown";
}

ScheduleSpec ScheduleSpec::cyclic(int k) { return {ScheduleKind::Cyclic, k, 0, {}, true}; }

ScheduleSpec ScheduleSpec::seeded_random(int k, std::uint64_t seed) {
  return {ScheduleKind::SeededRandom, k, seed, {}, true};
}

ScheduleSpec ScheduleSpec::custom(std::vector<int> list, int k, bool wrap) {
  ScheduleSpec s{ScheduleKind::Custom, k, 0, std::move(list), wrap};
  validate(s);
  return s;
}

void validate(const ScheduleSpec& spec) {
  if (spec.count < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "schedule needs K >= 2, got " + std::to_string(spec.count));
  }
  if (spec.kind != ScheduleKind::Custom) return;
  const auto& list = spec.list;
  if (list.empty()) throw Error(ErrorCode::InvalidCustom, "custom schedule list is empty");
  std::vector<char> seen(static_cast<std::size_t>(spec.count), 0);
  for (std::size_t n = 0; n < list.size(); ++n) {
    if (list[n] < 0 || list[n] >= spec.count) {
      throw Error(ErrorCode::InvalidCustom, "custom schedule entry " + std::to_string(n) +
                                                " is outside 1.." + std::to_string(spec.count));
    }
    seen[static_cast<std::size_t>(list[n])] = 1;
    if (n > 0 && list[n] == list[n - 1]) {
      throw Error(ErrorCode::InvalidCustom,
                  "custom schedule repeats index at positions " + std::to_string(n - 1) + "," +
                      std::to_string(n));
    }
  }
  if (spec.wrap) {
    if (list.size() > 1 && list.back() == list.front()) {
      throw Error(ErrorCode::InvalidCustom, "custom schedule repeats index across the wrap");
    }
    if (list.size() == 1) {
      throw Error(ErrorCode::InvalidCustom, "a wrapping list of length 1 repeats itself");
    }
    for (int k = 0; k < spec.count; ++k) {
      if (!seen[static_cast<std::size_t>(k)]) {
        throw Error(ErrorCode::InvalidCustom,
                    "wrapping custom schedule never visits index " + std::to_string(k + 1));
      }
    }
  }
}

ScheduleState::ScheduleState(ScheduleSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
  validate(spec_);
}

std::optional<int> ScheduleState::next_index() {
  int next = 0;
  switch (spec_.kind) {
    case ScheduleKind::Cyclic:
      next = previous_ < 0 ? 0 : (previous_ + 1) % spec_.count;
      break;
    case ScheduleKind::SeededRandom:
      if (previous_ < 0) {
        next = static_cast<int>(rng_.below(static_cast<std::uint64_t>(spec_.count)));
      } else {
        // Uniform over the K-1 indices different from the previous one.
        next = static_cast<int>(rng_.below(static_cast<std::uint64_t>(spec_.count - 1)));
        if (next >= previous_) ++next;
      }
      break;
    case ScheduleKind::Custom:
      if (position_ >= spec_.list.size()) {
        if (!spec_.wrap) return std::nullopt;
        position_ = 0;
      }
      next = spec_.list[position_++];
      break;
  }
  previous_ = next;
  return next;
}

bool validate_prefix(std::span<const int> sequence, int k, std::size_t window) {
  if (k < 1 || window < static_cast<std::size_t>(k)) return false;
  for (std::size_t n = 1; n < sequence.size(); ++n) {
    if (sequence[n] == sequence[n - 1]) return false;
  }
  for (int v : sequence) {
    if (v < 0 || v >= k) return false;
  }
  const std::size_t len = sequence.size();
  const std::size_t w = std::min(window, len);
  // Sliding counts: every index must occur at least once in each slice.
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  std::size_t present = 0;
  auto add = [&](int v) {
    if (counts[static_cast<std::size_t>(v)]++ == 0) ++present;
  };
  auto remove = [&](int v) {
    if (--counts[static_cast<std::size_t>(v)] == 0) --present;
  };
  for (std::size_t n = 0; n < w; ++n) add(sequence[n]);
  if (present != static_cast<std::size_t>(k)) return false;
  for (std::size_t n = w; n < len; ++n) {
    add(sequence[n]);
    remove(sequence[n - w]);
    if (present != static_cast<std::size_t>(k)) return false;
  }
  return true;
}

std::size_t default_coverage_window(int k) { return 50 * static_cast<std::size_t>(k); }

}  // namespace altproj
