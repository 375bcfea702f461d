#include "altproj/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "altproj/error.hpp"

namespace altproj {

namespace {

constexpr double kIdentityTolerance = 1e-10;
constexpr double kMonotoneSlack = 1e-12;

struct StepOutcome {
  Vector next;
  double coefficient;
  Vector atom;  // greedy only; empty otherwise
};

template <class StepFn>
Trace run_iteration(Mode mode, int set_count, ScheduleState schedule, const Vector& x0,
                    const StopRule& stop, const TraceOptions& options, StepFn&& step,
                    std::span<const ConvexSet> distance_sets) {
  validate(stop);
  if (options.thinning == 0) throw Error(ErrorCode::InvalidArgument, "thinning must be >= 1");
  if (!x0.allFinite()) throw Error(ErrorCode::InvalidArgument, "x0 has non-finite entries");
  if (schedule.spec().count != set_count) {
    throw Error(ErrorCode::InvalidArgument,
                "schedule is over " + std::to_string(schedule.spec().count) + " indices but " +
                    std::to_string(set_count) + " sets were given");
  }

  Trace trace;
  trace.mode = mode;
  trace.set_count = set_count;
  trace.x0 = x0;
  trace.schedule = schedule.spec();

  const std::size_t tail_length =
      options.tail > 0 ? options.tail : 2 * default_coverage_window(set_count);
  std::vector<Iterate> thinned{{0, -1, x0}};
  std::deque<Iterate> tail{{0, -1, x0}};

  Vector x = x0;
  double norm = x.norm();
  std::size_t quiet_steps = 0;

  if (norm <= stop.norm_tol) {
    trace.stop_reason = StopReason::NormTolerance;
  } else {
    for (std::size_t n = 1;; ++n) {
      const auto index = schedule.next_index();
      if (!index) {
        trace.stop_reason = StopReason::ScheduleExhausted;
        break;
      }
      StepOutcome out = step(*index, x);
      const double prev_norm = norm;
      const double step_norm = (out.next - x).norm();
      norm = out.next.norm();

      const double residual = norm * norm - prev_norm * prev_norm + step_norm * step_norm;
      trace.max_decay_slack = std::max(trace.max_decay_slack, residual);
      trace.max_abs_identity_residual =
          std::max(trace.max_abs_identity_residual, std::abs(residual));

      if (options.checked) {
        const double scale = std::max(1.0, prev_norm * prev_norm);
        if (norm > prev_norm * (1.0 + kMonotoneSlack)) {
          trace.violations.push_back({n, "norm_monotone", norm - prev_norm});
        }
        if (mode == Mode::Projection) {
          if (residual > kIdentityTolerance * scale) {
            trace.violations.push_back({n, "decay_inequality", residual});
          }
          const ConvexSet& target = distance_sets[static_cast<std::size_t>(*index)];
          const double dist = distance(target, out.next);
          if (dist > membership_tolerance(out.next)) {
            trace.violations.push_back({n, "membership", dist});
          }
        } else {
          if (std::abs(residual) > kIdentityTolerance * scale) {
            trace.violations.push_back({n, "pythagoras", residual});
          }
          if (out.atom.size() > 0 && out.coefficient > 0.0) {
            const double leftover = std::abs(out.next.dot(out.atom));
            if (leftover > kIdentityTolerance * std::max(1.0, prev_norm)) {
              trace.violations.push_back({n, "selector_consistency", leftover});
            }
          }
        }
      }

      x = std::move(out.next);
      trace.records.push_back({n, *index, norm, step_norm, out.coefficient});
      if (options.record_distances) {
        for (const auto& s : distance_sets) trace.distances.push_back(distance(s, x));
      }
      if (n % options.thinning == 0) thinned.push_back({n, *index, x});
      tail.push_back({n, *index, x});
      if (tail.size() > tail_length) tail.pop_front();

      quiet_steps = step_norm <= stop.stagnation_eps ? quiet_steps + 1 : 0;
      if (norm <= stop.norm_tol) {
        trace.stop_reason = StopReason::NormTolerance;
        break;
      }
      if (stop.stagnation_window > 0 && quiet_steps >= stop.stagnation_window) {
        trace.stop_reason = StopReason::Stagnation;
        break;
      }
      if (n >= stop.max_iters) {
        trace.stop_reason = StopReason::MaxIterations;
        break;
      }
    }
  }

  trace.tail_start = tail.front().n;
  for (auto& it : thinned) {
    if (it.n < trace.tail_start) trace.iterates.push_back(std::move(it));
  }
  for (auto& it : tail) trace.iterates.push_back(std::move(it));
  if (trace.records.empty()) trace.max_decay_slack = 0.0;
  return trace;
}

void require_common_dimension(Eigen::Index d, Eigen::Index other, const std::string& what) {
  if (d != other) {
    throw Error(ErrorCode::DimensionMismatch,
                what + " has dimension " + std::to_string(other) + ", expected " +
                    std::to_string(d));
  }
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::Projection ? "projection" : "greedy";
}

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::NormTolerance: return "norm_tol";
    case StopReason::Stagnation: return "stagnation";
    case StopReason::MaxIterations: return "max_iters";
    case StopReason::ScheduleExhausted: return "schedule_exhausted";
  }
  return "unknown";
}

void validate(const StopRule& rule) {
  if (rule.max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (!(rule.norm_tol >= 0.0) || !(rule.stagnation_eps >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "stop tolerances must be >= 0");
  }
}

double Trace::final_norm() const { return records.empty() ? x0.norm() : records.back().norm; }

double Trace::r_estimate() const {
  // Norms are monotone up to rounding, so the infimum is (almost) the last.
  double r = x0.norm();
  for (const auto& rec : records) r = std::min(r, rec.norm);
  return r;
}

const Iterate* Trace::find_iterate(std::size_t n) const {
  auto it = std::lower_bound(iterates.begin(), iterates.end(), n,
                             [](const Iterate& a, std::size_t v) { return a.n < v; });
  if (it == iterates.end() || it->n != n) return nullptr;
  return &*it;
}

std::span<const Iterate> Trace::tail_iterates() const {
  auto it = std::lower_bound(iterates.begin(), iterates.end(), tail_start,
                             [](const Iterate& a, std::size_t v) { return a.n < v; });
  return {&*it, static_cast<std::size_t>(iterates.end() - it)};
}

Trace run_projection(std::span<const ConvexSet> sets, ScheduleState schedule, const Vector& x0,
                     const StopRule& stop, const TraceOptions& options) {
  if (sets.size() < 2) {
    throw Error(ErrorCode::InstanceInvalid, "need K >= 2 sets, got " + std::to_string(sets.size()));
  }
  for (const auto& s : sets) {
    require_common_dimension(x0.size(), s.dim(), "set '" + s.label() + "'");
    if (!contains(s, Vector::Zero(x0.size()))) {
      throw Error(ErrorCode::InstanceInvalid, "set '" + s.label() + "' does not contain 0");
    }
  }
  auto step = [&](int index, const Vector& x) {
    return StepOutcome{project(sets[static_cast<std::size_t>(index)], x),
                       std::numeric_limits<double>::quiet_NaN(), Vector{}};
  };
  return run_iteration(Mode::Projection, static_cast<int>(sets.size()), std::move(schedule), x0,
                       stop, options, step, sets);
}

Trace run_greedy(std::span<const Dictionary> dicts, ScheduleState schedule, const Vector& x0,
                 const StopRule& stop, const TraceOptions& options) {
  if (dicts.size() < 2) {
    throw Error(ErrorCode::InstanceInvalid,
                "need K >= 2 dictionaries, got " + std::to_string(dicts.size()));
  }
  for (const auto& d : dicts) {
    require_common_dimension(x0.size(), d.dim(), "dictionary '" + d.label() + "'");
  }
  const auto free = union_halfspace_free(dicts);
  if (!free.halfspace_free) {
    throw Error(ErrorCode::InstanceInvalid, "the union of the dictionaries lies in a half-space");
  }
  std::vector<ConvexSet> polars;
  if (options.record_distances) {
    for (const auto& d : dicts) polars.push_back(polar_cone_of_dictionary(d));
  }
  auto step = [&](int index, const Vector& x) {
    GreedyStep s = greedy_step_with_choice(dicts[static_cast<std::size_t>(index)], x);
    return StepOutcome{std::move(s.next), s.choice.coefficient, std::move(s.choice.atom)};
  };
  return run_iteration(Mode::Greedy, static_cast<int>(dicts.size()), std::move(schedule), x0,
                       stop, options, step, polars);
}

FunctionalCheck segment_functional_check(const Trace& trace, std::size_t s, std::size_t t,
                                         const Vector& a, std::span<const int> J,
                                         std::span<const ConvexSet> membership_sets, Mode mode) {
  if (!(s < t) || t > trace.steps()) {
    throw Error(ErrorCode::PreconditionViolated,
                "segment (" + std::to_string(s) + "," + std::to_string(t) +
                    ") is not inside the trace");
  }
  std::vector<char> in_j(membership_sets.size(), 0);
  for (int j : J) {
    if (j < 0 || static_cast<std::size_t>(j) >= membership_sets.size()) {
      throw Error(ErrorCode::PreconditionViolated, "J contains an unknown index");
    }
    in_j[static_cast<std::size_t>(j)] = 1;
  }
  for (std::size_t n = s + 1; n <= t; ++n) {
    const int idx = trace.records[n - 1].index;
    if (idx < 0 || static_cast<std::size_t>(idx) >= in_j.size() ||
        !in_j[static_cast<std::size_t>(idx)]) {
      throw Error(ErrorCode::PreconditionViolated,
                  "step " + std::to_string(n) + " uses index " + std::to_string(idx + 1) +
                      " outside J");
    }
  }
  for (int j : J) {
    const ConvexSet& set = membership_sets[static_cast<std::size_t>(j)];
    if (!contains(set, a)) {
      throw Error(ErrorCode::PreconditionViolated,
                  "functional is not a member of A_" + std::to_string(j + 1));
    }
  }

  auto iterate = [&](std::size_t n) -> const Vector& {
    const Iterate* it = trace.find_iterate(n);
    if (!it) {
      throw Error(ErrorCode::PreconditionViolated,
                  "iterate " + std::to_string(n) + " was not stored in the trace");
    }
    return it->x;
  };

  FunctionalCheck report;
  if (mode == Mode::Projection) {
    const Vector& xs = iterate(s);
    const Vector& xt = iterate(t);
    report.worst_margin = (xt - xs).dot(a) - 0.5 * (xt.squaredNorm() - xs.squaredNorm());
    report.steps_checked = t - s;
    report.passed = report.worst_margin >= -1e-8;
    return report;
  }
  const Vector* prev = &iterate(s);
  for (std::size_t n = s + 1; n <= t; ++n) {
    const Vector& cur = iterate(n);
    report.worst_margin = std::min(report.worst_margin, (cur - *prev).dot(a));
    ++report.steps_checked;
    prev = &cur;
  }
  report.passed = report.worst_margin >= -1e-10;
  return report;
}

}  // namespace altproj
