#include "altproj/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "altproj/error.hpp"
#include "altproj/rng.hpp"

namespace altproj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pair_tolerance(const ClusterPoint& w, const ClusterPoint& wp) {
  const double floor =
      1e-9 * std::max({1.0, w.w.norm(), wp.w.norm()});
  return std::max(10.0 * (w.radius + wp.radius), floor);
}

bool all_cones(std::span<const ConvexSet> sets, std::span<const int> J) {
  return std::all_of(J.begin(), J.end(),
                     [&](int j) { return sets[static_cast<std::size_t>(j)].is_cone(); });
}

// Samples scaled to at most unit norm (exactly unit for cones), which keeps
// them inside sets that contain the origin.
std::vector<Vector> scaled_samples(std::span<const ConvexSet> sets, std::span<const int> J,
                                   std::size_t count, Rng& rng) {
  const bool cones = all_cones(sets, J);
  std::vector<Vector> out;
  for (Vector a : sample_intersection(sets, J, count, rng)) {
    const double n = a.norm();
    if (n < 1e-12) continue;
    if (cones || n > 1.0) a /= n;
    out.push_back(std::move(a));
  }
  return out;
}

NamedCheck functional_check(std::string name, const Vector& diff, const std::vector<Vector>& as,
                            double tol) {
  double worst = as.empty() ? 0.0 : kInf;
  for (const auto& a : as) worst = std::min(worst, diff.dot(a));
  return {std::move(name), worst >= -tol, worst, tol};
}

NamedCheck count_check(std::string name, std::size_t value, std::size_t needed) {
  return {std::move(name), value >= needed, static_cast<double>(value),
          static_cast<double>(needed)};
}

bool same_cluster(const ClusterPoint& a, const ClusterPoint& b) {
  return a.support == b.support && a.w == b.w;
}

std::vector<int> visited_indices(const Trace& trace,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& segs) {
  std::set<int> seen;
  for (const auto& [n, m] : segs) {
    for (std::size_t k = std::max<std::size_t>(n, 1); k + 1 <= m; ++k) {
      seen.insert(trace.records[k - 1].index);
    }
  }
  return {seen.begin(), seen.end()};
}

double max_inner(const Matrix& atoms, const Vector& s) { return (atoms.transpose() * s).maxCoeff(); }

// Pattern search on the sphere for min_s max_g <s, g>.
double refine_direction(const Matrix& atoms, Vector s, int depth, Rng& rng) {
  const Eigen::Index d = atoms.rows();
  double best = max_inner(atoms, s);
  double step = 0.25;
  std::vector<Vector> moves;
  for (Eigen::Index i = 0; i < d; ++i) {
    moves.push_back(Vector::Unit(d, i));
    moves.push_back(-Vector::Unit(d, i));
    for (Eigen::Index j = i + 1; j < d; ++j) {
      for (double sa : {1.0, -1.0}) {
        for (double sb : {1.0, -1.0}) {
          Vector v = Vector::Zero(d);
          v[i] = sa;
          v[j] = sb;
          moves.push_back(v.normalized());
        }
      }
    }
  }
  int level = 0;
  while (level < depth) {
    bool improved = false;
    for (int r = 0; r < 4; ++r) moves.push_back(rng.unit_vector(d));
    for (const Vector& mv : moves) {
      Vector trial = (s + step * mv).normalized();
      const double f = max_inner(atoms, trial);
      if (f < best) {
        best = f;
        s = std::move(trial);
        improved = true;
      }
    }
    moves.resize(moves.size() - 4);
    if (!improved) {
      step *= 0.5;
      ++level;
    }
  }
  return best;
}

std::vector<Vector> unit_points(std::span<const ConvexSet> cones, const std::vector<int>& J,
                                std::size_t count, Rng& rng) {
  std::vector<Vector> out;
  for (const Vector& v : sample_intersection(cones, J, count, rng)) {
    const double n = v.norm();
    if (n > 1e-6) out.push_back(v / n);
  }
  return out;
}

}  // namespace

std::vector<ClusterPoint> cluster_points(std::span<const Iterate> iterates, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "cluster eps must be > 0");
  if (iterates.size() < 3) {
    throw Error(ErrorCode::InsufficientIterates,
                "need at least 3 stored iterates, have " + std::to_string(iterates.size()));
  }
  struct Group {
    const Vector* leader;
    std::vector<const Iterate*> members;
  };
  std::vector<Group> groups;
  for (const auto& it : iterates) {
    auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& grp) {
      return (it.x - *grp.leader).norm() <= 0.5 * eps;
    });
    if (g == groups.end()) {
      groups.push_back({&it.x, {&it}});
    } else {
      g->members.push_back(&it);
    }
  }
  std::vector<ClusterPoint> out;
  for (const auto& g : groups) {
    if (g.members.size() < 3) continue;
    ClusterPoint c;
    c.w = g.members.back()->x;
    for (const Iterate* m : g.members) {
      c.support.push_back(m->n);
      c.radius = std::max(c.radius, (m->x - c.w).norm());
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ClusterPoint> cluster_points(const Trace& trace, double eps) {
  return cluster_points(trace.tail_iterates(), eps);
}

bool JSet::contains(int j) const { return std::binary_search(members.begin(), members.end(), j); }

JSet j_set(const Vector& w, std::span<const ConvexSet> sets, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "J-set tolerance must be > 0");
  JSet out{w, {}, tol};
  for (std::size_t j = 0; j < sets.size(); ++j) {
    if (distance(sets[j], w) <= tol) out.members.push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<Vector> sample_intersection(std::span<const ConvexSet> sets, std::span<const int> J,
                                        std::size_t count, Rng& rng) {
  std::vector<Vector> out;
  if (sets.empty()) return out;
  const Eigen::Index d = sets.front().dim();
  if (J.empty()) {
    for (std::size_t k = 0; k < count; ++k) out.push_back(rng.gaussian(d));
    return out;
  }
  auto member = [&](std::size_t j) -> const ConvexSet& { return sets[j]; };
  if (J.size() == 1) {
    for (std::size_t k = 0; k < count; ++k) {
      out.push_back(sample_member(member(static_cast<std::size_t>(J[0])), rng));
    }
    return out;
  }
  const bool halfspace_cones = std::all_of(J.begin(), J.end(), [&](int j) {
    return member(static_cast<std::size_t>(j)).as<HalfspaceCone>() != nullptr;
  });
  if (halfspace_cones) {
    Eigen::Index total = 0;
    for (int j : J) total += member(static_cast<std::size_t>(j)).as<HalfspaceCone>()->normals.cols();
    Matrix normals(d, total);
    Eigen::Index at = 0;
    for (int j : J) {
      const Matrix& n = member(static_cast<std::size_t>(j)).as<HalfspaceCone>()->normals;
      normals.middleCols(at, n.cols()) = n;
      at += n.cols();
    }
    const ConvexSet combined(HalfspaceCone{std::move(normals)});
    for (std::size_t k = 0; k < count; ++k) out.push_back(sample_member(combined, rng));
    return out;
  }
  const bool subspaces = std::all_of(J.begin(), J.end(), [&](int j) {
    return member(static_cast<std::size_t>(j)).as<LinearSubspace>() != nullptr;
  });
  if (subspaces) {
    std::vector<Matrix> complements;
    Eigen::Index total = 0;
    for (int j : J) {
      complements.push_back(
          orthogonal_complement(member(static_cast<std::size_t>(j)).as<LinearSubspace>()->basis));
      total += complements.back().cols();
    }
    Matrix stacked(d, total);
    Eigen::Index at = 0;
    for (const auto& c : complements) {
      stacked.middleCols(at, c.cols()) = c;
      at += c.cols();
    }
    const ConvexSet common(LinearSubspace{orthogonal_complement(stacked)});
    for (std::size_t k = 0; k < count; ++k) out.push_back(sample_member(common, rng));
    return out;
  }
  auto in_all = [&](const Vector& v) {
    return std::all_of(J.begin(), J.end(),
                       [&](int j) { return contains(member(static_cast<std::size_t>(j)), v); });
  };
  for (std::size_t k = 0; k < count; ++k) {
    Vector v = sample_member(member(static_cast<std::size_t>(J[0])), rng);
    for (int sweep = 0; sweep < 200 && !in_all(v); ++sweep) {
      for (int j : J) v = project(member(static_cast<std::size_t>(j)), v);
    }
    if (in_all(v)) out.push_back(std::move(v));
  }
  return out;
}

bool PairReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const NamedCheck& c) {
    return c.passed || c.name == "iv_widened";
  });
}

const NamedCheck* PairReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::pair<std::size_t, std::size_t>> interleave(std::span<const std::size_t> first,
                                                            std::span<const std::size_t> second) {
  std::vector<std::pair<std::size_t, int>> events;
  for (std::size_t n : first) events.emplace_back(n, 0);
  for (std::size_t n : second) events.emplace_back(n, 1);
  std::sort(events.begin(), events.end());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  bool have_open = false;
  std::size_t open = 0;
  for (const auto& [n, which] : events) {
    if (which == 0) {
      open = n;
      have_open = true;
    } else if (have_open && open < n) {
      pairs.emplace_back(open, n);
      have_open = false;
    }
  }
  if (pairs.size() < 2) {
    throw Error(ErrorCode::NotInterleaved,
                "supports alternate only " + std::to_string(pairs.size()) + " time(s)");
  }
  return pairs;
}

PairReport verify_pair_theorem1(const Trace& trace, const ClusterPoint& w, const ClusterPoint& wp,
                                std::span<const ConvexSet> sets, const PairOptions& options) {
  PairReport rep;
  rep.statement = "theorem1";
  rep.first = w;
  rep.second = wp;
  rep.degenerate = same_cluster(w, wp);
  if (!rep.degenerate) rep.segments = interleave(w.support, wp.support);
  rep.tolerance = pair_tolerance(w, wp);
  rep.j_first = j_set(w.w, sets, rep.tolerance);
  rep.j_second = j_set(wp.w, sets, rep.tolerance);

  std::size_t fresh = 0;
  std::size_t shared = 0;
  for (int j : rep.j_second.members) {
    if (rep.j_first.contains(j)) {
      ++shared;
    } else {
      ++fresh;
    }
  }
  rep.checks.push_back(count_check("i_new_index", fresh, 1));
  rep.checks.push_back(count_check("ii_shared_pair", shared, 2));
  rep.checks.push_back(count_check("iii_triple", rep.j_second.members.size(), 3));

  Rng rng(options.seed);
  const Vector diff = wp.w - w.w;
  const auto as = scaled_samples(sets, rep.j_first.members, options.sample_count, rng);
  rep.checks.push_back(functional_check("iv_functional", diff, as, rep.tolerance));

  const double growth = wp.w.squaredNorm() - w.w.squaredNorm() - diff.squaredNorm();
  rep.checks.push_back({"norm_growth", growth >= -rep.tolerance, growth, rep.tolerance});

  if (options.widen_to_segment_indices && !rep.segments.empty()) {
    const auto visited = visited_indices(trace, rep.segments);
    const auto wide = scaled_samples(sets, visited, options.sample_count, rng);
    rep.checks.push_back(functional_check("iv_widened", diff, wide, rep.tolerance));
  }
  return rep;
}

PairReport verify_pair_theorem2(const Trace& trace, const ClusterPoint& w, const ClusterPoint& wp,
                                std::span<const ConvexSet> sets, const PairOptions& options) {
  PairReport rep;
  rep.statement = "theorem2";
  rep.first = w;
  rep.second = wp;
  rep.degenerate = same_cluster(w, wp);
  if (!rep.degenerate) rep.segments = interleave(w.support, wp.support);
  rep.tolerance = pair_tolerance(w, wp);
  rep.j_first = j_set(w.w, sets, rep.tolerance);
  rep.j_second = j_set(wp.w, sets, rep.tolerance);

  std::size_t steps = 0;
  for (const auto& [n, m] : rep.segments) {
    for (std::size_t k = n + 1; k < m; ++k) {
      const int idx = trace.records.at(k - 1).index;
      if (!rep.j_first.contains(idx) || !rep.j_second.contains(idx)) {
        throw Error(ErrorCode::SegmentIndexOutside,
                    "step " + std::to_string(k) + " uses index " + std::to_string(idx + 1) +
                        " outside J(w) ∩ J(w')");
      }
      ++steps;
    }
  }
  rep.checks.push_back({"segment_indices", true, static_cast<double>(steps), 0.0});

  Rng rng(options.seed);
  const Vector diff = wp.w - w.w;
  const auto as = scaled_samples(sets, rep.j_first.members, options.sample_count, rng);
  const auto bs = scaled_samples(sets, rep.j_second.members, options.sample_count, rng);
  rep.checks.push_back(functional_check("i_functional_first", diff, as, rep.tolerance));
  rep.checks.push_back(functional_check("ii_functional_second", diff, bs, rep.tolerance));

  if (options.widen_to_segment_indices && !rep.segments.empty()) {
    const auto visited = visited_indices(trace, rep.segments);
    const auto wide = scaled_samples(sets, visited, options.sample_count, rng);
    rep.checks.push_back(functional_check("iv_widened", diff, wide, rep.tolerance));
  }
  return rep;
}

WipResult wip_check(const ConvexSet& set, std::size_t sample_count, std::uint64_t seed) {
  if (!contains(set, Vector::Zero(set.dim()))) {
    throw Error(ErrorCode::PreconditionViolated, "wip_check needs a set containing 0");
  }
  std::vector<Vector> samples;
  if (const auto* g = set.as<GeneratedCone>()) {
    for (Eigen::Index j = 0; j < g->generators.cols(); ++j) samples.push_back(g->generators.col(j));
  } else if (const auto* s = set.as<LinearSubspace>()) {
    for (Eigen::Index j = 0; j < s->basis.cols(); ++j) samples.push_back(s->basis.col(j));
  }
  Rng rng(seed);
  for (std::size_t k = 0; k < sample_count; ++k) samples.push_back(sample_member(set, rng));

  WipResult result;
  for (const Vector& a : samples) {
    if (a.norm() < 1e-12) continue;
    ++result.samples;
    bool found = false;
    double lambda = 1.0;
    for (int e = 0; e <= 20; ++e, lambda *= 0.5) {
      if (contains(set, -lambda * a)) {
        found = true;
        break;
      }
    }
    if (!found) {
      result.holds = false;
      result.witness = a;
      return result;
    }
    result.smallest_lambda = std::min(result.smallest_lambda, lambda);
  }
  return result;
}

SeparationEstimate separation_value(std::span<const Dictionary> dicts, std::array<int, 4> quad,
                                    const SeparationOptions& options) {
  std::set<int> distinct;
  for (int q : quad) {
    if (q < 0 || static_cast<std::size_t>(q) >= dicts.size()) {
      throw Error(ErrorCode::InvalidArgument, "quadruple index out of range");
    }
    distinct.insert(q);
  }
  std::vector<Matrix> parts;
  Eigen::Index total = 0;
  const Eigen::Index d = dicts.front().dim();
  for (int q : distinct) {
    parts.push_back(generator_matrix(dicts[static_cast<std::size_t>(q)]));
    total += parts.back().cols();
  }
  Matrix atoms(d, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    atoms.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) atoms.col(j).normalize();

  Rng rng(options.seed);
  // Keep the few best sampled directions and refine each of them.
  std::vector<std::pair<double, Vector>> best;
  const std::size_t keep = 8;
  for (std::size_t k = 0; k < options.directions; ++k) {
    Vector s = rng.unit_vector(d);
    const double f = max_inner(atoms, s);
    if (best.size() < keep || f < best.back().first) {
      best.emplace_back(f, std::move(s));
      std::sort(best.begin(), best.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (best.size() > keep) best.pop_back();
    }
  }
  double value = kInf;
  for (auto& [f, s] : best) {
    value = std::min(value, refine_direction(atoms, s, options.refinement_depth, rng));
  }
  return {value, options.directions, options.refinement_depth};
}

SeparationEstimate separation_value(std::span<const ConvexSet> cones, std::array<int, 4> quad,
                                    const SeparationOptions& options) {
  std::set<int> distinct(quad.begin(), quad.end());
  if (distinct.size() != 4) {
    throw Error(ErrorCode::NotApplicable, "two different triples need four distinct indices");
  }
  for (int q : quad) {
    if (q < 0 || static_cast<std::size_t>(q) >= cones.size()) {
      throw Error(ErrorCode::InvalidArgument, "quadruple index out of range");
    }
    if (!cones[static_cast<std::size_t>(q)].is_cone()) {
      throw Error(ErrorCode::UnsupportedSet, "separation in projection mode needs cones");
    }
  }
  Rng rng(options.seed);
  const std::size_t per_triple = std::max<std::size_t>(16, options.directions / 16);
  const auto u = unit_points(cones, {quad[0], quad[1], quad[2]}, per_triple, rng);
  const auto v = unit_points(cones, {quad[0], quad[1], quad[3]}, per_triple, rng);
  double value = kInf;
  for (const auto& a : u) {
    for (const auto& b : v) value = std::min(value, (a - b).norm());
  }
  return {value, per_triple, 0};
}

SeparationEstimate min_separation(std::span<const Dictionary> dicts,
                                  const SeparationOptions& options) {
  const int k = static_cast<int>(dicts.size());
  if (k < 4) throw Error(ErrorCode::NotApplicable, "needs at least four dictionaries");
  SeparationEstimate out{kInf, options.directions, options.refinement_depth};
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      for (int c = b + 1; c < k; ++c)
        for (int e = c + 1; e < k; ++e) {
          out.value = std::min(out.value, separation_value(dicts, {a, b, c, e}, options).value);
        }
  return out;
}

SeparationEstimate min_separation(std::span<const ConvexSet> cones,
                                  const SeparationOptions& options) {
  const int k = static_cast<int>(cones.size());
  if (k < 4) throw Error(ErrorCode::NotApplicable, "needs at least four cones");
  SeparationEstimate out{kInf, 0, 0};
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      for (int p = 0; p < k; ++p)
        for (int q = p + 1; q < k; ++q) {
          if (p == i || p == j || q == i || q == j) continue;
          const auto est = separation_value(cones, {i, j, p, q}, options);
          out.value = std::min(out.value, est.value);
          out.directions = est.directions;
        }
  return out;
}

LimitReport analyze_trace(const Trace& trace, std::span<const ConvexSet> sets,
                          const AnalysisOptions& options) {
  LimitReport rep;
  rep.eps = options.eps;
  rep.final_norm = trace.final_norm();
  rep.r_estimate = trace.r_estimate();
  try {
    rep.clusters = cluster_points(trace, options.eps);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientIterates) throw;
    rep.notes.emplace_back(e.what());
    return rep;
  }
  for (const auto& c : rep.clusters) {
    rep.jsets.push_back(j_set(c.w, sets, std::max(10.0 * c.radius, membership_tolerance(c.w))));
  }

  PairOptions pair_options{options.sample_count, options.seed, options.widen_to_segment_indices};
  const std::size_t limit = std::min(rep.clusters.size(), options.max_clusters_for_pairs);
  std::vector<std::pair<std::size_t, std::size_t>> theorem1_pairs;
  std::size_t outside = 0;
  for (std::size_t a = 0; a < limit; ++a) {
    for (std::size_t b = 0; b < limit; ++b) {
      if (a == b) continue;
      try {
        rep.pairs.push_back(
            verify_pair_theorem1(trace, rep.clusters[a], rep.clusters[b], sets, pair_options));
        theorem1_pairs.emplace_back(a, b);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotInterleaved) throw;
        continue;
      }
      try {
        rep.pairs.push_back(
            verify_pair_theorem2(trace, rep.clusters[a], rep.clusters[b], sets, pair_options));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SegmentIndexOutside) throw;
        ++outside;
      }
    }
  }
  if (outside > 0) {
    rep.notes.push_back(std::to_string(outside) +
                        " pair(s) skipped for the two-sided check: segment indices outside "
                        "J(w) ∩ J(w')");
  }

  // Persistence: the same structure must reappear at eps / 10.
  std::vector<ClusterPoint> fine;
  try {
    fine = cluster_points(trace, options.eps / 10.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientIterates) throw;
  }
  auto nearest_fine = [&](const Vector& w) -> const ClusterPoint* {
    const ClusterPoint* best = nullptr;
    double dist = options.eps;
    for (const auto& f : fine) {
      const double dd = (f.w - w).norm();
      if (dd <= dist) {
        dist = dd;
        best = &f;
      }
    }
    return best;
  };
  const double floor = 10.0 * options.eps;
  for (std::size_t c = 0; c < rep.clusters.size(); ++c) {
    const auto& cl = rep.clusters[c];
    const double n = cl.w.norm();
    const bool on_limit_sphere = std::abs(n - rep.final_norm) <= 2.0 * options.eps + cl.radius;
    if (n > floor && on_limit_sphere && nearest_fine(cl.w)) {
      rep.candidates.push_back({"nonzero_cluster", c, std::nullopt, n});
    }
  }
  std::size_t pair_slot = 0;
  for (const auto& pr : rep.pairs) {
    if (pr.statement != "theorem1") continue;
    const auto [a, b] = theorem1_pairs[pair_slot++];
    if (!pr.all_passed() || pr.first.w.norm() <= floor || pr.second.w.norm() <= floor) continue;
    const ClusterPoint* fa = nearest_fine(pr.first.w);
    const ClusterPoint* fb = nearest_fine(pr.second.w);
    if (!fa || !fb || fa == fb) continue;
    try {
      const auto again = verify_pair_theorem1(trace, *fa, *fb, sets, pair_options);
      if (again.all_passed()) {
        rep.candidates.push_back({"theorem1_pair", a, b, pr.second.w.norm()});
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotInterleaved) throw;
    }
  }
  return rep;
}

}  // namespace altproj
