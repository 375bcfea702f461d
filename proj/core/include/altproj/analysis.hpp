#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "altproj/dictionaries.hpp"
#include "altproj/engine.hpp"
#include "altproj/geometry.hpp"

namespace altproj {

class Rng;

/// Finite-dimensional stand-in for a weak partial limit: a group of stored
/// iterates within `radius` of the representative `w`, which is the last
/// member (an actual iterate, never an average).
struct ClusterPoint {
  Vector w;
  std::vector<std::size_t> support;  // iterate numbers n_k, increasing, >= 3 of them
  double radius = 0.0;
};

/// Leader clustering of the iterates at radius eps. Groups with fewer than
/// three members are dropped. Throws InsufficientIterates for fewer than
/// three iterates.
std::vector<ClusterPoint> cluster_points(std::span<const Iterate> iterates, double eps);

/// Clusters the stored tail of the trace.
std::vector<ClusterPoint> cluster_points(const Trace& trace, double eps);

struct JSet {
  Vector w;
  std::vector<int> members;  // zero-based, increasing
  double tol = 0.0;

  [[nodiscard]] bool contains(int j) const;
};

/// J(w) = {j : dist(A_j, w) <= tol}.
JSet j_set(const Vector& w, std::span<const ConvexSet> sets, double tol);

/// Members of A_J = ∩_{j in J} A_j. Exact constructions are used for
/// intersections of subspaces and of half-space cones; other combinations
/// start from a member of the first set and run cyclic projections, keeping
/// only points that pass every membership test. May return fewer than
/// `count` points.
std::vector<Vector> sample_intersection(std::span<const ConvexSet> sets, std::span<const int> J,
                                        std::size_t count, Rng& rng);

struct NamedCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

/// Diagnostic report on a pair of cluster points; never a certificate.
struct PairReport {
  std::string statement;  // "theorem1" or "theorem2"
  ClusterPoint first;     // w
  ClusterPoint second;    // w'
  JSet j_first;
  JSet j_second;
  std::vector<std::pair<std::size_t, std::size_t>> segments;  // (n_k, m_k)
  std::vector<NamedCheck> checks;
  double tolerance = 0.0;
  bool degenerate = false;  // w' is w

  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] const NamedCheck* find(std::string_view name) const;
};

struct PairOptions {
  std::size_t sample_count = 64;
  std::uint64_t seed = 0;
  /// Also test the functional over A_{J(w,w')}, the sets visited on the
  /// segments [n_k, m_k - 1]; recorded as an extra, uninterpreted check.
  bool widen_to_segment_indices = false;
};

/// Alternating subsequences n_1 < m_1 < n_2 < m_2 < ... taken from the two
/// supports; throws NotInterleaved when fewer than two pairs exist.
std::vector<std::pair<std::size_t, std::size_t>> interleave(std::span<const std::size_t> first,
                                                            std::span<const std::size_t> second);

/// Properties (i)-(iv) and norm growth, at tolerance 10 * (radius + radius').
PairReport verify_pair_theorem1(const Trace& trace, const ClusterPoint& w, const ClusterPoint& wp,
                                std::span<const ConvexSet> sets, const PairOptions& options = {});

/// Two-sided functional inequalities over A_{J(w)} and A_{J(w')}; throws
/// SegmentIndexOutside when a step strictly between n_k and m_k uses an
/// index outside J(w) ∩ J(w').
PairReport verify_pair_theorem2(const Trace& trace, const ClusterPoint& w, const ClusterPoint& wp,
                                std::span<const ConvexSet> sets, const PairOptions& options = {});

struct WipResult {
  bool holds = true;
  std::optional<Vector> witness;  // first member a with no admissible lambda
  double smallest_lambda = 1.0;   // over the samples that succeeded
  std::size_t samples = 0;
};

/// Searches lambda in {1, 1/2, ..., 2^-20} with -lambda a in the set for
/// sampled members a (extreme rays and basis vectors first).
WipResult wip_check(const ConvexSet& set, std::size_t sample_count, std::uint64_t seed = 0);

struct SeparationOptions {
  std::size_t directions = 4096;
  int refinement_depth = 40;
  std::uint64_t seed = 0;
};

struct SeparationEstimate {
  /// Sampled estimate; for dictionaries an upper bound on the true infimum.
  /// +inf in projection mode when a triple intersection has no unit points.
  double value = 0.0;
  std::size_t directions = 0;
  int refinement_depth = 0;
};

/// inf_{|s|=1} max_{g in D_i ∪ D_j ∪ D_k ∪ D_l} <s, g>. Repeated indices are
/// allowed (the union simply has fewer members).
SeparationEstimate separation_value(std::span<const Dictionary> dicts, std::array<int, 4> quad,
                                    const SeparationOptions& options = {});

/// Smallest distance between sampled unit points of A_{i,j,k} and A_{i,j,l};
/// needs four distinct indices, otherwise NotApplicable.
SeparationEstimate separation_value(std::span<const ConvexSet> cones, std::array<int, 4> quad,
                                    const SeparationOptions& options = {});

/// Minimum over all quadruples of distinct indices; NotApplicable for K < 4.
SeparationEstimate min_separation(std::span<const Dictionary> dicts,
                                  const SeparationOptions& options = {});
SeparationEstimate min_separation(std::span<const ConvexSet> cones,
                                  const SeparationOptions& options = {});

struct CounterexampleCandidate {
  std::string kind;  // "nonzero_cluster" or "theorem1_pair"
  std::size_t cluster = 0;
  std::optional<std::size_t> partner;
  double norm = 0.0;
};

struct AnalysisOptions {
  double eps = 1e-3;
  std::size_t sample_count = 64;
  std::uint64_t seed = 0;
  bool widen_to_segment_indices = false;
  std::size_t max_clusters_for_pairs = 16;
};

struct LimitReport {
  double eps = 0.0;
  double final_norm = 0.0;
  double r_estimate = 0.0;
  std::vector<ClusterPoint> clusters;
  std::vector<JSet> jsets;
  std::vector<PairReport> pairs;
  std::vector<std::string> notes;
  std::vector<CounterexampleCandidate> candidates;

  [[nodiscard]] bool has_candidates() const noexcept { return !candidates.empty(); }
};

/// Clusters the tail, computes J-sets, verifies every interleaved pair and
/// flags counterexample candidates: nonzero cluster points that sit on the
/// limiting sphere and persist at eps / 10, and pairs that pass every
/// Theorem-1 style check with nonzero norms at both eps and eps / 10.
/// `sets` are the A_j (projection sets or polar cones of the dictionaries).
LimitReport analyze_trace(const Trace& trace, std::span<const ConvexSet> sets,
                          const AnalysisOptions& options = {});

}  // namespace altproj
