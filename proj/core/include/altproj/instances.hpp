#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "altproj/dictionaries.hpp"
#include "altproj/engine.hpp"
#include "altproj/geometry.hpp"
#include "altproj/schedules.hpp"

namespace altproj {

enum class Certificate {
  TrivialIntersectionByConstruction,
  SubspacesWithKnownIntersection,
  SymmetricDictionaries,
  SeparatedCones,
  HalfspaceFreeUnion,
};

std::string_view to_string(Certificate c) noexcept;
Certificate certificate_from_string(std::string_view name);

struct InstanceSpec {
  std::string id;
  Eigen::Index dim = 0;
  Mode mode = Mode::Projection;
  std::vector<ConvexSet> sets;          // projection mode
  std::vector<Dictionary> dictionaries;  // greedy mode
  Certificate certificate = Certificate::TrivialIntersectionByConstruction;
  std::uint64_t seed = 0;
  std::optional<ScheduleSpec> schedule;
  std::optional<Vector> x0;
  /// Recorded separation estimate for separated cone instances (K >= 4).
  std::optional<double> separation;

  [[nodiscard]] int count() const noexcept;
};

/// Mode and dimension agree with the contents; every set or dictionary is
/// valid. Throws InstanceInvalid.
void validate(const InstanceSpec& instance);

/// Sets A_j indexed like the schedule: the projection sets, or the polar
/// cones of the dictionaries.
std::vector<ConvexSet> membership_sets(const InstanceSpec& instance);

/// Starting point: the stored x0, or a standard Gaussian drawn from the seed.
Vector starting_point(const InstanceSpec& instance);

InstanceSpec gen_subspace_instance(Eigen::Index d, int k, std::uint64_t seed);
InstanceSpec gen_cone_instance(Eigen::Index d, int k, std::uint64_t seed, bool separated);
InstanceSpec gen_dictionary_instance(Eigen::Index d, int k, std::uint64_t seed, bool symmetric,
                                     Eigen::Index atoms_per_dictionary = 0);

/// Stacked orthogonal complements of the subspaces; full rank d means the
/// intersection is {0}. Computed by SVD with threshold 1e-10.
Eigen::Index stacked_complement_rank(std::span<const ConvexSet> subspaces);

/// Exhaustive projection onto a generated cone through all 2^m generator
/// subsets. Throws BudgetExceeded for m > 12 or d > 8.
Vector oracle_cone_projection(const GeneratedCone& cone, const Vector& x);

/// Exhaustive half-space test through facet normals of (d-1)-subsets of the
/// atoms. Throws BudgetExceeded beyond `max_subsets` subsets.
bool oracle_halfspace_free(const Matrix& atoms, std::size_t max_subsets = 200'000);

enum class SuiteClass { Subspaces, Cones, SeparatedCones, SymmetricDictionaries, Dictionaries };

std::string_view to_string(SuiteClass c) noexcept;
std::vector<SuiteClass> all_suite_classes();

struct SuiteEntry {
  SuiteClass suite;
  std::uint64_t seed;
  Eigen::Index dim;
  int count;
};

/// Parameters of the standard suite: K = 2 + (s-1) mod 4, d = 2 + 3s mod 7
/// (raised to K for subspaces), seeds 1..50 per class.
SuiteEntry standard_suite_entry(SuiteClass suite, std::uint64_t seed);
InstanceSpec make_suite_instance(const SuiteEntry& entry);
std::vector<InstanceSpec> standard_suite(SuiteClass suite, std::uint64_t first_seed = 1,
                                         std::uint64_t last_seed = 50);

}  // namespace altproj
