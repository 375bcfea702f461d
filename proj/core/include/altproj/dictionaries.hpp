#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>

#include "altproj/geometry.hpp"

namespace altproj {

/// Finite list of unit atoms stored as columns.
struct FiniteDictionary {
  Matrix atoms;
};

/// cone ∩ S(H); its greedy selector is the normalized metric projection.
struct ConeSection {
  ConvexSet cone;
};

using DictionaryKind = std::variant<FiniteDictionary, ConeSection>;

class Dictionary {
 public:
  Dictionary(DictionaryKind kind, std::string label = {});

  static Dictionary finite(Matrix atoms, std::string label = {});
  static Dictionary cone_section(ConvexSet cone, std::string label = {});

  [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
  [[nodiscard]] const DictionaryKind& kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

  template <class T>
  [[nodiscard]] const T* as() const noexcept {
    return std::get_if<T>(&kind_);
  }

 private:
  DictionaryKind kind_;
  std::string label_;
  Eigen::Index dim_ = 0;
};

void validate(const Dictionary& dict);

/// g_i(x) and <x, g_i(x)>; the zero choice has a zero atom and coefficient.
struct GreedyChoice {
  Vector atom;
  double coefficient = 0.0;

  [[nodiscard]] bool is_zero() const noexcept { return coefficient == 0.0; }
};

/// A supremum counts as positive only above 1e-14 * max(1, |x|).
double zero_choice_threshold(const Vector& x);

/// Argmax atom (lowest index on ties) for finite dictionaries; normalized
/// projection onto the cone for cone sections.
GreedyChoice select(const Dictionary& dict, const Vector& x);

struct GreedyStep {
  Vector next;
  GreedyChoice choice;
};

GreedyStep greedy_step_with_choice(const Dictionary& dict, const Vector& x);

/// x - <x, g(x)> g(x).
Vector greedy_step(const Dictionary& dict, const Vector& x);

struct HalfspaceFreeResult {
  bool halfspace_free = false;
  /// Unit v != 0 with <v, g> <= 0 for every atom, when not half-space free.
  std::optional<Vector> witness;
};

/// Whether 0 is an interior point of the convex hull of the columns, i.e.
/// the columns positively span R^d.
HalfspaceFreeResult halfspace_free_check(const Matrix& atoms);

/// Same test on the union of the dictionaries' atoms (cone sections
/// contribute their generators).
HalfspaceFreeResult halfspace_free_check(std::span<const Dictionary> dicts);

/// Same question, also for cone sections given by half-space normals: the
/// union lies in a half-space iff the polar cones share a nonzero point,
/// decided by a nonnegative least squares feasibility solve.
HalfspaceFreeResult union_halfspace_free(std::span<const Dictionary> dicts);

/// Atoms of a finite dictionary, or generators of a cone section's cone
/// (a subspace contributes ±basis). Half-space cones are rejected.
Matrix generator_matrix(const Dictionary& dict);

/// A_i = {y : <y, g> <= 0 for all g in D_i}.
ConvexSet polar_cone_of_dictionary(const Dictionary& dict);

struct BridgeOptions {
  std::size_t sample_count = 256;
  std::uint64_t seed = 0;
};

/// Dictionaries (A_1* ∩ S, A_2* ∩ S) whose greedy steps reproduce metric
/// projections onto A_1 and A_2. Throws IntersectionNotTrivial when a
/// sampled unit direction lies in both cones.
std::pair<Dictionary, Dictionary> bridge_dictionaries(const ConvexSet& first,
                                                      const ConvexSet& second,
                                                      const BridgeOptions& options = {});

}  // namespace altproj
