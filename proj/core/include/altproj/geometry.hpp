#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

namespace altproj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Rng;

/// Span of the orthonormal columns of `basis` (d x k, k may be zero).
struct LinearSubspace {
  Matrix basis;
};

/// offset + span(basis); basis columns orthonormal.
struct AffineSubspace {
  Matrix basis;
  Vector offset;
};

/// {y : <normal, y> <= offset}, unit normal.
struct HalfSpace {
  Vector normal;
  double offset = 0.0;
};

struct Ball {
  Vector center;
  double radius = 0.0;
};

/// Nonnegative span of the columns of `generators` (d x m).
struct GeneratedCone {
  Matrix generators;
};

/// {y : <n_i, y> <= 0 for every column n_i}, unit outward normals.
struct HalfspaceCone {
  Matrix normals;
};

using SetKind =
    std::variant<LinearSubspace, AffineSubspace, HalfSpace, Ball, GeneratedCone, HalfspaceCone>;

/// Closed convex set of R^d described by one of the projectable kinds.
///
/// The constructor only checks that the pieces agree in dimension; the
/// numeric invariants (orthonormal bases, unit normals, nonzero generators)
/// are enforced by the named factories and by validate().
class ConvexSet {
 public:
  ConvexSet(SetKind kind, std::string label = {});

  static ConvexSet subspace(Matrix basis, std::string label = {});
  /// Orthonormalizes the columns of `spanning` first.
  static ConvexSet subspace_spanned_by(const Matrix& spanning, std::string label = {});
  static ConvexSet affine(Matrix basis, Vector offset, std::string label = {});
  static ConvexSet halfspace(Vector normal, double offset, std::string label = {});
  static ConvexSet ball(Vector center, double radius, std::string label = {});
  static ConvexSet generated_cone(Matrix generators, std::string label = {});
  static ConvexSet halfspace_cone(Matrix normals, std::string label = {});

  [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
  [[nodiscard]] const SetKind& kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// LinearSubspace, GeneratedCone and HalfspaceCone.
  [[nodiscard]] bool is_cone() const noexcept;
  [[nodiscard]] std::string_view kind_name() const noexcept;

  template <class T>
  [[nodiscard]] const T* as() const noexcept {
    return std::get_if<T>(&kind_);
  }

 private:
  SetKind kind_;
  std::string label_;
  Eigen::Index dim_ = 0;
};

/// Throws Error(InvalidArgument) naming the violated invariant.
void validate(const ConvexSet& set);

/// Nearest point of `set` to x.
Vector project(const ConvexSet& set, const Vector& x);

/// |x - project(set, x)|.
double distance(const ConvexSet& set, const Vector& x);

/// 1e-9 * max(1, |x|).
double membership_tolerance(const Vector& x);
bool contains(const ConvexSet& set, const Vector& x);

/// Polar cone {y : <y, z> <= 0 for all z in set}; cone kinds only.
ConvexSet polar(const ConvexSet& cone);

struct MoreauReport {
  double decomposition_residual = 0.0;  // |P_A x + P_A* x - x|
  double orthogonality_residual = 0.0;  // |<P_A x, P_A* x>|
};

MoreauReport moreau_check(const ConvexSet& cone, const Vector& x);

/// Draws a member of the set: nonnegative generator combinations for
/// generated cones, basis combinations for (affine) subspaces, rejection
/// sampling for half-space cones, and projected Gaussians otherwise.
Vector sample_member(const ConvexSet& set, Rng& rng);

/// Orthonormal basis of the orthogonal complement of span(columns).
Matrix orthogonal_complement(const Matrix& columns);

}  // namespace altproj
