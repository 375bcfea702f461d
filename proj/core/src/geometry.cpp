#include "altproj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "altproj/error.hpp"
#include "altproj/nnls.hpp"
#include "altproj/rng.hpp"

namespace altproj {

namespace {

constexpr double kUnitTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Eigen::Index dimension_of(const SetKind& kind) {
  return std::visit(
      Overloaded{
          [](const LinearSubspace& s) { return s.basis.rows(); },
          [](const AffineSubspace& s) {
            if (s.basis.rows() != s.offset.size() && s.basis.cols() > 0) {
              throw Error(ErrorCode::DimensionMismatch, "affine subspace basis and offset differ");
            }
            return s.offset.size();
          },
          [](const HalfSpace& s) { return s.normal.size(); },
          [](const Ball& s) { return s.center.size(); },
          [](const GeneratedCone& s) { return s.generators.rows(); },
          [](const HalfspaceCone& s) { return s.normals.rows(); },
      },
      kind);
}

void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
  }
}

void require_orthonormal(const Matrix& basis, std::string_view what) {
  require_finite(basis, what);
  if (basis.cols() == 0) return;
  const Matrix gram = basis.transpose() * basis;
  const double err = (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (err > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " is not orthonormal (deviation " + std::to_string(err) + ")");
  }
}

void require_unit_columns(const Matrix& cols, std::string_view what) {
  require_finite(cols, what);
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    if (std::abs(cols.col(j).norm() - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(what) + " column " + std::to_string(j) + " is not a unit vector");
    }
  }
}

void require_dim(const ConvexSet& set, const Vector& x) {
  if (set.dim() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "set '" + set.label() + "' has dimension " +
                                                  std::to_string(set.dim()) + ", point has " +
                                                  std::to_string(x.size()));
  }
}

Vector project_generated(const Matrix& generators, const Vector& x) {
  return solve_nnls(generators, x).fitted;
}

}  // namespace

ConvexSet::ConvexSet(SetKind kind, std::string label)
    : kind_(std::move(kind)), label_(std::move(label)), dim_(dimension_of(kind_)) {}

ConvexSet ConvexSet::subspace(Matrix basis, std::string label) {
  ConvexSet s(LinearSubspace{std::move(basis)}, std::move(label));
  validate(s);
  return s;
}

ConvexSet ConvexSet::subspace_spanned_by(const Matrix& spanning, std::string label) {
  require_finite(spanning, "spanning set");
  if (spanning.cols() == 0) return subspace(Matrix(spanning.rows(), 0), std::move(label));
  Eigen::ColPivHouseholderQR<Matrix> qr(spanning);
  qr.setThreshold(1e-10);
  const Matrix q = qr.householderQ() * Matrix::Identity(spanning.rows(), spanning.rows());
  return subspace(q.leftCols(qr.rank()), std::move(label));
}

ConvexSet ConvexSet::affine(Matrix basis, Vector offset, std::string label) {
  ConvexSet s(AffineSubspace{std::move(basis), std::move(offset)}, std::move(label));
  validate(s);
  return s;
}

ConvexSet ConvexSet::halfspace(Vector normal, double offset, std::string label) {
  ConvexSet s(HalfSpace{std::move(normal), offset}, std::move(label));
  validate(s);
  return s;
}

ConvexSet ConvexSet::ball(Vector center, double radius, std::string label) {
  ConvexSet s(Ball{std::move(center), radius}, std::move(label));
  validate(s);
  return s;
}

ConvexSet ConvexSet::generated_cone(Matrix generators, std::string label) {
  ConvexSet s(GeneratedCone{std::move(generators)}, std::move(label));
  validate(s);
  return s;
}

ConvexSet ConvexSet::halfspace_cone(Matrix normals, std::string label) {
  ConvexSet s(HalfspaceCone{std::move(normals)}, std::move(label));
  validate(s);
  return s;
}

bool ConvexSet::is_cone() const noexcept {
  return std::holds_alternative<LinearSubspace>(kind_) ||
         std::holds_alternative<GeneratedCone>(kind_) ||
         std::holds_alternative<HalfspaceCone>(kind_);
}

std::string_view ConvexSet::kind_name() const noexcept {
  return std::visit(Overloaded{
                        [](const LinearSubspace&) { return std::string_view("subspace"); },
                        [](const AffineSubspace&) { return std::string_view("affine"); },
                        [](const HalfSpace&) { return std::string_view("halfspace"); },
                        [](const Ball&) { return std::string_view("ball"); },
                        [](const GeneratedCone&) { return std::string_view("generated_cone"); },
                        [](const HalfspaceCone&) { return std::string_view("halfspace_cone"); },
                    },
                    kind_);
}

void validate(const ConvexSet& set) {
  std::visit(Overloaded{
                 [](const LinearSubspace& s) { require_orthonormal(s.basis, "subspace basis"); },
                 [](const AffineSubspace& s) {
                   require_orthonormal(s.basis, "affine basis");
                   require_finite(s.offset, "affine offset");
                 },
                 [](const HalfSpace& s) {
                   require_finite(s.normal, "half-space normal");
                   if (std::abs(s.normal.norm() - 1.0) > kUnitTolerance) {
                     throw Error(ErrorCode::InvalidArgument, "half-space normal is not a unit vector");
                   }
                   if (!std::isfinite(s.offset)) {
                     throw Error(ErrorCode::InvalidArgument, "half-space offset is not finite");
                   }
                 },
                 [](const Ball& s) {
                   require_finite(s.center, "ball center");
                   if (!std::isfinite(s.radius) || s.radius < 0.0) {
                     throw Error(ErrorCode::InvalidArgument, "ball radius must be finite and >= 0");
                   }
                 },
                 [](const GeneratedCone& s) {
                   require_finite(s.generators, "cone generators");
                   for (Eigen::Index j = 0; j < s.generators.cols(); ++j) {
                     if (s.generators.col(j).norm() == 0.0) {
                       throw Error(ErrorCode::InvalidArgument,
                                   "cone generator " + std::to_string(j) + " is zero");
                     }
                   }
                 },
                 [](const HalfspaceCone& s) { require_unit_columns(s.normals, "cone normals"); },
             },
             set.kind());
}

Vector project(const ConvexSet& set, const Vector& x) {
  require_dim(set, x);
  return std::visit(
      Overloaded{
          [&](const LinearSubspace& s) -> Vector {
            return s.basis * (s.basis.transpose() * x);
          },
          [&](const AffineSubspace& s) -> Vector {
            return s.offset + s.basis * (s.basis.transpose() * (x - s.offset));
          },
          [&](const HalfSpace& s) -> Vector {
            const double excess = s.normal.dot(x) - s.offset;
            if (excess <= 0.0) return x;
            return x - excess * s.normal;
          },
          [&](const Ball& s) -> Vector {
            const Vector diff = x - s.center;
            const double r = diff.norm();
            if (r <= s.radius) return x;
            return s.center + (s.radius / r) * diff;
          },
          [&](const GeneratedCone& s) -> Vector { return project_generated(s.generators, x); },
          [&](const HalfspaceCone& s) -> Vector {
            // Moreau: the polar of this cone is generated by its normals.
            return x - project_generated(s.normals, x);
          },
      },
      set.kind());
}

double distance(const ConvexSet& set, const Vector& x) { return (x - project(set, x)).norm(); }

double membership_tolerance(const Vector& x) { return 1e-9 * std::max(1.0, x.norm()); }

bool contains(const ConvexSet& set, const Vector& x) {
  return distance(set, x) <= membership_tolerance(x);
}

Matrix orthogonal_complement(const Matrix& columns) {
  const Eigen::Index d = columns.rows();
  if (columns.cols() == 0) return Matrix::Identity(d, d);
  Eigen::ColPivHouseholderQR<Matrix> qr(columns);
  qr.setThreshold(1e-10);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return q.rightCols(d - qr.rank());
}

ConvexSet polar(const ConvexSet& cone) {
  const std::string label = cone.label().empty() ? std::string{} : cone.label() + "*";
  if (const auto* s = cone.as<LinearSubspace>()) {
    return ConvexSet(LinearSubspace{orthogonal_complement(s->basis)}, label);
  }
  if (const auto* s = cone.as<GeneratedCone>()) {
    Matrix normals = s->generators;
    for (Eigen::Index j = 0; j < normals.cols(); ++j) normals.col(j).normalize();
    return ConvexSet(HalfspaceCone{std::move(normals)}, label);
  }
  if (const auto* s = cone.as<HalfspaceCone>()) {
    return ConvexSet(GeneratedCone{s->normals}, label);
  }
  throw Error(ErrorCode::UnsupportedSet,
              "polar is defined for cone kinds only, got " + std::string(cone.kind_name()));
}

MoreauReport moreau_check(const ConvexSet& cone, const Vector& x) {
  if (!cone.is_cone()) {
    throw Error(ErrorCode::UnsupportedSet,
                "moreau_check needs a cone, got " + std::string(cone.kind_name()));
  }
  const Vector p = project(cone, x);
  const Vector q = project(polar(cone), x);
  return {(p + q - x).norm(), std::abs(p.dot(q))};
}

Vector sample_member(const ConvexSet& set, Rng& rng) {
  const Eigen::Index d = set.dim();
  return std::visit(
      Overloaded{
          [&](const LinearSubspace& s) -> Vector {
            return s.basis * rng.gaussian(s.basis.cols());
          },
          [&](const AffineSubspace& s) -> Vector {
            return s.offset + s.basis * rng.gaussian(s.basis.cols());
          },
          [&](const HalfSpace&) -> Vector { return project(set, rng.gaussian(d)); },
          [&](const Ball& s) -> Vector {
            const double r = s.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
            return s.center + r * rng.unit_vector(d);
          },
          [&](const GeneratedCone& s) -> Vector {
            Vector weights(s.generators.cols());
            for (Eigen::Index j = 0; j < weights.size(); ++j) {
              weights[j] = -std::log(1.0 - rng.uniform());
            }
            return s.generators * weights;
          },
          [&](const HalfspaceCone& s) -> Vector {
            for (int attempt = 0; attempt < 64; ++attempt) {
              Vector g = rng.gaussian(d);
              if (s.normals.cols() == 0 || (s.normals.transpose() * g).maxCoeff() <= 0.0) {
                return g;
              }
            }
            return project(set, rng.gaussian(d));
          },
      },
      set.kind());
}

}  // namespace altproj
