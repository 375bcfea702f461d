#include "altproj/dictionaries.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "altproj/error.hpp"
#include "altproj/nnls.hpp"
#include "altproj/rng.hpp"

namespace altproj {

namespace {

constexpr double kCoverageTolerance = 1e-10;

Eigen::Index dimension_of(const DictionaryKind& kind) {
  if (const auto* f = std::get_if<FiniteDictionary>(&kind)) return f->atoms.rows();
  return std::get<ConeSection>(kind).cone.dim();
}

void require_dim(const Dictionary& dict, const Vector& x) {
  if (dict.dim() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dictionary '" + dict.label() + "' has dimension " +
                                                  std::to_string(dict.dim()) + ", point has " +
                                                  std::to_string(x.size()));
  }
}

// Unit directions of a cone used to probe intersections: extreme rays when
// they are known, followed by random members.
std::vector<Vector> probe_directions(const ConvexSet& cone, std::size_t samples, Rng& rng) {
  std::vector<Vector> out;
  if (const auto* g = cone.as<GeneratedCone>()) {
    for (Eigen::Index j = 0; j < g->generators.cols(); ++j) {
      out.push_back(g->generators.col(j).normalized());
    }
  } else if (const auto* s = cone.as<LinearSubspace>()) {
    for (Eigen::Index j = 0; j < s->basis.cols(); ++j) {
      out.push_back(s->basis.col(j));
      out.push_back(-s->basis.col(j));
    }
  }
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector v = sample_member(cone, rng);
    const double n = v.norm();
    if (n > 1e-12) out.push_back(v / n);
  }
  return out;
}

}  // namespace

Dictionary::Dictionary(DictionaryKind kind, std::string label)
    : kind_(std::move(kind)), label_(std::move(label)), dim_(dimension_of(kind_)) {}

Dictionary Dictionary::finite(Matrix atoms, std::string label) {
  Dictionary d(FiniteDictionary{std::move(atoms)}, std::move(label));
  validate(d);
  return d;
}

Dictionary Dictionary::cone_section(ConvexSet cone, std::string label) {
  Dictionary d(ConeSection{std::move(cone)}, std::move(label));
  validate(d);
  return d;
}

void validate(const Dictionary& dict) {
  if (const auto* f = dict.as<FiniteDictionary>()) {
    if (f->atoms.cols() == 0) {
      throw Error(ErrorCode::InvalidArgument, "finite dictionary '" + dict.label() + "' is empty");
    }
    if (!f->atoms.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "dictionary atoms have non-finite entries");
    }
    for (Eigen::Index j = 0; j < f->atoms.cols(); ++j) {
      if (std::abs(f->atoms.col(j).norm() - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument,
                    "dictionary atom " + std::to_string(j) + " is not a unit vector");
      }
    }
    return;
  }
  const auto& cone = dict.as<ConeSection>()->cone;
  if (!cone.is_cone()) {
    throw Error(ErrorCode::UnsupportedDictionary,
                "cone section over non-cone set " + std::string(cone.kind_name()));
  }
  validate(cone);
  bool trivial = false;
  if (const auto* s = cone.as<LinearSubspace>()) trivial = s->basis.cols() == 0;
  if (const auto* g = cone.as<GeneratedCone>()) trivial = g->generators.cols() == 0;
  if (const auto* h = cone.as<HalfspaceCone>()) {
    trivial = h->normals.cols() > 0 && halfspace_free_check(h->normals).halfspace_free;
  }
  if (trivial) {
    throw Error(ErrorCode::InvalidArgument, "cone section '" + dict.label() + "' is the zero cone");
  }
}

double zero_choice_threshold(const Vector& x) { return 1e-14 * std::max(1.0, x.norm()); }

GreedyChoice select(const Dictionary& dict, const Vector& x) {
  require_dim(dict, x);
  const double threshold = zero_choice_threshold(x);
  if (const auto* f = dict.as<FiniteDictionary>()) {
    const Vector ips = f->atoms.transpose() * x;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < ips.size(); ++j) {
      if (ips[j] > ips[best]) best = j;
    }
    if (ips[best] > threshold) return {f->atoms.col(best), ips[best]};
    return {Vector::Zero(x.size()), 0.0};
  }
  const Vector p = project(dict.as<ConeSection>()->cone, x);
  const double n = p.norm();
  if (n > threshold) return {p / n, n};
  return {Vector::Zero(x.size()), 0.0};
}

GreedyStep greedy_step_with_choice(const Dictionary& dict, const Vector& x) {
  GreedyChoice choice = select(dict, x);
  if (choice.is_zero()) return {x, std::move(choice)};
  Vector next = x - choice.coefficient * choice.atom;
  return {std::move(next), std::move(choice)};
}

Vector greedy_step(const Dictionary& dict, const Vector& x) {
  return greedy_step_with_choice(dict, x).next;
}

HalfspaceFreeResult halfspace_free_check(const Matrix& atoms) {
  const Eigen::Index d = atoms.rows();
  if (atoms.cols() == 0) {
    Vector w = Vector::Zero(d);
    if (d > 0) w[0] = 1.0;
    return {false, w};
  }
  // -mean of the normalized atoms is the natural first probe: when all atoms
  // sit in a half-space it usually lands outside their cone.
  std::vector<Vector> probes;
  Vector centroid = Vector::Zero(d);
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) centroid += atoms.col(j).normalized();
  if (centroid.norm() > 1e-12) probes.push_back(-centroid.normalized());
  for (Eigen::Index i = 0; i < d; ++i) {
    probes.push_back(Vector::Unit(d, i));
    probes.push_back(-Vector::Unit(d, i));
  }
  for (const Vector& u : probes) {
    const Vector residual = u - solve_nnls(atoms, u).fitted;
    const double r = residual.norm();
    if (r > kCoverageTolerance) return {false, residual / r};
  }
  return {true, std::nullopt};
}

Matrix generator_matrix(const Dictionary& dict) {
  if (const auto* f = dict.as<FiniteDictionary>()) return f->atoms;
  const auto& cone = dict.as<ConeSection>()->cone;
  if (const auto* g = cone.as<GeneratedCone>()) return g->generators;
  if (const auto* s = cone.as<LinearSubspace>()) {
    Matrix both(s->basis.rows(), 2 * s->basis.cols());
    both << s->basis, -s->basis;
    return both;
  }
  throw Error(ErrorCode::UnsupportedDictionary,
              "cone section '" + dict.label() +
                  "' is given by half-space normals; convert it with polar() first");
}

HalfspaceFreeResult halfspace_free_check(std::span<const Dictionary> dicts) {
  if (dicts.empty()) throw Error(ErrorCode::InvalidArgument, "no dictionaries given");
  const Eigen::Index d = dicts.front().dim();
  std::vector<Matrix> parts;
  Eigen::Index total = 0;
  for (const auto& dict : dicts) {
    if (dict.dim() != d) {
      throw Error(ErrorCode::DimensionMismatch, "dictionaries disagree in dimension");
    }
    parts.push_back(generator_matrix(dict));
    total += parts.back().cols();
  }
  Matrix all(d, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    all.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return halfspace_free_check(all);
}

HalfspaceFreeResult union_halfspace_free(std::span<const Dictionary> dicts) {
  if (dicts.empty()) throw Error(ErrorCode::InvalidArgument, "no dictionaries given");
  const Eigen::Index d = dicts.front().dim();
  std::vector<Matrix> parts;
  std::vector<const Matrix*> normal_sets;
  Eigen::Index total = 0;
  for (const auto& dict : dicts) {
    if (dict.dim() != d) {
      throw Error(ErrorCode::DimensionMismatch, "dictionaries disagree in dimension");
    }
    if (const auto* cs = dict.as<ConeSection>()) {
      if (const auto* h = cs->cone.as<HalfspaceCone>()) {
        normal_sets.push_back(&h->normals);
        continue;
      }
    }
    parts.push_back(generator_matrix(dict));
    total += parts.back().cols();
  }
  Matrix all(d, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    all.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  if (normal_sets.empty()) return halfspace_free_check(all);

  // The union lies in {<y, .> <= 0} iff y != 0 lies in every polar cone:
  // cone(N_i) for sections given by normals, and the half-space cone of the
  // remaining atoms. Feasibility of y = N_1 l_1 = ... = N_r l_r,
  // all^T y + s = 0, sum(l_1) = 1 with l, s >= 0 is an NNLS with zero
  // residual.
  const auto r = static_cast<Eigen::Index>(normal_sets.size());
  Eigen::Index vars = total;
  std::vector<Eigen::Index> offsets;
  for (const Matrix* n : normal_sets) {
    offsets.push_back(vars);
    vars += n->cols();
  }
  const Eigen::Index rows = d * (r - 1) + total + 1;
  Matrix a = Matrix::Zero(rows, vars);
  Vector b = Vector::Zero(rows);
  const Matrix& n1 = *normal_sets.front();
  for (Eigen::Index i = 1; i < r; ++i) {
    const Matrix& ni = *normal_sets[static_cast<std::size_t>(i)];
    a.block(d * (i - 1), offsets[0], d, n1.cols()) = n1;
    a.block(d * (i - 1), offsets[static_cast<std::size_t>(i)], d, ni.cols()) = -ni;
  }
  const Eigen::Index slack_row = d * (r - 1);
  if (total > 0) {
    a.block(slack_row, offsets[0], total, n1.cols()) = all.transpose() * n1;
    a.block(slack_row, 0, total, total) = Matrix::Identity(total, total);
  }
  a.block(rows - 1, offsets[0], 1, n1.cols()).setOnes();
  b[rows - 1] = 1.0;
  const NnlsResult sol = solve_nnls(a, b);
  if ((sol.fitted - b).norm() > kCoverageTolerance) return {true, std::nullopt};
  Vector y = n1 * sol.coefficients.segment(offsets[0], n1.cols());
  if (y.norm() < 1e-12) {
    y = Vector::Zero(d);
    y[0] = 1.0;
  }
  return {false, y.normalized()};
}

ConvexSet polar_cone_of_dictionary(const Dictionary& dict) {
  const std::string label = dict.label().empty() ? std::string{} : "A(" + dict.label() + ")";
  if (const auto* f = dict.as<FiniteDictionary>()) {
    return ConvexSet(HalfspaceCone{f->atoms}, label);
  }
  ConvexSet p = polar(dict.as<ConeSection>()->cone);
  p.set_label(label);
  return p;
}

std::pair<Dictionary, Dictionary> bridge_dictionaries(const ConvexSet& first,
                                                      const ConvexSet& second,
                                                      const BridgeOptions& options) {
  for (const ConvexSet* c : {&first, &second}) {
    if (!c->is_cone()) {
      throw Error(ErrorCode::UnsupportedSet,
                  "bridge needs cones, got " + std::string(c->kind_name()));
    }
  }
  if (first.dim() != second.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "bridged cones differ in dimension");
  }
  Rng rng(options.seed);
  for (const auto& [from, to] : {std::pair{&first, &second}, std::pair{&second, &first}}) {
    for (const Vector& u : probe_directions(*from, options.sample_count, rng)) {
      if (contains(*to, u)) {
        throw Error(ErrorCode::IntersectionNotTrivial,
                    "a unit direction of '" + from->label() + "' lies in '" + to->label() + "'");
      }
    }
  }
  Dictionary d1(ConeSection{polar(first)}, first.label().empty() ? "" : "D(" + first.label() + ")");
  Dictionary d2(ConeSection{polar(second)},
                second.label().empty() ? "" : "D(" + second.label() + ")");
  return {std::move(d1), std::move(d2)};
}

}  // namespace altproj
