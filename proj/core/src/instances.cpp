#include "altproj/instances.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "altproj/analysis.hpp"
#include "altproj/error.hpp"
#include "altproj/rng.hpp"

namespace altproj {

namespace {

constexpr int kMaxDraws = 100;
constexpr double kRankThreshold = 1e-10;

Vector initial_point(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0x5EEDULL);
  return rng.gaussian(d);
}

Matrix random_orthonormal(Eigen::Index d, Eigen::Index k, Rng& rng) {
  Matrix g(d, k);
  for (Eigen::Index j = 0; j < k; ++j) g.col(j) = rng.gaussian(d);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, k);
}

Vector unit_orthogonal_to(const Vector& c, Rng& rng) {
  for (;;) {
    Vector u = rng.gaussian(c.size());
    u -= u.dot(c) * c;
    const double n = u.norm();
    if (n > 1e-8) return u / n;
  }
}

Matrix stack(std::span<const Matrix> parts, Eigen::Index rows) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.cols();
  Matrix out(rows, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return out;
}

Matrix all_atoms(std::span<const Dictionary> dicts) {
  std::vector<Matrix> parts;
  for (const auto& d : dicts) parts.push_back(generator_matrix(d));
  return stack(parts, dicts.front().dim());
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Necessary condition only: no sampled direction sees every atom on its
// non-positive side.
bool sampled_halfspace_free(const Matrix& atoms, std::uint64_t seed) {
  Rng rng(seed);
  for (int k = 0; k < 4096; ++k) {
    const Vector v = rng.unit_vector(atoms.rows());
    if ((atoms.transpose() * v).maxCoeff() <= 0.0) return false;
  }
  return true;
}

std::string label_for(char prefix, int i) { return std::string(1, prefix) + std::to_string(i + 1); }

}  // namespace

std::string_view to_string(Certificate c) noexcept {
  switch (c) {
    case Certificate::TrivialIntersectionByConstruction: return "TrivialIntersectionByConstruction";
    case Certificate::SubspacesWithKnownIntersection: return "SubspacesWithKnownIntersection";
    case Certificate::SymmetricDictionaries: return "SymmetricDictionaries";
    case Certificate::SeparatedCones: return "SeparatedCones";
    case Certificate::HalfspaceFreeUnion: return "HalfspaceFreeUnion";
  }
  return "unknown";
}

Certificate certificate_from_string(std::string_view name) {
  for (auto c : {Certificate::TrivialIntersectionByConstruction,
                 Certificate::SubspacesWithKnownIntersection, Certificate::SymmetricDictionaries,
                 Certificate::SeparatedCones, Certificate::HalfspaceFreeUnion}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown certificate '" + std::string(name) + "'");
}

int InstanceSpec::count() const noexcept {
  return static_cast<int>(mode == Mode::Projection ? sets.size() : dictionaries.size());
}

void validate(const InstanceSpec& instance) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InstanceInvalid,
                (instance.id.empty() ? std::string("instance") : "instance '" + instance.id + "'") +
                    ": " + why);
  };
  if (instance.dim < 1) fail("dim must be >= 1");
  if (instance.mode == Mode::Projection && !instance.dictionaries.empty()) {
    fail("projection mode takes sets, not dictionaries");
  }
  if (instance.mode == Mode::Greedy && !instance.sets.empty()) {
    fail("greedy mode takes dictionaries, not sets");
  }
  if (instance.count() < 2) fail("need K >= 2, got " + std::to_string(instance.count()));
  try {
    for (const auto& s : instance.sets) {
      if (s.dim() != instance.dim) fail("set '" + s.label() + "' has the wrong dimension");
      validate(s);
    }
    for (const auto& d : instance.dictionaries) {
      if (d.dim() != instance.dim) fail("dictionary '" + d.label() + "' has the wrong dimension");
      validate(d);
    }
    if (instance.schedule) {
      validate(*instance.schedule);
      if (instance.schedule->count != instance.count()) fail("schedule K differs from set count");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InstanceInvalid) throw;
    fail(e.detail());
  }
  if (instance.x0 && instance.x0->size() != instance.dim) fail("x0 has the wrong dimension");
}

std::vector<ConvexSet> membership_sets(const InstanceSpec& instance) {
  if (instance.mode == Mode::Projection) return instance.sets;
  std::vector<ConvexSet> out;
  for (const auto& d : instance.dictionaries) out.push_back(polar_cone_of_dictionary(d));
  return out;
}

Vector starting_point(const InstanceSpec& instance) {
  return instance.x0 ? *instance.x0 : initial_point(instance.dim, instance.seed);
}

Eigen::Index stacked_complement_rank(std::span<const ConvexSet> subspaces) {
  if (subspaces.empty()) return 0;
  std::vector<Matrix> parts;
  for (const auto& s : subspaces) {
    const auto* sub = s.as<LinearSubspace>();
    if (!sub) throw Error(ErrorCode::UnsupportedSet, "rank check needs linear subspaces");
    parts.push_back(orthogonal_complement(sub->basis));
  }
  const Matrix all = stack(parts, subspaces.front().dim());
  if (all.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(all);
  const auto& sv = svd.singularValues();
  return static_cast<Eigen::Index>((sv.array() > kRankThreshold).count());
}

InstanceSpec gen_subspace_instance(Eigen::Index d, int k, std::uint64_t seed) {
  if (k < 2 || d < k) {
    throw Error(ErrorCode::InvalidArgument, "subspace instances need d >= K >= 2");
  }
  Rng rng(seed);
  const Eigen::Index max_dim = std::max<Eigen::Index>(1, d - (d + k - 1) / k);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    InstanceSpec inst;
    inst.dim = d;
    inst.mode = Mode::Projection;
    inst.certificate = Certificate::SubspacesWithKnownIntersection;
    inst.seed = seed;
    std::vector<Matrix> complements;
    for (int i = 0; i < k; ++i) {
      const auto dim_i = 1 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(max_dim)));
      Matrix basis = random_orthonormal(d, dim_i, rng);
      complements.push_back(orthogonal_complement(basis));
      inst.sets.push_back(ConvexSet::subspace(std::move(basis), label_for('A', i)));
    }
    const Matrix stacked = stack(complements, d);
    Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() != d) continue;
    if (stacked_complement_rank(inst.sets) != d) continue;
    inst.x0 = initial_point(d, seed);
    return inst;
  }
  throw Error(ErrorCode::RetryExhausted,
              "no subspace draw with trivial intersection in " + std::to_string(kMaxDraws) + " tries");
}

InstanceSpec gen_cone_instance(Eigen::Index d, int k, std::uint64_t seed, bool separated) {
  if (d < 2 || k < 2) throw Error(ErrorCode::InvalidArgument, "cone instances need d >= 2, K >= 2");
  Rng rng(seed);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    std::vector<Vector> axes;
    for (int i = 0; i < k; ++i) axes.push_back(rng.unit_vector(d));
    double min_angle = std::numbers::pi;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        min_angle = std::min(min_angle, std::acos(std::clamp(axes[i].dot(axes[j]), -1.0, 1.0)));
    if (min_angle < 0.2) continue;
    const double half_angle = min_angle / (separated ? 4.0 : 2.5);

    std::vector<Matrix> gens;
    for (const auto& c : axes) {
      Matrix g(d, d);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double t = half_angle * (0.5 + 0.5 * rng.uniform());
        g.col(j) = std::cos(t) * c + std::sin(t) * unit_orthogonal_to(c, rng);
      }
      gens.push_back(std::move(g));
    }

    // Each pair is split by the hyperplane orthogonal to c_i - c_j.
    bool certified = true;
    for (int i = 0; i < k && certified; ++i) {
      for (int j = i + 1; j < k && certified; ++j) {
        const Vector v = axes[i] - axes[j];
        certified = (gens[i].transpose() * v).minCoeff() > 1e-9 &&
                    (gens[j].transpose() * v).maxCoeff() < -1e-9;
      }
    }
    if (!certified) continue;

    InstanceSpec inst;
    inst.dim = d;
    inst.mode = Mode::Projection;
    inst.certificate =
        separated ? Certificate::SeparatedCones : Certificate::TrivialIntersectionByConstruction;
    inst.seed = seed;
    for (int i = 0; i < k; ++i) {
      inst.sets.push_back(ConvexSet::generated_cone(gens[i], label_for('C', i)));
    }

    // Independent recheck on sampled directions.
    for (int i = 0; i < k && certified; ++i) {
      for (int s = 0; s < 32 && certified; ++s) {
        Vector u = sample_member(inst.sets[i], rng);
        if (u.norm() < 1e-12) continue;
        u.normalize();
        for (int j = 0; j < k; ++j) {
          if (j != i && contains(inst.sets[j], u)) certified = false;
        }
      }
    }
    if (!certified) continue;

    if (separated && k >= 4) {
      SeparationOptions opts;
      opts.directions = 512;
      opts.seed = seed;
      const double sep = min_separation(std::span<const ConvexSet>(inst.sets), opts).value;
      if (!(sep > 0.05)) continue;
      inst.separation = sep;
    }
    inst.x0 = initial_point(d, seed);
    return inst;
  }
  throw Error(ErrorCode::RetryExhausted,
              "no certified cone draw in " + std::to_string(kMaxDraws) + " tries");
}

InstanceSpec gen_dictionary_instance(Eigen::Index d, int k, std::uint64_t seed, bool symmetric,
                                     Eigen::Index atoms_per_dictionary) {
  if (d < 2 || k < 2) {
    throw Error(ErrorCode::InvalidArgument, "dictionary instances need d >= 2, K >= 2");
  }
  Eigen::Index m = atoms_per_dictionary > 0 ? atoms_per_dictionary : d + 1;
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 atoms per dictionary");
  if (symmetric && m % 2 == 1) ++m;
  Rng rng(seed);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    InstanceSpec inst;
    inst.dim = d;
    inst.mode = Mode::Greedy;
    inst.certificate =
        symmetric ? Certificate::SymmetricDictionaries : Certificate::HalfspaceFreeUnion;
    inst.seed = seed;
    for (int i = 0; i < k; ++i) {
      Matrix atoms(d, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (symmetric && j % 2 == 1) {
          atoms.col(j) = -atoms.col(j - 1);
        } else {
          atoms.col(j) = rng.unit_vector(d);
        }
      }
      inst.dictionaries.push_back(Dictionary::finite(std::move(atoms), label_for('D', i)));
    }
    if (!halfspace_free_check(inst.dictionaries).halfspace_free) continue;
    const Matrix atoms = all_atoms(inst.dictionaries);
    const bool recheck =
        binomial(static_cast<std::size_t>(atoms.cols()), static_cast<std::size_t>(d - 1)) <= 2e5
            ? oracle_halfspace_free(atoms)
            : sampled_halfspace_free(atoms, seed);
    if (!recheck) continue;
    inst.x0 = initial_point(d, seed);
    return inst;
  }
  throw Error(ErrorCode::RetryExhausted,
              "no half-space free dictionary draw in " + std::to_string(kMaxDraws) + " tries");
}

Vector oracle_cone_projection(const GeneratedCone& cone, const Vector& x) {
  const Matrix& g = cone.generators;
  const Eigen::Index d = g.rows();
  const Eigen::Index m = g.cols();
  if (m > 12 || d > 8) {
    throw Error(ErrorCode::BudgetExceeded, "oracle budget is m <= 12, d <= 8; got m=" +
                                               std::to_string(m) + ", d=" + std::to_string(d));
  }
  if (x.size() != d) throw Error(ErrorCode::DimensionMismatch, "point and cone differ in dimension");
  const double scale = std::max(1.0, x.norm());
  Vector best = Vector::Zero(d);
  double best_dist = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (mask & (1U << j)) cols.push_back(j);
    }
    if (static_cast<Eigen::Index>(cols.size()) > d) continue;
    Vector p = Vector::Zero(d);
    if (!cols.empty()) {
      Matrix sub(d, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = g.col(cols[c]);
      Eigen::ColPivHouseholderQR<Matrix> qr(sub);
      qr.setThreshold(1e-10);
      if (qr.rank() < sub.cols()) continue;
      const Vector coef = qr.solve(x);
      if (coef.minCoeff() < -1e-12 * scale) continue;
      p = sub * coef;
    }
    const Vector r = x - p;
    bool feasible = true;
    for (Eigen::Index j = 0; j < m && feasible; ++j) {
      feasible = r.dot(g.col(j)) <= 1e-9 * scale * g.col(j).norm();
    }
    if (!feasible) continue;
    const double dist = r.norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::NumericalFailure, "no feasible face found by the oracle");
  return best;
}

bool oracle_halfspace_free(const Matrix& atoms, std::size_t max_subsets) {
  const Eigen::Index d = atoms.rows();
  const Eigen::Index m = atoms.cols();
  if (m == 0) return false;
  if (d == 1) return atoms.maxCoeff() > 0.0 && atoms.minCoeff() < 0.0;
  Eigen::JacobiSVD<Matrix> full(atoms);
  if ((full.singularValues().array() > kRankThreshold).count() < d) return false;
  const auto r = static_cast<std::size_t>(d - 1);
  if (binomial(static_cast<std::size_t>(m), r) > static_cast<double>(max_subsets)) {
    throw Error(ErrorCode::BudgetExceeded, "too many facet candidates for the oracle");
  }
  std::vector<Eigen::Index> pick(r);
  for (std::size_t i = 0; i < r; ++i) pick[i] = static_cast<Eigen::Index>(i);
  for (;;) {
    Matrix sub(d, static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < r; ++i) sub.col(static_cast<Eigen::Index>(i)) = atoms.col(pick[i]);
    Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeFullU);
    if (svd.singularValues().minCoeff() > kRankThreshold) {
      const Vector v = svd.matrixU().col(d - 1);
      const Vector ips = atoms.transpose() * v;
      if (ips.maxCoeff() <= 1e-10 || ips.minCoeff() >= -1e-10) return false;
    }
    // Next combination in lexicographic order.
    std::size_t i = r;
    while (i > 0 && pick[i - 1] == m - static_cast<Eigen::Index>(r - i + 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
  return true;
}

std::string_view to_string(SuiteClass c) noexcept {
  switch (c) {
    case SuiteClass::Subspaces: return "subspaces";
    case SuiteClass::Cones: return "cones";
    case SuiteClass::SeparatedCones: return "separated_cones";
    case SuiteClass::SymmetricDictionaries: return "symmetric_dictionaries";
    case SuiteClass::Dictionaries: return "dictionaries";
  }
  return "unknown";
}

std::vector<SuiteClass> all_suite_classes() {
  return {SuiteClass::Subspaces, SuiteClass::Cones, SuiteClass::SeparatedCones,
          SuiteClass::SymmetricDictionaries, SuiteClass::Dictionaries};
}

SuiteEntry standard_suite_entry(SuiteClass suite, std::uint64_t seed) {
  const int k = 2 + static_cast<int>((seed - 1) % 4);
  Eigen::Index d = 2 + static_cast<Eigen::Index>((3 * seed) % 7);
  if (suite == SuiteClass::Subspaces) d = std::max<Eigen::Index>(d, k);
  return {suite, seed, d, k};
}

InstanceSpec make_suite_instance(const SuiteEntry& e) {
  InstanceSpec inst;
  switch (e.suite) {
    case SuiteClass::Subspaces: inst = gen_subspace_instance(e.dim, e.count, e.seed); break;
    case SuiteClass::Cones: inst = gen_cone_instance(e.dim, e.count, e.seed, false); break;
    case SuiteClass::SeparatedCones: inst = gen_cone_instance(e.dim, e.count, e.seed, true); break;
    case SuiteClass::SymmetricDictionaries:
      inst = gen_dictionary_instance(e.dim, e.count, e.seed, true);
      break;
    case SuiteClass::Dictionaries:
      inst = gen_dictionary_instance(e.dim, e.count, e.seed, false);
      break;
  }
  std::string num = std::to_string(e.seed);
  if (num.size() < 3) num.insert(0, 3 - num.size(), '0');
  inst.id = std::string(to_string(e.suite)) + "-" + num;
  return inst;
}

std::vector<InstanceSpec> standard_suite(SuiteClass suite, std::uint64_t first_seed,
                                         std::uint64_t last_seed) {
  std::vector<InstanceSpec> out;
  for (std::uint64_t s = first_seed; s <= last_seed; ++s) {
    out.push_back(make_suite_instance(standard_suite_entry(suite, s)));
  }
  return out;
}

}  // namespace altproj
