#include "altproj_cli/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "altproj/dictionaries.hpp"
#include "altproj/engine.hpp"
#include "altproj/instances.hpp"
#include "altproj/rng.hpp"

namespace altproj::cli {

namespace {

constexpr std::size_t kMaxReported = 5;

void record(CheckResult& r, double residual, const std::string& what) {
  r.max_residual = std::max(r.max_residual, residual);
  if (!(residual <= r.tolerance) && r.failures.size() < kMaxReported) {
    std::ostringstream s;
    s << what << ": residual " << residual;
    r.failures.push_back(s.str());
  }
  if (!(residual <= r.tolerance) && r.failures.size() == kMaxReported) {
    r.failures.emplace_back("...");
  }
}

Matrix random_generators(Eigen::Index d, Eigen::Index m, Rng& rng) {
  Matrix g(d, m);
  for (Eigen::Index j = 0; j < m; ++j) g.col(j) = rng.gaussian(d);
  return g;
}

Matrix random_units(Eigen::Index d, Eigen::Index m, Rng& rng) {
  Matrix g(d, m);
  for (Eigen::Index j = 0; j < m; ++j) g.col(j) = rng.unit_vector(d);
  return g;
}

}  // namespace

ConvexSet random_set(int kind, Eigen::Index d, Rng& rng) {
  switch (kind % 6) {
    case 0: {
      const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d) + 1));
      return ConvexSet::subspace_spanned_by(random_generators(d, k, rng));
    }
    case 1: {
      const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d) + 1));
      Matrix basis = ConvexSet::subspace_spanned_by(random_generators(d, k, rng))
                         .as<LinearSubspace>()
                         ->basis;
      return ConvexSet::affine(std::move(basis), rng.gaussian(d));
    }
    case 2: return ConvexSet::halfspace(rng.unit_vector(d), rng.normal());
    case 3: return ConvexSet::ball(rng.gaussian(d), 0.1 + 2.0 * rng.uniform());
    case 4: {
      const auto m = 1 + static_cast<Eigen::Index>(rng.below(8));
      return ConvexSet::generated_cone(random_generators(d, m, rng));
    }
    default: {
      const auto m = 1 + static_cast<Eigen::Index>(rng.below(6));
      return ConvexSet::halfspace_cone(random_units(d, m, rng));
    }
  }
}

ConvexSet random_cone(int kind, Eigen::Index d, Rng& rng) {
  switch (kind % 3) {
    case 0: return random_set(4, d, rng);
    case 1: return random_set(5, d, rng);
    default: return random_set(0, d, rng);
  }
}

CheckResult check_axioms(std::size_t budget, std::uint64_t seed) {
  CheckResult r{"axioms", 0, 0.0, 1e-10, {}};
  Rng rng(seed);
  for (std::size_t c = 0; c < budget; ++c) {
    const int kind = static_cast<int>(c % 6);
    const auto d = 1 + static_cast<Eigen::Index>(rng.below(8));
    const ConvexSet set = random_set(kind, d, rng);
    const Vector x = 3.0 * rng.gaussian(d);
    const Vector y = 3.0 * rng.gaussian(d);
    const Vector px = project(set, x);
    const Vector py = project(set, y);
    const double sx = std::max(1.0, x.norm());
    const std::string tag = std::string(set.kind_name()) + " d=" + std::to_string(d) + " case " +
                            std::to_string(c);

    record(r, (project(set, px) - px).norm() / sx, tag + " idempotence");
    record(r, ((px - py).norm() - (x - y).norm()) / std::max(1.0, (x - y).norm()),
           tag + " nonexpansive");
    const Vector resid = x - px;
    for (int k = 0; k < 4; ++k) {
      const Vector z = sample_member(set, rng);
      const double scale = std::max(1.0, resid.norm() * (z - px).norm());
      record(r, resid.dot(z - px) / scale, tag + " variational inequality");
    }
    ++r.cases;
  }
  return r;
}

CheckResult check_moreau(std::size_t budget, std::uint64_t seed) {
  CheckResult r{"moreau", 0, 0.0, 1e-10, {}};
  Rng rng(seed);
  for (std::size_t c = 0; c < budget; ++c) {
    const auto d = 1 + static_cast<Eigen::Index>(rng.below(6));
    const ConvexSet cone = random_cone(static_cast<int>(c), d, rng);
    const Vector x = 2.0 * rng.gaussian(d);
    const MoreauReport rep = moreau_check(cone, x);
    const std::string tag = std::string(cone.kind_name()) + " case " + std::to_string(c);
    record(r, rep.decomposition_residual, tag + " decomposition");
    record(r, rep.orthogonality_residual, tag + " orthogonality");
    ++r.cases;
  }
  return r;
}

CheckResult check_oracle(std::size_t budget, std::uint64_t seed) {
  CheckResult r{"oracle", 0, 0.0, 1e-8, {}};
  Rng rng(seed);
  for (std::size_t c = 0; c < budget; ++c) {
    const auto d = 2 + static_cast<Eigen::Index>(rng.below(3));
    const auto m = 1 + static_cast<Eigen::Index>(rng.below(6));
    const ConvexSet cone = ConvexSet::generated_cone(random_generators(d, m, rng));
    const Vector x = 2.0 * rng.gaussian(d);
    const Vector fast = project(cone, x);
    const Vector slow = oracle_cone_projection(*cone.as<GeneratedCone>(), x);
    record(r, (fast - slow).norm(),
           "m=" + std::to_string(m) + " d=" + std::to_string(d) + " case " + std::to_string(c));
    ++r.cases;
  }
  return r;
}

CheckResult check_bridge(std::size_t budget, std::uint64_t seed, std::size_t steps) {
  CheckResult r{"bridge", 0, 0.0, 1e-10, {}};
  StopRule stop;
  stop.max_iters = steps;
  stop.norm_tol = 0.0;
  stop.stagnation_window = 0;
  TraceOptions opts;
  opts.thinning = 1;
  opts.tail = steps + 1;
  for (std::size_t c = 0; c < budget; ++c) {
    const auto d = 2 + static_cast<Eigen::Index>(c % 5);
    const InstanceSpec inst = gen_cone_instance(d, 2, seed + c, false);
    const auto [d1, d2] = bridge_dictionaries(inst.sets[0], inst.sets[1]);
    const std::vector<Dictionary> dicts{d1, d2};
    const Vector x0 = starting_point(inst);
    const Trace proj = run_projection(inst.sets, ScheduleState(ScheduleSpec::cyclic(2)), x0, stop, opts);
    const Trace greedy = run_greedy(dicts, ScheduleState(ScheduleSpec::cyclic(2)), x0, stop, opts);
    // A run that hits exactly 0 stops early and stays at 0.
    double worst = 0.0;
    const std::size_t n = std::max(proj.iterates.size(), greedy.iterates.size());
    for (std::size_t k = 0; k < n; ++k) {
      const Vector& a = proj.iterates[std::min(k, proj.iterates.size() - 1)].x;
      const Vector& b = greedy.iterates[std::min(k, greedy.iterates.size() - 1)].x;
      worst = std::max(worst, (a - b).norm());
    }
    record(r, worst, inst.id.empty() ? "pair " + std::to_string(c) : inst.id);
    ++r.cases;
  }
  return r;
}

}  // namespace altproj::cli
