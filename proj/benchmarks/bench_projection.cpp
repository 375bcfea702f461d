#include <benchmark/benchmark.h>

#include "altproj/geometry.hpp"
#include "altproj/nnls.hpp"
#include "altproj/rng.hpp"

using namespace altproj;

static void BM_GeneratedConeProjection(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1);
  Matrix gens(d, d + 1);
  for (Eigen::Index j = 0; j < gens.cols(); ++j) gens.col(j) = rng.gaussian(d);
  const ConvexSet cone = ConvexSet::generated_cone(gens);
  const Vector x = rng.gaussian(d);
  for (auto _ : state) benchmark::DoNotOptimize(project(cone, x));
}
BENCHMARK(BM_GeneratedConeProjection)->Arg(2)->Arg(5)->Arg(8)->Arg(16);

static void BM_Nnls(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Rng rng(2);
  Matrix a(d, 2 * d);
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = rng.gaussian(d);
  const Vector b = rng.gaussian(d);
  for (auto _ : state) benchmark::DoNotOptimize(solve_nnls(a, b));
}
BENCHMARK(BM_Nnls)->Arg(4)->Arg(8)->Arg(16);

static void BM_SubspaceProjection(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Rng rng(3);
  Matrix basis(d, d / 2);
  for (Eigen::Index j = 0; j < basis.cols(); ++j) basis.col(j) = rng.gaussian(d);
  const ConvexSet sub = ConvexSet::subspace(Eigen::HouseholderQR<Matrix>(basis).householderQ() *
                                             Matrix::Identity(d, d / 2));
  const Vector x = rng.gaussian(d);
  for (auto _ : state) benchmark::DoNotOptimize(project(sub, x));
}
BENCHMARK(BM_SubspaceProjection)->Arg(4)->Arg(16)->Arg(64);
