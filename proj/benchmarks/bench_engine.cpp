#include <benchmark/benchmark.h>

#include "altproj/dictionaries.hpp"
#include "altproj/engine.hpp"
#include "altproj/instances.hpp"

using namespace altproj;

static void BM_GreedyStep(benchmark::State& state) {
  const InstanceSpec inst = gen_dictionary_instance(state.range(0), 3, 1, false);
  const Vector x = starting_point(inst);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_step(inst.dictionaries[0], x));
}
BENCHMARK(BM_GreedyStep)->Arg(3)->Arg(6)->Arg(10);

static StopRule short_run() {
  StopRule s;
  s.max_iters = 1000;
  s.norm_tol = 0.0;
  s.stagnation_window = 0;
  return s;
}

static void BM_ProjectionRun(benchmark::State& state) {
  const InstanceSpec inst = gen_cone_instance(state.range(0), 3, 1, false);
  std::int64_t steps = 0;
  for (auto _ : state) {
    const Trace t = run_projection(inst.sets, ScheduleState(ScheduleSpec::cyclic(3)),
                                   starting_point(inst), short_run());
    steps += static_cast<std::int64_t>(t.steps());
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_ProjectionRun)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_GreedyRun(benchmark::State& state) {
  const InstanceSpec inst = gen_dictionary_instance(state.range(0), 3, 1, false);
  std::int64_t steps = 0;
  for (auto _ : state) {
    const Trace t = run_greedy(inst.dictionaries, ScheduleState(ScheduleSpec::cyclic(3)),
                               starting_point(inst), short_run());
    steps += static_cast<std::int64_t>(t.steps());
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_GreedyRun)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
