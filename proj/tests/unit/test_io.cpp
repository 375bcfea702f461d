#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "altproj/error.hpp"
#include "altproj/instances.hpp"
#include "altproj/io.hpp"
#include "altproj/rng.hpp"
#include "support.hpp"

using namespace altproj;
using testing_support::cols;
using testing_support::scratch_dir;
using testing_support::vec;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::NumericalFailure;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(1.0), "1");
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

TEST(Json, MatricesAreColumnLists) {
  const Matrix m = cols({{1, 2}, {3, 4}, {5, 6}});
  const auto j = io::matrix_to_json(m);
  EXPECT_EQ(j.dump(), "[[1.0,2.0],[3.0,4.0],[5.0,6.0]]");
  EXPECT_EQ(io::matrix_from_json(j), m);
}

TEST(Json, InstanceRoundTripPreservesProjections) {
  Rng rng(2);
  const std::vector<InstanceSpec> insts{gen_subspace_instance(4, 3, 1),
                                        gen_cone_instance(4, 3, 1, false),
                                        gen_dictionary_instance(3, 2, 1, true)};
  for (const auto& inst : insts) {
    const InstanceSpec back = io::instance_from_json(io::to_json(inst));
    EXPECT_EQ(io::to_json(back), io::to_json(inst));
    const auto a = membership_sets(inst);
    const auto b = membership_sets(back);
    ASSERT_EQ(a.size(), b.size());
    for (int k = 0; k < 100; ++k) {
      const Vector x = rng.gaussian(inst.dim);
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(project(a[i], x), project(b[i], x));
    }
  }
}

TEST(Json, AllSetKindsRoundTrip) {
  const std::vector<ConvexSet> sets{
      ConvexSet::subspace(cols({{1, 0, 0}})), ConvexSet::affine(cols({{0, 1, 0}}), vec({1, 0, 0})),
      ConvexSet::halfspace(vec({0, 0, 1}), 0.5), ConvexSet::ball(vec({1, 1, 1}), 2.0),
      ConvexSet::generated_cone(cols({{1, 0, 0}, {1, 1, 0}})),
      ConvexSet::halfspace_cone(cols({{0, 0, 1}}))};
  Rng rng(3);
  for (const auto& s : sets) {
    const ConvexSet back = io::set_from_json(io::to_json(s));
    EXPECT_EQ(back.kind_name(), s.kind_name());
    const Vector x = rng.gaussian(3);
    EXPECT_EQ(project(back, x), project(s, x)) << s.kind_name();
  }
}

TEST(Json, ConeReferencesResolve) {
  const io::json cones = io::json::array({io::to_json(ConvexSet::generated_cone(cols({{1, 0}})))});
  const Dictionary d = io::dictionary_from_json(io::json{{"kind", "cone_section"}, {"cone_ref", 0}},
                                                cones);
  ASSERT_NE(d.as<ConeSection>(), nullptr);
  EXPECT_EQ(d.as<ConeSection>()->cone.kind_name(), "generated_cone");
}

TEST(Json, ScheduleIndicesAreOneBased) {
  const ScheduleSpec s = ScheduleSpec::custom({0, 2, 1}, 3);
  const auto j = io::to_json(s);
  EXPECT_EQ(j["list"], io::json({1, 3, 2}));
  const ScheduleSpec back = io::schedule_from_json(j, 3);
  EXPECT_EQ(back.list, s.list);
  EXPECT_EQ(code_of([] {
              (void)io::schedule_from_json(io::json{{"kind", "custom"}, {"list", {1, 1, 2}}}, 2);
            }),
            ErrorCode::InvalidCustom);
  const ScheduleSpec r = io::schedule_from_json(io::json{{"kind", "random"}, {"seed", 42}}, 4);
  EXPECT_EQ(r.kind, ScheduleKind::SeededRandom);
  EXPECT_EQ(r.seed, 42u);
  EXPECT_EQ(r.count, 4);
}

TEST(Json, UnvalidatedInstanceStillNeedsTwoSets) {
  io::json j = io::to_json(gen_subspace_instance(3, 2, 1));
  j["sets"].erase(1);
  EXPECT_EQ(code_of([&] { (void)io::instance_from_json(j, false); }), ErrorCode::InstanceInvalid);
  EXPECT_EQ(code_of([&] { (void)io::instance_from_json(io::json::parse("{\"dim\": 2}")); }),
            ErrorCode::ParseError);
}

TEST(Csv, RunRoundTrip) {
  const auto dir = scratch_dir("io_run");
  const InstanceSpec inst = gen_dictionary_instance(3, 3, 4, false);
  StopRule stop;
  stop.max_iters = 300;
  stop.norm_tol = 0.0;
  stop.stagnation_window = 0;
  TraceOptions opts;
  opts.thinning = 7;
  opts.record_distances = true;
  const Trace t = run_greedy(inst.dictionaries, ScheduleState(ScheduleSpec::seeded_random(3, 8)),
                             starting_point(inst), stop, opts);
  io::write_trace_csv(t, dir / "trace.csv");
  io::write_iterates_csv(t, dir / "iterates.csv");
  io::write_json(io::trace_metadata(t, inst, stop, opts), dir / "metadata.json");

  const std::string csv = slurp(dir / "trace.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,index,norm,step_norm,coefficient,dist_1,dist_2,dist_3");

  const io::LoadedRun run = io::read_run(dir);
  ASSERT_EQ(run.trace.steps(), t.steps());
  for (std::size_t n = 0; n < t.steps(); ++n) {
    EXPECT_EQ(run.trace.records[n].index, t.records[n].index);
    EXPECT_EQ(run.trace.records[n].norm, t.records[n].norm);
    EXPECT_EQ(run.trace.records[n].coefficient, t.records[n].coefficient);
  }
  ASSERT_EQ(run.trace.iterates.size(), t.iterates.size());
  for (std::size_t i = 0; i < t.iterates.size(); ++i) {
    EXPECT_EQ(run.trace.iterates[i].n, t.iterates[i].n);
    EXPECT_EQ(run.trace.iterates[i].x, t.iterates[i].x);
  }
  EXPECT_EQ(run.trace.tail_start, t.tail_start);
  EXPECT_EQ(run.trace.mode, Mode::Greedy);
  EXPECT_EQ(io::to_json(run.instance), io::to_json(inst));
  EXPECT_EQ(run.metadata["steps"], t.steps());
  EXPECT_EQ(run.metadata["schedule"]["kind"], "random");
}

TEST(Csv, ProjectionCoefficientIsEmpty) {
  const auto dir = scratch_dir("io_proj");
  const InstanceSpec inst = gen_subspace_instance(3, 2, 2);
  const Trace t = run_projection(inst.sets, ScheduleState(ScheduleSpec::cyclic(2)),
                                 starting_point(inst), StopRule{});
  io::write_trace_csv(t, dir / "trace.csv");
  std::istringstream lines(slurp(dir / "trace.csv"));
  std::string header, row0, row1;
  std::getline(lines, header);
  std::getline(lines, row0);
  std::getline(lines, row1);
  EXPECT_EQ(header, "n,index,norm,step_norm,coefficient");
  EXPECT_EQ(row0.substr(0, 2), "0,");
  EXPECT_EQ(row1.back(), ',');
  EXPECT_EQ(row1.substr(0, 4), "1,1,");
}

TEST(Report, LimitReportJson) {
  const std::vector<ConvexSet> same{ConvexSet::subspace(cols({{0.6, 0.8}})),
                                    ConvexSet::subspace(cols({{0.6, 0.8}}))};
  const Trace t = run_projection(same, ScheduleState(ScheduleSpec::cyclic(2)), vec({1, 2}),
                                 StopRule{});
  const auto j = io::to_json(analyze_trace(t, same));
  EXPECT_EQ(j["status"], "diagnostic");
  ASSERT_TRUE(j["counterexample_candidates"].is_array());
  EXPECT_FALSE(j["counterexample_candidates"].empty());
  EXPECT_EQ(j["clusters"].size(), 1u);
}

TEST(Json, NonFiniteBecomesNull) {
  EXPECT_EQ(io::vector_to_json(vec({std::numeric_limits<double>::infinity()})).dump(), "[null]");
}
