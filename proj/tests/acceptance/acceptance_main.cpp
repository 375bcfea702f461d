// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "altproj/analysis.hpp"
#include "altproj/engine.hpp"
#include "altproj/error.hpp"
#include "altproj/instances.hpp"
#include "altproj/io.hpp"
#include "altproj/rng.hpp"
#include "altproj_cli/checks.hpp"
#include "altproj_cli/commands.hpp"

namespace fs = std::filesystem;
using namespace altproj;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  std::string id;
  bool passed;
  std::string detail;
};

std::vector<Line> g_lines;

void report(const std::string& id, bool passed, const std::string& detail) {
  g_lines.push_back({id, passed, detail});
  std::cout << (passed ? "PASS " : "FAIL ") << id << ": " << detail << std::endl;
}

std::string fmt(double v) { return io::format_double(v); }

struct LoadedInstance {
  SuiteClass suite;
  InstanceSpec spec;
};

std::vector<LoadedInstance> load_suite(const fs::path& root) {
  std::vector<LoadedInstance> out;
  for (SuiteClass c : all_suite_classes()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / std::string(to_string(c)))) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back({c, io::read_instance(f)});
  }
  return out;
}

struct RunResult {
  const LoadedInstance* inst = nullptr;
  bool random = false;
  double final_norm = 0.0;
  std::size_t steps = 0;
  double pyth = 0.0;        // greedy: max |identity residual|
  double decay_slack = 0.0;  // projection: max slack
  double functional_worst = std::numeric_limits<double>::infinity();
  std::size_t functional_checks = 0;
  std::size_t functional_failures = 0;
  std::string error;
};

StopRule suite_stop() {
  StopRule s;
  s.max_iters = 1'000'000;
  s.norm_tol = 1e-6;
  return s;
}

// Per-step summand sign: every step n uses index j = i(n) alone, and the
// functionals are unit members of the polar cone A_j.
void greedy_functionals(const Trace& t, std::span<const ConvexSet> polars, Rng& rng,
                        RunResult& r) {
  std::vector<std::vector<Vector>> samples(polars.size());
  for (std::size_t j = 0; j < polars.size(); ++j) {
    for (int attempt = 0; attempt < 1024 && samples[j].size() < 64; ++attempt) {
      Vector a = sample_member(polars[j], rng);
      if (a.norm() < 1e-12) continue;
      samples[j].push_back(a.normalized());
    }
    // A dictionary that positively spans on its own has polar {0}.
    if (samples[j].empty()) samples[j].push_back(Vector::Zero(polars[j].dim()));
  }
  for (std::size_t n = 1; n <= t.steps(); ++n) {
    const int j = t.records[n - 1].index;
    const std::vector<int> J{j};
    for (const Vector& a : samples[static_cast<std::size_t>(j)]) {
      const auto c = segment_functional_check(t, n - 1, n, a, J, polars, Mode::Greedy);
      r.functional_worst = std::min(r.functional_worst, c.worst_margin);
      ++r.functional_checks;
      if (c.worst_margin < -1e-10) ++r.functional_failures;
    }
  }
}

// Telescoped inequality over windows of one to three steps; the functionals
// are unit members of the intersection of the sets visited in the window.
void projection_functionals(const Trace& t, std::span<const ConvexSet> sets, Rng& rng,
                            RunResult& r) {
  std::map<std::vector<int>, std::vector<Vector>> cache;
  auto admissible = [&](std::vector<int> J) -> const std::vector<Vector>& {
    std::sort(J.begin(), J.end());
    J.erase(std::unique(J.begin(), J.end()), J.end());
    auto it = cache.find(J);
    if (it != cache.end()) return it->second;
    std::vector<Vector> out;
    for (const Vector& a : sample_intersection(sets, J, 8, rng)) {
      if (a.norm() > 1e-9) out.push_back(a.normalized());
    }
    return cache.emplace(J, std::move(out)).first->second;
  };
  for (std::size_t s = 0; s < t.steps(); ++s) {
    for (std::size_t len = 1; len <= 3 && s + len <= t.steps(); ++len) {
      if (len > 1 && s % 7 != 0) continue;
      std::vector<int> J;
      for (std::size_t n = s + 1; n <= s + len; ++n) J.push_back(t.records[n - 1].index);
      const auto& as = admissible(J);
      std::vector<int> sorted = J;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (const Vector& a : as) {
        try {
          const auto c =
              segment_functional_check(t, s, s + len, a, sorted, sets, Mode::Projection);
          r.functional_worst = std::min(r.functional_worst, c.worst_margin);
          ++r.functional_checks;
          if (c.worst_margin < -1e-8) ++r.functional_failures;
        } catch (const Error& e) {
          // A sampled point that fails membership is not admissible.
          if (e.code() != ErrorCode::PreconditionViolated) throw;
        }
      }
    }
  }
}

RunResult run_instance(const LoadedInstance& li, bool random, bool with_functionals) {
  const InstanceSpec& inst = li.spec;
  RunResult r;
  r.inst = &li;
  r.random = random;
  const ScheduleSpec sched = random ? ScheduleSpec::seeded_random(inst.count(), inst.seed * 1000)
                                    : ScheduleSpec::cyclic(inst.count());
  TraceOptions opts;
  if (with_functionals) {
    opts.thinning = 1;
    opts.tail = 2'000'000;
  }
  try {
    const auto members = membership_sets(inst);
    Trace t = inst.mode == Mode::Projection
                  ? run_projection(inst.sets, ScheduleState(sched), starting_point(inst),
                                   suite_stop(), opts)
                  : run_greedy(inst.dictionaries, ScheduleState(sched), starting_point(inst),
                               suite_stop(), opts);
    r.final_norm = t.final_norm();
    r.steps = t.steps();
    r.pyth = t.max_abs_identity_residual;
    r.decay_slack = t.max_decay_slack;
    if (with_functionals) {
      Rng rng(inst.seed * 7919 + (random ? 1 : 0));
      if (inst.mode == Mode::Greedy) {
        greedy_functionals(t, members, rng, r);
      } else {
        projection_functionals(t, members, rng, r);
      }
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::string summarize(const std::vector<const RunResult*>& runs, std::size_t* failures,
                      double tol) {
  std::size_t bad = 0;
  double worst = 0.0;
  std::size_t max_steps = 0;
  std::string first_bad;
  for (const RunResult* r : runs) {
    const bool ok = r->error.empty() && r->final_norm <= tol;
    worst = std::max(worst, r->final_norm);
    max_steps = std::max(max_steps, r->steps);
    if (!ok) {
      ++bad;
      if (first_bad.empty()) {
        first_bad = " first=" + r->inst->spec.id + (r->random ? "/random" : "/cyclic") +
                    (r->error.empty() ? "" : " error=" + r->error);
      }
    }
  }
  *failures = bad;
  std::ostringstream s;
  s << runs.size() << " runs, max final norm " << fmt(worst) << " (<= " << fmt(tol)
    << "), max steps " << max_steps << ", failures " << bad << first_bad;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"altproj acceptance suite"};
  std::string suite = "data/standard_suite";
  std::string scratch = "acceptance_scratch";
  app.add_option("--suite", suite, "Standard suite directory");
  app.add_option("--scratch", scratch, "Directory for search output");
  CLI11_PARSE(app, argc, argv);

  // C1-C3, C5: randomized property checks.
  {
    const auto t0 = Clock::now();
    const auto r = cli::check_axioms(10'000, 1);
    const double secs = seconds_since(t0);
    report("C1 projection axioms", r.passed() && r.max_residual <= 1e-10 && secs <= 30.0,
           std::to_string(r.cases) + " cases, max residual " + fmt(r.max_residual) +
               " (<= 1e-10), " + fmt(secs) + " s (<= 30 s)");
  }
  {
    const auto t0 = Clock::now();
    const auto r = cli::check_moreau(1'000, 2);
    const double secs = seconds_since(t0);
    report("C2 Moreau decomposition", r.passed() && r.max_residual <= 1e-10 && secs <= 10.0,
           std::to_string(r.cases) + " cases, max residual " + fmt(r.max_residual) +
               " (<= 1e-10), " + fmt(secs) + " s (<= 10 s)");
  }
  {
    const auto r = cli::check_oracle(500, 3);
    report("C3 oracle equivalence", r.passed() && r.max_residual <= 1e-8,
           std::to_string(r.cases) + " cases, max deviation " + fmt(r.max_residual) +
               " (<= 1e-8)");
  }

  std::vector<LoadedInstance> instances;
  try {
    instances = load_suite(suite);
  } catch (const std::exception& e) {
    std::cout << "FAIL suite: " << e.what() << std::endl;
    return 1;
  }

  // One cyclic and one random run per suite instance; traces keep every
  // iterate so the functional checks can run on them.
  const auto t_runs = Clock::now();
  std::vector<RunResult> runs;
  for (const auto& li : instances) {
    runs.push_back(run_instance(li, false, true));
    runs.push_back(run_instance(li, true, true));
  }
  const double run_secs = seconds_since(t_runs);

  {
    double pyth = 0.0;
    double slack = -std::numeric_limits<double>::infinity();
    std::size_t greedy = 0, projection = 0, errors = 0;
    for (const auto& r : runs) {
      if (!r.error.empty()) {
        ++errors;
        continue;
      }
      if (r.inst->spec.mode == Mode::Greedy) {
        pyth = std::max(pyth, r.pyth);
        ++greedy;
      } else {
        slack = std::max(slack, r.decay_slack);
        ++projection;
      }
    }
    report("C4 per-step identities", errors == 0 && pyth <= 1e-10 && slack <= 1e-10,
           std::to_string(greedy) + " greedy runs max |pythagoras residual| " + fmt(pyth) +
               " (<= 1e-10); " + std::to_string(projection) + " projection runs max decay slack " +
               fmt(slack) + " (<= 1e-10); errors " + std::to_string(errors));
  }
  {
    const auto t0 = Clock::now();
    const auto r = cli::check_bridge(100, 5, 1000);
    report("C5 bridge equivalence", r.passed() && r.max_residual <= 1e-10,
           std::to_string(r.cases) + " cone pairs x 1000 steps, max deviation " +
               fmt(r.max_residual) + " (<= 1e-10), " + fmt(seconds_since(t0)) + " s");
  }
  {
    std::vector<const RunResult*> sel;
    for (const auto& r : runs) {
      if (!r.random || r.inst->spec.count() == 2) sel.push_back(&r);
    }
    std::size_t bad = 0;
    const std::string s = summarize(sel, &bad, 1e-6);
    report("C6 alternating convergence", bad == 0 && run_secs <= 300.0,
           s + ", all suite runs " + fmt(run_secs) + " s (<= 300 s)");
  }
  {
    std::vector<const RunResult*> sel;
    for (const auto& r : runs) {
      if (r.random && r.inst->spec.count() == 3) sel.push_back(&r);
    }
    std::size_t bad = 0;
    const std::string s = summarize(sel, &bad, 1e-6);
    report("C7 K=3 random schedules", bad == 0 && !sel.empty(), s);
  }
  {
    std::vector<const RunResult*> sel;
    for (const auto& r : runs) {
      if (r.random && r.inst->suite == SuiteClass::Subspaces && r.inst->spec.count() <= 5) {
        sel.push_back(&r);
      }
    }
    std::size_t bad = 0;
    const std::string s = summarize(sel, &bad, 1e-6);
    std::size_t wip_sub = 0, wip_sub_ok = 0, wip_cone = 0, wip_cone_ok = 0;
    for (const auto& li : instances) {
      const bool sub = li.suite == SuiteClass::Subspaces;
      const bool cone = li.suite == SuiteClass::Cones || li.suite == SuiteClass::SeparatedCones;
      if (!sub && !cone) continue;
      for (const auto& set : li.spec.sets) {
        const bool holds = wip_check(set, 64, li.spec.seed).holds;
        if (sub) {
          ++wip_sub;
          wip_sub_ok += holds ? 1 : 0;
        } else {
          ++wip_cone;
          wip_cone_ok += holds ? 0 : 1;
        }
      }
    }
    report("C8 subspaces and weak internal points",
           bad == 0 && wip_sub == wip_sub_ok && wip_cone == wip_cone_ok,
           s + "; wip true on " + std::to_string(wip_sub_ok) + "/" + std::to_string(wip_sub) +
               " subspaces, false on " + std::to_string(wip_cone_ok) + "/" +
               std::to_string(wip_cone) + " cones");
  }
  {
    std::vector<const RunResult*> sel;
    for (const auto& r : runs) {
      if (r.random && r.inst->suite == SuiteClass::SymmetricDictionaries &&
          r.inst->spec.count() <= 5) {
        sel.push_back(&r);
      }
    }
    std::size_t bad = 0;
    const std::string s = summarize(sel, &bad, 1e-6);
    report("C9 symmetric dictionaries", bad == 0 && !sel.empty(), s);
  }
  for (const Mode mode : {Mode::Greedy, Mode::Projection}) {
    std::size_t traces = 0, checks = 0, failures = 0, errors = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
      if (r.inst->spec.mode != mode) continue;
      ++traces;
      if (!r.error.empty()) ++errors;
      checks += r.functional_checks;
      failures += r.functional_failures;
      worst = std::min(worst, r.functional_worst);
    }
    const bool greedy = mode == Mode::Greedy;
    report(greedy ? "C10 greedy summand sign" : "C11 telescoped projection inequality",
           failures == 0 && errors == 0 && checks > 0,
           std::to_string(traces) + " traces, " + std::to_string(checks) +
               " functional checks, worst margin " + fmt(worst) + " (>= " +
               (greedy ? "-1e-10" : "-1e-8") + "), failures " + std::to_string(failures));
  }

  // C12: the search command over the full suite, then a corrupted instance.
  {
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    const fs::path clean_cfg = fs::path(scratch) / "search_suite.json";
    io::write_json({{"suite_dir", fs::absolute(suite).string()},
                    {"out", (fs::absolute(scratch) / "suite").string()}},
                   clean_cfg);
    std::ostringstream out1, err1;
    const auto t0 = Clock::now();
    const int clean = cli::run_cli({"altproj", "search", "--config", clean_cfg.string()}, out1, err1);
    const double secs = seconds_since(t0);

    InstanceSpec bad;
    bad.id = "corrupted-identical-lines";
    bad.dim = 2;
    Matrix line(2, 1);
    line << 0.6, 0.8;
    bad.sets = {ConvexSet::subspace(line), ConvexSet::subspace(line)};
    Vector x0(2);
    x0 << 1.0, 2.0;
    bad.x0 = x0;
    const fs::path bad_cfg = fs::path(scratch) / "search_corrupted.json";
    io::write_json({{"family", nullptr},
                    {"instances", {io::to_json(bad)}},
                    {"out", (fs::absolute(scratch) / "corrupted").string()}},
                   bad_cfg);
    std::ostringstream out2, err2;
    const int corrupted =
        cli::run_cli({"altproj", "search", "--config", bad_cfg.string()}, out2, err2);
    report("C12 search soundness", clean == cli::kExitOk && corrupted == cli::kExitFlagged,
           "standard suite exit " + std::to_string(clean) + " (want 0) in " + fmt(secs) +
               " s; corrupted instance exit " + std::to_string(corrupted) + " (want 1)");
  }

  const auto failed = std::count_if(g_lines.begin(), g_lines.end(),
                                    [](const Line& l) { return !l.passed; });
  std::cout << (g_lines.size() - static_cast<std::size_t>(failed)) << "/" << g_lines.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
