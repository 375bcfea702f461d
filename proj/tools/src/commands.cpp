#include "altproj_cli/commands.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "altproj/error.hpp"
#include "altproj/io.hpp"
#include "altproj_cli/checks.hpp"

namespace altproj::cli {

namespace {

using nlohmann::json;

template <class F>
auto in_field(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "field '" + name + "': " + e.detail());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "field '" + name + "': " + e.what());
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

InstanceSpec load_instance(const json& j, const fs::path& base, bool validated) {
  if (j.is_string()) {
    const fs::path p = resolve(j.get<std::string>(), base);
    if (!fs::exists(p)) throw Error(ErrorCode::InvalidArgument, "file not found: " + p.string());
    return io::read_instance(p, validated);
  }
  return io::instance_from_json(j, validated);
}

StopRule load_stop(const json& j, const Overrides& o) {
  StopRule stop = j.contains("stop") ? in_field("stop", [&] { return io::stop_rule_from_json(j.at("stop")); })
                                     : StopRule{};
  if (o.max_iter) stop.max_iters = *o.max_iter;
  if (o.tol) stop.norm_tol = *o.tol;
  in_field("stop", [&] { validate(stop); });
  return stop;
}

double load_eps(const json& j, const Overrides& o) {
  const double eps = o.eps ? *o.eps : j.value("eps", 1e-3);
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "field 'eps': must be > 0");
  return eps;
}

Trace run_instance(const InstanceSpec& inst, const ScheduleSpec& schedule, const StopRule& stop,
                   const TraceOptions& opts) {
  const Vector x0 = starting_point(inst);
  if (inst.mode == Mode::Projection) {
    return run_projection(inst.sets, ScheduleState(schedule), x0, stop, opts);
  }
  return run_greedy(inst.dictionaries, ScheduleState(schedule), x0, stop, opts);
}

void write_run(const fs::path& dir, const Trace& trace, const InstanceSpec& inst,
               const StopRule& stop, const TraceOptions& opts, double eps) {
  fs::create_directories(dir);
  io::write_trace_csv(trace, dir / "trace.csv");
  io::write_iterates_csv(trace, dir / "iterates.csv");
  json meta = io::trace_metadata(trace, inst, stop, opts);
  meta["eps"] = eps;
  io::write_json(meta, dir / "metadata.json");
}

void print_candidates(const LimitReport& rep, const std::string& where, std::ostream& err) {
  for (const auto& c : rep.candidates) {
    err << "COUNTEREXAMPLE CANDIDATE [" << where << "]: " << c.kind << " cluster " << c.cluster + 1;
    if (c.partner) err << " with cluster " << *c.partner + 1;
    err << ", |w| = " << io::format_double(c.norm) << '\n';
  }
}

int report_error(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return kExitInvalid;
}

int cmd_run(const fs::path& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    if (!fs::exists(config_path)) {
      throw Error(ErrorCode::InvalidArgument, "config file not found: " + config_path.string());
    }
    config = load_run_config(io::read_json(config_path), config_path.parent_path(), o);
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
  Trace trace;
  try {
    trace = execute_run(config);
  } catch (const Error& e) {
    return report_error(e, err);
  }
  out << "mode=" << to_string(trace.mode) << " K=" << trace.set_count << " steps=" << trace.steps()
      << " stop=" << to_string(trace.stop_reason)
      << " final_norm=" << io::format_double(trace.final_norm())
      << " violations=" << trace.violations.size() << " out=" << config.out_dir.string() << '\n';
  for (const auto& v : trace.violations) {
    err << "violation: step " << v.n << " " << v.check << " residual "
        << io::format_double(v.residual) << '\n';
  }
  return trace.violations.empty() ? kExitOk : kExitFlagged;
}

int cmd_analyze(const fs::path& path, const Overrides& o, std::size_t samples, bool widen,
                std::ostream& out, std::ostream& err) {
  const fs::path dir = fs::is_directory(path) ? path : path.parent_path();
  LimitReport rep;
  try {
    const io::LoadedRun run = io::read_run(dir);
    AnalysisOptions opts;
    opts.eps = o.eps ? *o.eps : run.metadata.value("eps", 1e-3);
    if (!(opts.eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "--eps must be > 0");
    opts.sample_count = samples;
    opts.seed = o.seed.value_or(0);
    opts.widen_to_segment_indices = widen;
    rep = analyze_trace(run.trace, membership_sets(run.instance), opts);
    const fs::path target = o.out ? *o.out : dir;
    io::write_json(io::to_json(rep), target / "report.json");
    out << "clusters=" << rep.clusters.size() << " pairs=" << rep.pairs.size()
        << " candidates=" << rep.candidates.size() << " report=" << (target / "report.json").string()
        << '\n';
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
  for (const auto& n : rep.notes) err << "note: " << n << '\n';
  print_candidates(rep, dir.string(), err);
  return rep.has_candidates() ? kExitFlagged : kExitOk;
}

int cmd_check(const std::string& what, std::size_t budget, std::uint64_t seed, std::ostream& out,
              std::ostream& err) {
  CheckResult r;
  if (what == "moreau") {
    r = check_moreau(budget, seed);
  } else if (what == "bridge") {
    r = check_bridge(budget, seed);
  } else if (what == "oracle") {
    r = check_oracle(budget, seed);
  } else if (what == "axioms") {
    r = check_axioms(budget, seed);
  } else {
    err << "error: unknown check '" << what << "' (moreau|bridge|oracle|axioms)\n";
    return kExitInvalid;
  }
  out << r.name << ": cases=" << r.cases << " max_residual=" << io::format_double(r.max_residual)
      << " tolerance=" << io::format_double(r.tolerance) << (r.passed() ? " PASS" : " FAIL") << '\n';
  for (const auto& f : r.failures) err << "  " << f << '\n';
  return r.passed() ? kExitOk : kExitFlagged;
}

void write_summary(const std::vector<SearchRow>& rows, const fs::path& path, std::ostream& out) {
  std::ofstream csv(path);
  csv << "run_id,instance_id,schedule,final_norm,steps,stop_reason,clusters,candidates,violations,"
         "error\n";
  out << std::left << std::setw(42) << "run" << std::setw(14) << "final_norm" << std::setw(9)
      << "steps" << std::setw(10) << "clusters" << "flags\n";
  for (const auto& r : rows) {
    csv << r.run_id << ',' << r.instance_id << ',' << r.schedule << ','
        << io::format_double(r.final_norm) << ',' << r.steps << ',' << r.stop_reason << ','
        << r.clusters << ',' << r.candidates << ',' << r.violations << ",\"" << r.error << "\"\n";
    std::string flags;
    if (r.candidates > 0) flags += "CANDIDATE ";
    if (r.violations > 0) flags += "violations ";
    if (!r.error.empty()) flags += "error ";
    char norm[32];
    std::snprintf(norm, sizeof norm, "%.3e", r.final_norm);
    out << std::setw(41) << r.run_id << ' ' << std::setw(14) << norm << std::setw(9) << r.steps
        << std::setw(10) << r.clusters << (flags.empty() ? "-" : flags) << '\n';
  }
}

int cmd_search(const fs::path& config_path, const Overrides& o, std::ostream& out,
               std::ostream& err) {
  SearchConfig config;
  try {
    const json j = fs::exists(config_path) ? io::read_json(config_path) : json::object();
    if (!config_path.empty() && !fs::exists(config_path)) {
      throw Error(ErrorCode::InvalidArgument, "config file not found: " + config_path.string());
    }
    config = load_search_config(j, config_path.parent_path(), o);
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
  const auto rows = run_search(config);
  fs::create_directories(config.out_dir);
  write_summary(rows, config.out_dir / "summary.csv", out);
  std::size_t candidates = 0;
  std::size_t errors = 0;
  for (const auto& r : rows) {
    candidates += r.candidates;
    if (!r.error.empty()) {
      ++errors;
      err << "error in " << r.run_id << ": " << r.error << '\n';
    }
    if (r.candidates > 0) {
      err << "COUNTEREXAMPLE CANDIDATE in " << r.run_id << " (see "
          << (config.out_dir / r.run_id / "report.json").string() << ")\n";
    }
  }
  out << "runs=" << rows.size() << " candidates=" << candidates << " errors=" << errors << '\n';
  if (candidates > 0) return kExitFlagged;
  return errors > 0 ? kExitInvalid : kExitOk;
}

int cmd_generate(const fs::path& out_dir, const std::vector<std::string>& classes,
                 std::uint64_t first, std::uint64_t last, std::ostream& out, std::ostream& err) {
  try {
    std::size_t written = 0;
    for (SuiteClass c : all_suite_classes()) {
      const std::string name(to_string(c));
      if (!classes.empty() && std::find(classes.begin(), classes.end(), name) == classes.end()) {
        continue;
      }
      for (const auto& inst : standard_suite(c, first, last)) {
        io::write_instance(inst, out_dir / name / (inst.id + ".json"));
        ++written;
      }
    }
    out << "wrote " << written << " instances to " << out_dir.string() << '\n';
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
  return kExitOk;
}

}  // namespace

RunConfig load_run_config(const json& j, const fs::path& base_dir, const Overrides& o) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  RunConfig c;
  const bool validated = !o.no_validate && j.value("validate", true);
  if (!j.contains("instance")) throw Error(ErrorCode::InvalidArgument, "field 'instance': missing");
  c.instance = in_field("instance", [&] { return load_instance(j.at("instance"), base_dir, validated); });
  if (j.contains("schedule")) {
    c.schedule = in_field("schedule", [&] { return io::schedule_from_json(j.at("schedule"), c.instance.count()); });
  } else if (c.instance.schedule) {
    c.schedule = *c.instance.schedule;
  } else {
    c.schedule = ScheduleSpec::cyclic(c.instance.count());
  }
  if (o.seed) c.schedule.seed = *o.seed;
  in_field("schedule", [&] {
    validate(c.schedule);
    if (c.schedule.count != c.instance.count()) {
      throw Error(ErrorCode::InvalidArgument, "K=" + std::to_string(c.schedule.count) +
                                                  " but the instance has " +
                                                  std::to_string(c.instance.count()) + " sets");
    }
  });
  c.stop = load_stop(j, o);
  c.eps = load_eps(j, o);
  c.trace.thinning = j.value("thinning", std::size_t{100});
  if (c.trace.thinning < 1) throw Error(ErrorCode::InvalidArgument, "field 'thinning': must be >= 1");
  c.trace.tail = j.value("tail", std::size_t{0});
  c.trace.record_distances = j.value("record_distances", false);
  c.trace.checked = o.checked || j.value("checked", false);
  c.out_dir = o.out ? *o.out : resolve(j.value("out", std::string("out")), base_dir);
  return c;
}

Trace execute_run(const RunConfig& c) {
  Trace trace = run_instance(c.instance, c.schedule, c.stop, c.trace);
  write_run(c.out_dir, trace, c.instance, c.stop, c.trace, c.eps);
  return trace;
}

SearchConfig load_search_config(const json& j, const fs::path& base_dir, const Overrides& o) {
  SearchConfig c;
  const bool validated = !o.no_validate && j.value("validate", true);
  std::uint64_t first = 1;
  std::uint64_t last = 50;
  if (j.contains("seeds")) {
    in_field("seeds", [&] {
      first = j.at("seeds").at(0).get<std::uint64_t>();
      last = j.at("seeds").at(1).get<std::uint64_t>();
      if (first < 1 || last < first) throw Error(ErrorCode::InvalidArgument, "need 1 <= first <= last");
    });
  }
  if (j.contains("suite_dir")) {
    in_field("suite_dir", [&] {
      const fs::path dir = resolve(j.at("suite_dir").get<std::string>(), base_dir);
      if (!fs::is_directory(dir)) throw Error(ErrorCode::InvalidArgument, "not a directory: " + dir.string());
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) c.instances.push_back(io::read_instance(f, validated));
    });
  } else {
    const json family = j.value("family", json("standard"));
    in_field("family", [&] {
      std::vector<SuiteClass> classes;
      if (family.is_string() && family.get<std::string>() == "standard") {
        classes = all_suite_classes();
      } else if (family.is_array()) {
        for (const auto& name : family) {
          bool found = false;
          for (SuiteClass s : all_suite_classes()) {
            if (to_string(s) == name.get<std::string>()) {
              classes.push_back(s);
              found = true;
            }
          }
          if (!found) throw Error(ErrorCode::InvalidArgument, "unknown class " + name.dump());
        }
      } else if (!family.is_null()) {
        throw Error(ErrorCode::InvalidArgument, "expected \"standard\", a list of classes or null");
      }
      for (SuiteClass s : classes) {
        for (auto& inst : standard_suite(s, first, last)) c.instances.push_back(std::move(inst));
      }
    });
  }
  if (j.contains("instances")) {
    in_field("instances", [&] {
      std::size_t k = 0;
      for (const auto& item : j.at("instances")) {
        InstanceSpec inst = load_instance(item, base_dir, validated);
        if (inst.id.empty()) inst.id = "instance-" + std::to_string(k + 1);
        c.instances.push_back(std::move(inst));
        ++k;
      }
    });
  }
  if (c.instances.empty()) throw Error(ErrorCode::InvalidArgument, "search has no instances");
  if (j.contains("schedules")) {
    c.schedules = in_field("schedules", [&] { return j.at("schedules").get<std::vector<std::string>>(); });
    for (const auto& s : c.schedules) {
      if (s != "cyclic" && s != "random") {
        throw Error(ErrorCode::InvalidArgument, "field 'schedules': unknown schedule '" + s + "'");
      }
    }
  }
  c.runs = j.value("runs", std::size_t{1});
  if (c.runs < 1) throw Error(ErrorCode::InvalidArgument, "field 'runs': must be >= 1");
  c.stop = load_stop(j, o);
  c.eps = load_eps(j, o);
  c.sample_count = j.value("sample_count", std::size_t{64});
  c.out_dir = o.out ? *o.out : resolve(j.value("out", std::string("search_out")), base_dir);
  c.jobs = o.jobs ? *o.jobs : j.value("jobs", std::size_t{1});
  if (c.jobs < 1) throw Error(ErrorCode::InvalidArgument, "--jobs must be >= 1");
  if (o.seed) {
    for (auto& inst : c.instances) inst.seed += *o.seed;
  }
  return c;
}

std::vector<SearchRow> run_search(const SearchConfig& c) {
  struct Task {
    const InstanceSpec* instance;
    ScheduleSpec schedule;
    std::string run_id;
  };
  std::vector<Task> tasks;
  for (const auto& inst : c.instances) {
    for (const auto& kind : c.schedules) {
      if (kind == "cyclic") {
        tasks.push_back({&inst, ScheduleSpec::cyclic(inst.count()), inst.id + "-cyclic"});
        continue;
      }
      for (std::size_t r = 0; r < c.runs; ++r) {
        const std::uint64_t seed = inst.seed * 1000 + r;
        std::string id = inst.id + "-random";
        if (c.runs > 1) id += "-" + std::to_string(r + 1);
        tasks.push_back({&inst, ScheduleSpec::seeded_random(inst.count(), seed), std::move(id)});
      }
    }
  }

  std::vector<SearchRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task& task = tasks[t];
      SearchRow& row = rows[t];
      row.run_id = task.run_id;
      row.instance_id = task.instance->id;
      row.schedule = std::string(to_string(task.schedule.kind));
      try {
        TraceOptions opts;
        const Trace trace = run_instance(*task.instance, task.schedule, c.stop, opts);
        const fs::path dir = c.out_dir / task.run_id;
        write_run(dir, trace, *task.instance, c.stop, opts, c.eps);
        AnalysisOptions aopts;
        aopts.eps = c.eps;
        aopts.sample_count = c.sample_count;
        aopts.seed = task.instance->seed;
        const LimitReport rep = analyze_trace(trace, membership_sets(*task.instance), aopts);
        io::write_json(io::to_json(rep), dir / "report.json");
        row.final_norm = trace.final_norm();
        row.steps = trace.steps();
        row.stop_reason = std::string(to_string(trace.stop_reason));
        row.clusters = rep.clusters.size();
        row.candidates = rep.candidates.size();
        row.violations = trace.violations.size();
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(c.jobs, std::max<std::size_t>(1, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Alternating projections and alternating greedy experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::string config;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--eps", o.eps, "Cluster radius");
  };

  CLI::App* run = app.add_subcommand("run", "Run one instance and write its trace");
  run->add_option("--config", config, "Run config (JSON)")->required();
  add_common(run);
  run->add_option("--max-iter", o.max_iter, "Iteration cap");
  run->add_option("--tol", o.tol, "Stop once the norm is at most this");
  run->add_flag("--checked", o.checked, "Check per-step invariants");
  run->add_flag("--no-validate", o.no_validate, "Load sets as written (fault injection)");

  std::string trace_path;
  std::size_t samples = 64;
  bool widen = false;
  CLI::App* analyze = app.add_subcommand("analyze", "Cluster and pair diagnostics for a run");
  analyze->add_option("trace", trace_path, "Run directory or its trace.csv")->required();
  add_common(analyze);
  analyze->add_option("--samples", samples, "Sampled functionals per check");
  analyze->add_flag("--widen", widen, "Also test the functional over visited indices");

  std::string what;
  std::size_t budget = 1000;
  std::uint64_t check_seed = 1;
  CLI::App* check = app.add_subcommand("check", "Equivalence suites");
  check->add_option("what", what, "moreau|bridge|oracle|axioms")->required();
  check->add_option("--budget", budget, "Number of random cases");
  check->add_option("--seed", check_seed, "Seed");

  CLI::App* search = app.add_subcommand("search", "Generate, run and analyze an instance family");
  search->add_option("--config", config, "Search config (JSON); defaults to the standard suite");
  add_common(search);
  search->add_option("--max-iter", o.max_iter, "Iteration cap");
  search->add_option("--tol", o.tol, "Stop once the norm is at most this");
  search->add_option("--jobs", o.jobs, "Concurrent runs");
  search->add_flag("--no-validate", o.no_validate, "Load instances as written");

  fs::path gen_out = "data/standard_suite";
  std::vector<std::string> classes;
  std::uint64_t first = 1;
  std::uint64_t last = 50;
  CLI::App* generate = app.add_subcommand("generate", "Write the standard suite as JSON files");
  generate->add_option("--out", gen_out, "Target directory");
  generate->add_option("--class", classes, "Restrict to these classes");
  generate->add_option("--first", first, "First seed");
  generate->add_option("--last", last, "Last seed");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  if (*run) return cmd_run(config, o, out, err);
  if (*analyze) return cmd_analyze(trace_path, o, samples, widen, out, err);
  if (*check) return cmd_check(what, budget, check_seed, out, err);
  if (*search) return cmd_search(config, o, out, err);
  if (*generate) return cmd_generate(gen_out, classes, first, last, out, err);
  return kExitInvalid;
}

}  // namespace altproj::cli
