#include "altproj/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "altproj/error.hpp"
#include "altproj/rng.hpp"

namespace altproj::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string label_of(const json& j) { return j.contains("label") ? j.at("label").get<std::string>() : ""; }

double number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) parse_error("expected a number, got " + j.dump());
  return j.get<double>();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    parse_error("bad numeric cell '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return out;
}

std::string_view mode_name(Mode m) { return to_string(m); }

Mode mode_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "projection") return Mode::Projection;
  if (s == "greedy") return Mode::Greedy;
  parse_error("mode must be \"projection\" or \"greedy\", got \"" + s + "\"");
}

StopReason stop_reason_from(const std::string& s) {
  for (auto r : {StopReason::NormTolerance, StopReason::Stagnation, StopReason::MaxIterations,
                 StopReason::ScheduleExhausted}) {
    if (to_string(r) == s) return r;
  }
  parse_error("unknown stop reason '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) parse_error("expected an array of numbers, got " + j.dump());
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i]);
  return v;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(vector_to_json(m.col(c)));
  return out;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows) {
  if (!j.is_array()) parse_error("expected a list of vectors");
  if (j.empty()) return Matrix(std::max<Eigen::Index>(rows, 0), 0);
  const auto d = static_cast<Eigen::Index>(j.front().size());
  if (rows >= 0 && d != rows) parse_error("vector length differs from dim");
  Matrix m(d, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const Vector v = vector_from_json(j[c]);
    if (v.size() != d) parse_error("vectors in a list differ in length");
    m.col(static_cast<Eigen::Index>(c)) = v;
  }
  return m;
}

json to_json(const ConvexSet& set) {
  json out;
  out["kind"] = set.kind_name();
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LinearSubspace>) {
          out["basis"] = matrix_to_json(k.basis);
        } else if constexpr (std::is_same_v<T, AffineSubspace>) {
          out["basis"] = matrix_to_json(k.basis);
          out["offset"] = vector_to_json(k.offset);
        } else if constexpr (std::is_same_v<T, HalfSpace>) {
          out["normal"] = vector_to_json(k.normal);
          out["offset"] = k.offset;
        } else if constexpr (std::is_same_v<T, Ball>) {
          out["center"] = vector_to_json(k.center);
          out["radius"] = k.radius;
        } else if constexpr (std::is_same_v<T, GeneratedCone>) {
          out["generators"] = matrix_to_json(k.generators);
        } else {
          out["normals"] = matrix_to_json(k.normals);
        }
      },
      set.kind());
  if (set.kind_name() == "subspace" || set.kind_name() == "affine") out["dim"] = set.dim();
  if (!set.label().empty()) out["label"] = set.label();
  return out;
}

ConvexSet set_from_json(const json& j) {
  const auto kind = field(j, "kind").get<std::string>();
  const std::string label = label_of(j);
  const Eigen::Index rows = j.contains("dim") ? j.at("dim").get<Eigen::Index>() : -1;
  if (kind == "subspace") {
    return {LinearSubspace{matrix_from_json(field(j, "basis"), rows)}, label};
  }
  if (kind == "affine") {
    return {AffineSubspace{matrix_from_json(field(j, "basis"), rows),
                           vector_from_json(field(j, "offset"))},
            label};
  }
  if (kind == "halfspace") {
    return {HalfSpace{vector_from_json(field(j, "normal")), number(field(j, "offset"))}, label};
  }
  if (kind == "ball") {
    return {Ball{vector_from_json(field(j, "center")), number(field(j, "radius"))}, label};
  }
  if (kind == "generated_cone") return {GeneratedCone{matrix_from_json(field(j, "generators"))}, label};
  if (kind == "halfspace_cone") return {HalfspaceCone{matrix_from_json(field(j, "normals"))}, label};
  throw Error(ErrorCode::UnsupportedSet, "unknown set kind '" + kind + "'");
}

json to_json(const Dictionary& dict) {
  json out;
  if (const auto* f = dict.as<FiniteDictionary>()) {
    out["kind"] = "finite";
    out["atoms"] = matrix_to_json(f->atoms);
  } else {
    out["kind"] = "cone_section";
    out["cone"] = to_json(dict.as<ConeSection>()->cone);
  }
  if (!dict.label().empty()) out["label"] = dict.label();
  return out;
}

Dictionary dictionary_from_json(const json& j, const json& cones, bool validated) {
  const auto kind = field(j, "kind").get<std::string>();
  const std::string label = label_of(j);
  std::optional<Dictionary> d;
  if (kind == "finite") {
    d.emplace(FiniteDictionary{matrix_from_json(field(j, "atoms"))}, label);
  } else if (kind == "cone_section") {
    if (j.contains("cone_ref")) {
      const auto ref = j.at("cone_ref").get<std::size_t>();
      if (ref >= cones.size()) parse_error("cone_ref " + std::to_string(ref) + " out of range");
      d.emplace(ConeSection{set_from_json(cones[ref])}, label);
    } else {
      d.emplace(ConeSection{set_from_json(field(j, "cone"))}, label);
    }
  } else {
    throw Error(ErrorCode::UnsupportedDictionary, "unknown dictionary kind '" + kind + "'");
  }
  if (validated) validate(*d);
  return std::move(*d);
}

json to_json(const ScheduleSpec& spec) {
  json out{{"kind", to_string(spec.kind)}, {"K", spec.count}};
  if (spec.kind == ScheduleKind::SeededRandom) out["seed"] = spec.seed;
  if (spec.kind == ScheduleKind::Custom) {
    json list = json::array();
    for (int i : spec.list) list.push_back(i + 1);
    out["list"] = list;
    out["wrap"] = spec.wrap;
  }
  return out;
}

ScheduleSpec schedule_from_json(const json& j, int count) {
  const int k = j.contains("K") ? j.at("K").get<int>() : count;
  const auto kind = j.contains("kind") ? j.at("kind").get<std::string>() : std::string("cyclic");
  if (kind == "cyclic") return ScheduleSpec::cyclic(k);
  if (kind == "random") {
    return ScheduleSpec::seeded_random(k, j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0);
  }
  if (kind == "custom") {
    std::vector<int> list;
    for (const auto& v : field(j, "list")) list.push_back(v.get<int>() - 1);
    return ScheduleSpec::custom(std::move(list), k, j.value("wrap", true));
  }
  parse_error("unknown schedule kind '" + kind + "'");
}

json to_json(const StopRule& rule) {
  return {{"max_iters", rule.max_iters},
          {"norm_tol", rule.norm_tol},
          {"stagnation_window", rule.stagnation_window},
          {"stagnation_eps", rule.stagnation_eps}};
}

StopRule stop_rule_from_json(const json& j, StopRule base) {
  if (j.contains("max_iters")) base.max_iters = j.at("max_iters").get<std::size_t>();
  if (j.contains("norm_tol")) base.norm_tol = number(j.at("norm_tol"));
  if (j.contains("stagnation_window")) {
    base.stagnation_window = j.at("stagnation_window").get<std::size_t>();
  }
  if (j.contains("stagnation_eps")) base.stagnation_eps = number(j.at("stagnation_eps"));
  return base;
}

json to_json(const InstanceSpec& inst) {
  json out;
  if (!inst.id.empty()) out["id"] = inst.id;
  out["dim"] = inst.dim;
  out["mode"] = mode_name(inst.mode);
  if (inst.mode == Mode::Projection) {
    out["sets"] = json::array();
    for (const auto& s : inst.sets) out["sets"].push_back(to_json(s));
  } else {
    out["dictionaries"] = json::array();
    for (const auto& d : inst.dictionaries) out["dictionaries"].push_back(to_json(d));
  }
  out["certificate"] = to_string(inst.certificate);
  out["seed"] = inst.seed;
  if (inst.schedule) out["schedule"] = to_json(*inst.schedule);
  if (inst.x0) out["x0"] = vector_to_json(*inst.x0);
  if (inst.separation) out["separation"] = number_or_null(*inst.separation);
  return out;
}

InstanceSpec instance_from_json(const json& j, bool validated) {
  InstanceSpec inst;
  inst.id = j.value("id", std::string{});
  inst.dim = field(j, "dim").get<Eigen::Index>();
  inst.mode = mode_from(field(j, "mode"));
  if (j.contains("certificate")) {
    inst.certificate = certificate_from_string(j.at("certificate").get<std::string>());
  }
  inst.seed = j.value("seed", std::uint64_t{0});
  const json cones = j.value("cones", json::array());
  if (inst.mode == Mode::Projection) {
    for (const auto& s : field(j, "sets")) {
      json copy = s;
      if (!copy.contains("dim")) copy["dim"] = inst.dim;
      inst.sets.push_back(set_from_json(copy));
    }
  } else {
    for (const auto& d : field(j, "dictionaries")) {
      inst.dictionaries.push_back(dictionary_from_json(d, cones, false));
    }
  }
  if (j.contains("schedule")) inst.schedule = schedule_from_json(j.at("schedule"), inst.count());
  if (j.contains("x0")) inst.x0 = vector_from_json(j.at("x0"));
  if (j.contains("separation") && !j.at("separation").is_null()) {
    inst.separation = number(j.at("separation"));
  }
  if (validated) {
    validate(inst);
  } else if (inst.count() < 2) {
    throw Error(ErrorCode::InstanceInvalid, "need K >= 2, got " + std::to_string(inst.count()));
  }
  return inst;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

InstanceSpec read_instance(const fs::path& path, bool validated) {
  try {
    return instance_from_json(read_json(path), validated);
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

void write_instance(const InstanceSpec& instance, const fs::path& path) {
  write_json(to_json(instance), path);
}

void write_trace_csv(const Trace& trace, const fs::path& path) {
  auto out = open_out(path);
  out << "n,index,norm,step_norm,coefficient";
  const bool dists = trace.has_distances();
  if (dists) {
    for (int k = 1; k <= trace.set_count; ++k) out << ",dist_" << k;
  }
  out << '\n';
  out << "0,," << format_double(trace.initial_norm()) << ",,";
  if (dists) {
    for (int k = 0; k < trace.set_count; ++k) out << ',';
  }
  out << '\n';
  const auto k = static_cast<std::size_t>(trace.set_count);
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const auto& rec = trace.records[r];
    out << rec.n << ',' << rec.index + 1 << ',' << format_double(rec.norm) << ','
        << format_double(rec.step_norm) << ',';
    if (!std::isnan(rec.coefficient)) out << format_double(rec.coefficient);
    if (dists) {
      for (std::size_t c = 0; c < k; ++c) out << ',' << format_double(trace.distances[r * k + c]);
    }
    out << '\n';
  }
}

void write_iterates_csv(const Trace& trace, const fs::path& path) {
  auto out = open_out(path);
  out << "n,index";
  for (Eigen::Index i = 1; i <= trace.x0.size(); ++i) out << ",x_" << i;
  out << '\n';
  for (const auto& it : trace.iterates) {
    out << it.n << ',';
    if (it.index >= 0) out << it.index + 1;
    for (Eigen::Index i = 0; i < it.x.size(); ++i) out << ',' << format_double(it.x[i]);
    out << '\n';
  }
}

json trace_metadata(const Trace& trace, const InstanceSpec& instance, const StopRule& stop,
                    const TraceOptions& options) {
  json violations = json::array();
  for (const auto& v : trace.violations) {
    violations.push_back({{"n", v.n}, {"check", v.check}, {"residual", number_or_null(v.residual)}});
  }
  return {
      {"instance", to_json(instance)},
      {"mode", mode_name(trace.mode)},
      {"K", trace.set_count},
      {"schedule", to_json(trace.schedule)},
      {"seed", trace.schedule.seed},
      {"rng", Rng::kGeneratorName},
      {"stop_rule", to_json(stop)},
      {"trace_options",
       {{"thinning", options.thinning},
        {"tail", options.tail},
        {"record_distances", options.record_distances},
        {"checked", options.checked}}},
      {"x0", vector_to_json(trace.x0)},
      {"steps", trace.steps()},
      {"stop_reason", to_string(trace.stop_reason)},
      {"initial_norm", trace.initial_norm()},
      {"final_norm", trace.final_norm()},
      {"R_est", trace.r_estimate()},
      {"tail_start", trace.tail_start},
      {"max_decay_slack", number_or_null(trace.max_decay_slack)},
      {"max_abs_identity_residual", trace.max_abs_identity_residual},
      {"violations", violations},
  };
}

LoadedRun read_run(const fs::path& dir) {
  LoadedRun run;
  run.metadata = read_json(dir / "metadata.json");
  const json& meta = run.metadata;
  try {
    run.instance = instance_from_json(field(meta, "instance"), false);
    Trace& t = run.trace;
    t.mode = mode_from(field(meta, "mode"));
    t.set_count = field(meta, "K").get<int>();
    t.schedule = schedule_from_json(field(meta, "schedule"), t.set_count);
    t.x0 = vector_from_json(field(meta, "x0"));
    t.stop_reason = stop_reason_from(field(meta, "stop_reason").get<std::string>());
    t.tail_start = field(meta, "tail_start").get<std::size_t>();
    t.max_decay_slack = number(field(meta, "max_decay_slack"));
    t.max_abs_identity_residual = number(field(meta, "max_abs_identity_residual"));
    for (const auto& v : field(meta, "violations")) {
      t.violations.push_back({v.at("n").get<std::size_t>(), v.at("check").get<std::string>(),
                              number(v.at("residual"))});
    }
  } catch (const json::exception& e) {
    parse_error("metadata.json: " + std::string(e.what()));
  }

  std::ifstream trace_in(dir / "trace.csv");
  if (!trace_in) throw Error(ErrorCode::InvalidArgument, "cannot open " + (dir / "trace.csv").string());
  std::string line;
  std::getline(trace_in, line);
  const auto k = static_cast<std::size_t>(run.trace.set_count);
  const bool dists = split_csv(line).size() > 5;
  while (std::getline(trace_in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 5) parse_error("short row in trace.csv: " + line);
    if (cells[0] == "0") continue;
    StepRecord rec;
    rec.n = std::stoull(cells[0]);
    rec.index = std::stoi(cells[1]) - 1;
    rec.norm = parse_cell(cells[2]);
    rec.step_norm = parse_cell(cells[3]);
    rec.coefficient = parse_cell(cells[4]);
    run.trace.records.push_back(rec);
    if (dists) {
      for (std::size_t c = 0; c < k; ++c) run.trace.distances.push_back(parse_cell(cells.at(5 + c)));
    }
  }

  std::ifstream it_in(dir / "iterates.csv");
  if (!it_in) throw Error(ErrorCode::InvalidArgument, "cannot open " + (dir / "iterates.csv").string());
  std::getline(it_in, line);
  while (std::getline(it_in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    Iterate it;
    it.n = std::stoull(cells.at(0));
    it.index = cells.at(1).empty() ? -1 : std::stoi(cells[1]) - 1;
    it.x.resize(static_cast<Eigen::Index>(cells.size() - 2));
    for (std::size_t c = 2; c < cells.size(); ++c) it.x[static_cast<Eigen::Index>(c - 2)] = parse_cell(cells[c]);
    run.trace.iterates.push_back(std::move(it));
  }
  return run;
}

json to_json(const ClusterPoint& c) {
  json support = json::array();
  for (auto n : c.support) support.push_back(n);
  return {{"w", vector_to_json(c.w)},
          {"norm", c.w.norm()},
          {"radius", c.radius},
          {"support_size", c.support.size()},
          {"support", support}};
}

namespace {

json jset_json(const JSet& j) {
  json members = json::array();
  for (int m : j.members) members.push_back(m + 1);
  return {{"members", members}, {"tol", j.tol}};
}

}  // namespace

json to_json(const PairReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"residual", number_or_null(c.residual)},
                      {"tolerance", c.tolerance}});
  }
  json segs = json::array();
  for (const auto& [n, m] : r.segments) segs.push_back({n, m});
  return {{"statement", r.statement},
          {"w_norm", r.first.w.norm()},
          {"w_prime_norm", r.second.w.norm()},
          {"J_w", jset_json(r.j_first)},
          {"J_w_prime", jset_json(r.j_second)},
          {"segments", segs},
          {"degenerate", r.degenerate},
          {"tolerance", r.tolerance},
          {"all_passed", r.all_passed()},
          {"checks", checks}};
}

json to_json(const LimitReport& r) {
  json clusters = json::array();
  for (std::size_t c = 0; c < r.clusters.size(); ++c) {
    json cj = to_json(r.clusters[c]);
    if (c < r.jsets.size()) cj["J"] = jset_json(r.jsets[c]);
    clusters.push_back(std::move(cj));
  }
  json pairs = json::array();
  for (const auto& p : r.pairs) pairs.push_back(to_json(p));
  json candidates = json::array();
  for (const auto& c : r.candidates) {
    json cj{{"kind", c.kind}, {"cluster", c.cluster}, {"norm", c.norm}};
    if (c.partner) cj["partner"] = *c.partner;
    candidates.push_back(std::move(cj));
  }
  return {{"status", "diagnostic"},
          {"eps", r.eps},
          {"final_norm", r.final_norm},
          {"R_est", r.r_estimate},
          {"cluster_count", r.clusters.size()},
          {"clusters", clusters},
          {"pairs", pairs},
          {"notes", r.notes},
          {"counterexample_candidates", candidates}};
}

}  // namespace altproj::io
