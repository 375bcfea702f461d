#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "altproj/analysis.hpp"
#include "altproj/engine.hpp"
#include "altproj/instances.hpp"

namespace altproj::io {

using nlohmann::json;

/// Shortest decimal that reads back to the same double (at most 17 digits).
std::string format_double(double v);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);
/// Matrices are lists of column vectors.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, Eigen::Index rows = -1);

json to_json(const ConvexSet& set);
/// Sets are parsed without validation; call validate() on the result.
ConvexSet set_from_json(const json& j);

json to_json(const Dictionary& dict);
/// `cones` resolves {"cone_ref": i} entries.
Dictionary dictionary_from_json(const json& j, const json& cones = json::array(),
                                bool validated = true);

/// Index lists are 1-based in JSON.
json to_json(const ScheduleSpec& spec);
ScheduleSpec schedule_from_json(const json& j, int count);

json to_json(const StopRule& rule);
StopRule stop_rule_from_json(const json& j, StopRule base = {});

json to_json(const InstanceSpec& instance);
/// With `validated` false the sets and dictionaries are taken as written.
InstanceSpec instance_from_json(const json& j, bool validated = true);

InstanceSpec read_instance(const std::filesystem::path& path, bool validated = true);
void write_instance(const InstanceSpec& instance, const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);
void write_json(const json& j, const std::filesystem::path& path);

/// n,index,norm,step_norm,coefficient[,dist_1..dist_K]; index is 1-based.
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
/// n,index,x_1..x_d for every stored iterate.
void write_iterates_csv(const Trace& trace, const std::filesystem::path& path);
json trace_metadata(const Trace& trace, const InstanceSpec& instance, const StopRule& stop,
                    const TraceOptions& options);

struct LoadedRun {
  Trace trace;
  InstanceSpec instance;
  json metadata;
};

/// Reads trace.csv, iterates.csv and metadata.json back from a run directory.
LoadedRun read_run(const std::filesystem::path& dir);

json to_json(const ClusterPoint& c);
json to_json(const PairReport& report);
json to_json(const LimitReport& report);

}  // namespace altproj::io
