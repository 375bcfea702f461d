#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "altproj/analysis.hpp"
#include "altproj/engine.hpp"
#include "altproj/instances.hpp"

namespace altproj::cli {

namespace fs = std::filesystem;

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFlagged = 1;  // checked-mode violation, failed check, or candidate
inline constexpr int kExitInvalid = 2;

struct RunConfig {
  InstanceSpec instance;
  ScheduleSpec schedule;
  StopRule stop;
  TraceOptions trace;
  fs::path out_dir = "out";
  double eps = 1e-3;
};

/// Command-line overrides applied on top of a config file.
struct Overrides {
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iter;
  std::optional<double> tol;
  std::optional<double> eps;
  std::optional<std::size_t> jobs;
  bool checked = false;
  bool no_validate = false;
};

/// Parses a run config; relative paths resolve against `base_dir`. Throws
/// Error naming the failing field.
RunConfig load_run_config(const nlohmann::json& j, const fs::path& base_dir,
                          const Overrides& overrides = {});

/// Runs the instance and writes trace.csv, iterates.csv and metadata.json.
Trace execute_run(const RunConfig& config);

struct SearchConfig {
  std::vector<InstanceSpec> instances;
  std::vector<std::string> schedules{"cyclic", "random"};
  std::size_t runs = 1;  // random schedule seeds per instance
  StopRule stop;
  double eps = 1e-3;
  std::size_t sample_count = 64;
  fs::path out_dir = "search_out";
  std::size_t jobs = 1;
};

SearchConfig load_search_config(const nlohmann::json& j, const fs::path& base_dir,
                                const Overrides& overrides = {});

struct SearchRow {
  std::string run_id;
  std::string instance_id;
  std::string schedule;
  double final_norm = 0.0;
  std::size_t steps = 0;
  std::string stop_reason;
  std::size_t clusters = 0;
  std::size_t candidates = 0;
  std::size_t violations = 0;
  std::string error;
};

std::vector<SearchRow> run_search(const SearchConfig& config);

/// Entry point; `args` includes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace altproj::cli
