#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "altproj/instances.hpp"
#include "altproj/io.hpp"
#include "altproj_cli/checks.hpp"
#include "altproj_cli/commands.hpp"
#include "support.hpp"

using namespace altproj;
using nlohmann::json;
using testing_support::cols;
using testing_support::scratch_dir;
using testing_support::vec;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "altproj");
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json lines_instance(const Vector& second, const Vector& x0) {
  InstanceSpec inst;
  inst.id = "lines";
  inst.dim = 2;
  inst.sets = {ConvexSet::subspace(cols({{1, 0}})), ConvexSet::subspace(second.normalized())};
  inst.x0 = x0;
  return io::to_json(inst);
}

std::filesystem::path write_config(const std::filesystem::path& dir, const json& j) {
  const auto p = dir / "config.json";
  io::write_json(j, p);
  return p;
}

json bad_greedy_instance() {
  return json::parse(R"({
    "id": "long-atoms", "dim": 2, "mode": "greedy",
    "dictionaries": [
      {"kind": "finite", "atoms": [[2, 0], [-2, 0]]},
      {"kind": "finite", "atoms": [[0, 2], [0, -2]]}
    ],
    "x0": [3, 4]
  })");
}

}  // namespace

TEST(Cli, RunConvergesAndWritesFiles) {
  const auto dir = scratch_dir("cli_run");
  const json cfg{{"instance", lines_instance(vec({1, 1}), vec({1, 1}))},
                 {"schedule", {{"kind", "cyclic"}}},
                 {"stop", {{"norm_tol", 1e-9}}},
                 {"out", (dir / "out").string()}};
  const Outcome r = invoke({"run", "--config", write_config(dir, cfg).string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "trace.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "iterates.csv"));
  const json meta = io::read_json(dir / "out" / "metadata.json");
  EXPECT_LE(meta["final_norm"].get<double>(), 1e-9);
  EXPECT_EQ(meta["stop_reason"], "norm_tol");

  const Outcome a = invoke({"analyze", (dir / "out").string()});
  EXPECT_EQ(a.code, cli::kExitOk) << a.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.json"));
}

TEST(Cli, RunOverridesApply) {
  const auto dir = scratch_dir("cli_override");
  const json cfg{{"instance", lines_instance(vec({1, 1}), vec({1, 1}))},
                 {"out", (dir / "a").string()}};
  const auto path = write_config(dir, cfg);
  const Outcome r = invoke({"run", "--config", path.string(), "--max-iter", "3", "--tol", "0", "--out",
                         (dir / "b").string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  const json meta = io::read_json(dir / "b" / "metadata.json");
  EXPECT_EQ(meta["steps"], 3);
  EXPECT_FALSE(std::filesystem::exists(dir / "a"));
}

TEST(Cli, InvalidInstanceExitsTwo) {
  const auto dir = scratch_dir("cli_invalid");
  json inst = lines_instance(vec({1, 1}), vec({1, 1}));
  inst["sets"].erase(1);
  const Outcome r = invoke({"run", "--config", write_config(dir, {{"instance", inst}}).string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("InstanceInvalid"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.find("InstanceInvalid: InstanceInvalid"), std::string::npos) << r.err;
}

TEST(Cli, MissingConfigAndBadFlagsExitTwo) {
  EXPECT_EQ(invoke({"run", "--config", "/nonexistent/config.json"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"run"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"check", "nonsense"}).code, cli::kExitInvalid);
}

TEST(Cli, CheckedRunFlagsBrokenDictionaries) {
  const auto dir = scratch_dir("cli_checked");
  const json cfg{{"instance", bad_greedy_instance()}, {"out", (dir / "out").string()}};
  const auto path = write_config(dir, cfg);
  EXPECT_EQ(invoke({"run", "--config", path.string()}).code, cli::kExitInvalid);
  const Outcome r = invoke({"run", "--config", path.string(), "--no-validate", "--checked"});
  EXPECT_EQ(r.code, cli::kExitFlagged);
  EXPECT_NE(r.err.find("violation"), std::string::npos);
}

TEST(Cli, ChecksPass) {
  for (const char* what : {"axioms", "moreau", "oracle", "bridge"}) {
    const Outcome r = invoke({"check", what, "--budget", "20"});
    EXPECT_EQ(r.code, cli::kExitOk) << what << r.out << r.err;
  }
}

TEST(Cli, SearchFlagsNonTrivialIntersection) {
  const auto dir = scratch_dir("cli_search_bad");
  const json cfg{{"family", nullptr},
                 {"instances", {lines_instance(vec({0.6, 0.8}), vec({1, 2}))}},
                 {"out", (dir / "out").string()}};
  // Replace the first line by the second so both sets coincide.
  json c = cfg;
  c["instances"][0]["sets"][0] = c["instances"][0]["sets"][1];
  const Outcome r = invoke({"search", "--config", write_config(dir, c).string()});
  EXPECT_EQ(r.code, cli::kExitFlagged) << r.out << r.err;
  EXPECT_NE(r.err.find("COUNTEREXAMPLE CANDIDATE"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "summary.csv"));
}

TEST(Cli, SearchOverSmallFamilyIsClean) {
  const auto dir = scratch_dir("cli_search_ok");
  const json cfg{{"family", {"subspaces", "symmetric_dictionaries"}},
                 {"seeds", {1, 4}},
                 {"runs", 2},
                 {"out", (dir / "out").string()}};
  const Outcome r = invoke({"search", "--config", write_config(dir, cfg).string(), "--jobs", "2"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  std::ifstream summary(dir / "out" / "summary.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(summary, line);) ++lines;
  // Header plus 8 instances x (1 cyclic + 2 random).
  EXPECT_EQ(lines, 1u + 8u * 3u);
}

TEST(Cli, GenerateWritesSuiteFiles) {
  const auto dir = scratch_dir("cli_generate");
  const Outcome r = invoke({"generate", "--out", dir.string(), "--class", "cones", "--first", "1",
                         "--last", "2"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "cones" / "cones-001.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "cones" / "cones-002.json"));
}
