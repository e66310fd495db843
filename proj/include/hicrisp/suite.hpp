#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hicrisp/domain_loader.hpp"
#include "hicrisp/engine.hpp"
#include "hicrisp/metrics.hpp"

namespace hicrisp {

struct RunOutput {
  RunResult result;
  RunMetrics metrics;
};

// Executes one scenario end to end: builds the environment and planner,
// stamps the trace header so the run can be replayed, runs the task and
// computes metrics. `planner_kind` is oracle, scripted or remote.
RunOutput run_scenario(const Scenario& scenario, const std::string& source_path,
                       const std::string& planner_kind,
                       const std::string& remote_endpoint,
                       const std::string& remote_token, ExecutorConfig config,
                       Trace& trace);

const Task& select_task(const Scenario& scenario);

ExecutorConfig arm_config(const std::string& arm, int threshold,
                          std::uint64_t seed);

struct SuiteTask {
  std::string label;
  std::string scenario_path;  // resolved against the suite file's directory
};

struct SuiteConfig {
  std::vector<SuiteTask> tasks;
  std::vector<std::string> arms;  // full, no_llf, no_correction
  int iterations = 1;
  std::uint64_t base_seed = 0;
  std::string out_dir;  // when set, per-cell traces are written here
  std::string planner = "oracle";
  int threshold = 5;
  int jobs = 1;
};

SuiteConfig load_suite_config(const std::filesystem::path& file);

struct CellResult {
  std::string task_label;
  std::string arm;
  std::vector<RunMetrics> runs;  // one per iteration; empty when errored
  std::string error;

  bool operator==(const CellResult&) const;
};

struct SuiteReport {
  std::vector<CellResult> cells;

  nlohmann::json to_json() const;
  static SuiteReport from_json(const nlohmann::json& j);
  // Human-readable aligned table: task x arm with SR/Exec mean +/- std.
  std::string table() const;

  bool operator==(const SuiteReport&) const = default;
};

// Every (task, arm, iteration) cell runs with seed = base_seed + iteration;
// per-cell failures are recorded in the report, never abort the suite.
SuiteReport run_suite(const SuiteConfig& config,
                      const std::filesystem::path& base_dir);

}  // namespace hicrisp
