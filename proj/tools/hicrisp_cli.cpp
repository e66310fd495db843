#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hicrisp/suite.hpp"

namespace {

using namespace hicrisp;

struct PlannerChoice {
  std::string kind = "oracle";
  std::string endpoint;
};

PlannerChoice parse_planner(const std::string& value) {
  PlannerChoice p;
  if (value == "oracle" || value == "scripted") {
    p.kind = value;
  } else if (value.rfind("remote=", 0) == 0) {
    p.kind = "remote";
    p.endpoint = value.substr(7);
    if (p.endpoint.empty())
      throw CLI::ValidationError("--planner", "remote requires a url: remote=<url>");
  } else {
    throw CLI::ValidationError("--planner",
                               "expected oracle, scripted or remote=<url>");
  }
  return p;
}

int cmd_run(const std::string& scenario_path, const std::string& domain_path,
            const std::string& task_id, const std::string& planner_value,
            std::uint64_t seed, int threshold, bool no_correction, bool no_llf,
            const std::string& on_exhaustion, const std::string& trace_out) {
  Scenario scenario;
  std::string source;
  if (!scenario_path.empty()) {
    scenario = load_scenario(scenario_path);
    source = scenario_path;
  } else if (!domain_path.empty()) {
    scenario = load_scenario(domain_path);
    source = domain_path;
  } else {
    std::cerr << "error: run needs --scenario or --domain\n";
    return 1;
  }
  if (!task_id.empty()) scenario.task_id = task_id;

  auto validation = validate_domain(scenario.domain);
  for (const auto& w : validation.warnings)
    std::cerr << "warning: " << w << '\n';
  if (!validation.ok()) {
    for (const auto& e : validation.errors) std::cerr << "error: " << e << '\n';
    return 1;
  }

  PlannerChoice planner = parse_planner(planner_value);
  ExecutorConfig cfg;
  cfg.seed = seed;
  cfg.threshold = threshold;
  cfg.correction_enabled = !no_correction;
  cfg.low_level_feedback_enabled = !no_llf;
  cfg.on_exhaustion = on_exhaustion == "skip" ? OnExhaustion::skip_step
                                              : OnExhaustion::abort_task;

  const char* token = std::getenv("HICRISP_REMOTE_TOKEN");
  Trace trace;
  auto out = run_scenario(scenario, source, planner.kind, planner.endpoint,
                          token ? token : "", cfg, trace);
  if (!trace_out.empty()) trace.write_to(trace_out);

  // Remote infrastructure failures are operational errors, not task failures.
  for (const auto& e : trace.events())
    if (e.kind == EventKind::plan_invalid) {
      std::string k = e.payload.value("error_kind", "");
      if (k == "transport" || k == "timeout") {
        std::cerr << "error: " << e.payload.value("error", "") << '\n';
        return 1;
      }
    }

  std::cout << "task:      " << select_task(scenario).text << '\n'
            << "SR:        " << out.metrics.sr << '\n'
            << "Exec:      " << out.metrics.exec << '\n'
            << "|motions|: " << out.metrics.motions << '\n'
            << "|cues|:    " << out.metrics.cues << '\n'
            << "hash:      " << trace.determinism_hash() << '\n';
  return out.metrics.sr == 1 ? 0 : 2;
}

int cmd_bench(const std::string& suite_path, const std::string& report_out,
              int jobs) {
  SuiteConfig cfg = load_suite_config(suite_path);
  if (cfg.tasks.empty()) {
    std::cerr << "error: no tasks in suite config\n";
    return 1;
  }
  if (jobs > 0) cfg.jobs = jobs;
  auto report =
      run_suite(cfg, std::filesystem::path(suite_path).parent_path());
  std::cout << report.table();
  if (!report_out.empty()) {
    std::ofstream out(report_out);
    out << report.to_json().dump(2) << '\n';
  }
  for (const auto& c : report.cells)
    if (!c.error.empty())
      std::cerr << "cell error [" << c.task_label << " / " << c.arm
                << "]: " << c.error << '\n';
  return 0;
}

int cmd_replay(const std::string& trace_path) {
  Trace stored;
  try {
    stored = Trace::read_from(trace_path);
    if (!stored.complete())
      throw IncompleteTrace("trace truncated: no task_end event");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  if (stored.stored_hash() != 0 &&
      stored.stored_hash() != stored.determinism_hash()) {
    std::cerr << "hash mismatch: file contents do not match recorded hash\n";
    return 3;
  }

  const auto& h = stored.header();
  std::string scenario_path = h.value("scenario", "");
  ExecutorConfig cfg;
  cfg.seed = h.value("seed", 0ull);
  cfg.threshold = h.value("threshold", 5);
  cfg.correction_enabled = h.value("correction_enabled", true);
  cfg.low_level_feedback_enabled = h.value("low_level_feedback_enabled", true);
  cfg.on_exhaustion = h.value("on_exhaustion", "abort_task") == "skip_step"
                          ? OnExhaustion::skip_step
                          : OnExhaustion::abort_task;

  Scenario scenario = load_scenario(scenario_path);
  if (h.contains("task")) scenario.task_id = h["task"].get<std::string>();
  Trace fresh;
  run_scenario(scenario, scenario_path, h.value("planner", "oracle"), "", "",
               cfg, fresh);

  std::cout << "recorded hash: " << stored.determinism_hash() << '\n'
            << "replayed hash: " << fresh.determinism_hash() << '\n';
  if (stored.determinism_hash() != fresh.determinism_hash()) {
    std::cerr << "hash mismatch: re-execution diverged\n";
    return 3;
  }
  std::cout << "replay OK\n";
  return 0;
}

int cmd_validate(const std::string& path) {
  Scenario scenario = load_scenario(path);
  auto report = validate_domain(scenario.domain);
  for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  for (const auto& e : report.errors) std::cout << "error: " << e << '\n';
  if (report.ok()) {
    std::cout << "domain " << scenario.domain.name << " OK ("
              << scenario.domain.primitives.size() << " primitives, "
              << scenario.domain.actions.size() << " actions, "
              << scenario.domain.tasks.size() << " tasks)\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hicrisp - hierarchical closed-loop task execution engine"};
  app.require_subcommand(1);

  std::string scenario_path, domain_path, task_id, trace_out;
  std::string planner_value = "oracle";
  std::string on_exhaustion = "abort";
  std::uint64_t seed = 0;
  int threshold = 5;
  bool no_correction = false, no_llf = false;

  auto* run = app.add_subcommand("run", "execute a single task");
  run->add_option("--scenario", scenario_path, "scenario file (domain + faults + script)");
  run->add_option("--domain", domain_path, "bare domain file (fault-free)");
  run->add_option("--task", task_id, "task id within the domain");
  run->add_option("--planner", planner_value, "oracle | scripted | remote=<url>");
  run->add_option("--seed", seed, "rng seed (default 0, never wall-clock)");
  run->add_option("--threshold", threshold, "correction threshold")
      ->check(CLI::PositiveNumber);
  run->add_flag("--no-correction", no_correction, "disable the correction loop");
  run->add_flag("--no-llf", no_llf, "disable low-level feedback");
  run->add_option("--on-exhaustion", on_exhaustion, "abort | skip")
      ->check(CLI::IsMember({"abort", "skip"}));
  run->add_option("--trace-out", trace_out, "trace file to write");

  std::string suite_path, report_out;
  int jobs = 0;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  bench->add_option("--suite", suite_path, "suite config file")->required();
  bench->add_option("--report-out", report_out, "machine-readable report path");
  bench->add_option("--jobs", jobs, "parallel cells (default 1)");

  std::string trace_path;
  auto* replay = app.add_subcommand("replay", "verify a recorded trace");
  replay->add_option("trace", trace_path, "trace file")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-domain", "check a domain/scenario file");
  validate->add_option("file", validate_path, "domain or scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario_path, domain_path, task_id, planner_value, seed,
                     threshold, no_correction, no_llf, on_exhaustion, trace_out);
    if (bench->parsed()) return cmd_bench(suite_path, report_out, jobs);
    if (replay->parsed()) return cmd_replay(trace_path);
    if (validate->parsed()) return cmd_validate(validate_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
