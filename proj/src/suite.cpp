#include "hicrisp/suite.hpp"

#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "hicrisp/remote_planner.hpp"

namespace hicrisp {

const Task& select_task(const Scenario& scenario) {
  if (!scenario.task_id.empty()) {
    auto it = scenario.domain.tasks.find(scenario.task_id);
    if (it == scenario.domain.tasks.end())
      throw ConfigError("task not found in domain: " + scenario.task_id);
    return it->second;
  }
  if (scenario.domain.tasks.size() == 1)
    return scenario.domain.tasks.begin()->second;
  throw ConfigError("scenario names no task and the domain declares " +
                    std::to_string(scenario.domain.tasks.size()));
}

ExecutorConfig arm_config(const std::string& arm, int threshold,
                          std::uint64_t seed) {
  ExecutorConfig cfg;
  cfg.threshold = threshold;
  cfg.seed = seed;
  if (arm == "full") {
  } else if (arm == "no_llf") {
    cfg.low_level_feedback_enabled = false;
  } else if (arm == "no_correction") {
    cfg.correction_enabled = false;
  } else {
    throw ConfigError("unknown arm: " + arm);
  }
  return cfg;
}

RunOutput run_scenario(const Scenario& scenario, const std::string& source_path,
                       const std::string& planner_kind,
                       const std::string& remote_endpoint,
                       const std::string& remote_token, ExecutorConfig config,
                       Trace& trace) {
  const Task& task = select_task(scenario);

  std::unique_ptr<Planner> planner;
  if (planner_kind == "oracle") {
    planner = std::make_unique<OraclePlanner>(scenario.domain);
  } else if (planner_kind == "scripted") {
    planner = std::make_unique<ScriptedPlanner>(scenario.domain, scenario.script);
  } else if (planner_kind == "remote") {
    planner = std::make_unique<RemotePlanner>(scenario.domain, remote_endpoint,
                                              30.0, remote_token);
  } else {
    throw ConfigError("unknown planner kind: " + planner_kind);
  }

  nlohmann::json header;
  header["scenario"] = source_path;
  header["domain"] = scenario.domain_path;
  header["task"] = task.id;
  header["planner"] = planner_kind;
  header["seed"] = config.seed;
  header["threshold"] = config.threshold;
  header["correction_enabled"] = config.correction_enabled;
  header["low_level_feedback_enabled"] = config.low_level_feedback_enabled;
  header["on_exhaustion"] =
      config.on_exhaustion == OnExhaustion::abort_task ? "abort_task" : "skip_step";
  trace.set_header(header);

  Environment env(scenario.domain, scenario.faults, config.seed);
  Executor executor(env, *planner, config, trace);

  RunOutput out;
  out.result = executor.run_task(task);
  out.metrics = compute_metrics(trace, task.goal);
  return out;
}

SuiteConfig load_suite_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open suite config: " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  SuiteConfig cfg;
  for (const auto& t : doc.value("tasks", nlohmann::json::array())) {
    SuiteTask task;
    task.label = t.at("label").get<std::string>();
    task.scenario_path = t.at("scenario").get<std::string>();
    cfg.tasks.push_back(std::move(task));
  }
  for (const auto& a : doc.value("arms", nlohmann::json::array()))
    cfg.arms.push_back(a.get<std::string>());
  if (cfg.arms.empty()) cfg.arms = {"full"};
  cfg.iterations = doc.value("iterations", 1);
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");
  cfg.base_seed = doc.value("base_seed", 0ull);
  cfg.out_dir = doc.value("out_dir", "");
  cfg.planner = doc.value("planner", "oracle");
  cfg.threshold = doc.value("threshold", 5);
  cfg.jobs = doc.value("jobs", 1);
  return cfg;
}

bool CellResult::operator==(const CellResult& o) const {
  auto eq = [](const RunMetrics& a, const RunMetrics& b) {
    return a.sr == b.sr && a.exec == b.exec && a.motions == b.motions &&
           a.cues == b.cues;
  };
  if (task_label != o.task_label || arm != o.arm || error != o.error ||
      runs.size() != o.runs.size())
    return false;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (!eq(runs[i], o.runs[i])) return false;
  return true;
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json j;
  j["schema"] = "suite-report/1";
  auto arr = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json cell;
    cell["task"] = c.task_label;
    cell["arm"] = c.arm;
    cell["error"] = c.error;
    auto runs = nlohmann::json::array();
    for (const auto& r : c.runs)
      runs.push_back({{"sr", r.sr},
                      {"exec", r.exec},
                      {"motions", r.motions},
                      {"cues", r.cues}});
    cell["runs"] = runs;
    if (!c.runs.empty()) {
      std::vector<double> sr, ex;
      for (const auto& r : c.runs) {
        sr.push_back(r.sr);
        ex.push_back(r.exec);
      }
      auto [sr_m, sr_s] = aggregate(sr);
      auto [ex_m, ex_s] = aggregate(ex);
      cell["sr_mean"] = sr_m;
      cell["sr_std"] = sr_s;
      cell["exec_mean"] = ex_m;
      cell["exec_std"] = ex_s;
    }
    arr.push_back(cell);
  }
  j["cells"] = arr;
  return j;
}

SuiteReport SuiteReport::from_json(const nlohmann::json& j) {
  SuiteReport rep;
  for (const auto& cell : j.at("cells")) {
    CellResult c;
    c.task_label = cell.at("task").get<std::string>();
    c.arm = cell.at("arm").get<std::string>();
    c.error = cell.value("error", "");
    for (const auto& r : cell.value("runs", nlohmann::json::array())) {
      RunMetrics m;
      m.sr = r.at("sr").get<int>();
      m.exec = r.at("exec").get<double>();
      m.motions = r.at("motions").get<int>();
      m.cues = r.at("cues").get<int>();
      c.runs.push_back(m);
    }
    rep.cells.push_back(std::move(c));
  }
  return rep;
}

std::string SuiteReport::table() const {
  std::size_t width = 4;
  for (const auto& c : cells) width = std::max(width, c.task_label.size());

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width) + 2) << "task"
     << std::setw(15) << "arm" << std::setw(16) << "SR" << std::setw(16)
     << "Exec" << std::setw(10) << "|motions|" << std::setw(8) << "|cues|"
     << '\n';
  os << std::string(width + 2 + 15 + 16 + 16 + 10 + 8, '-') << '\n';
  for (const auto& c : cells) {
    os << std::left << std::setw(static_cast<int>(width) + 2) << c.task_label
       << std::setw(15) << c.arm;
    if (!c.error.empty()) {
      os << "ERROR: " << c.error << '\n';
      continue;
    }
    std::vector<double> sr, ex;
    double motions = 0, cues = 0;
    for (const auto& r : c.runs) {
      sr.push_back(r.sr);
      ex.push_back(r.exec);
      motions += r.motions;
      cues += r.cues;
    }
    auto [sr_m, sr_s] = aggregate(sr);
    auto [ex_m, ex_s] = aggregate(ex);
    std::ostringstream srs, exs;
    srs << std::fixed << std::setprecision(2) << sr_m << " +- " << sr_s;
    exs << std::fixed << std::setprecision(2) << ex_m << " +- " << ex_s;
    os << std::setw(16) << srs.str() << std::setw(16) << exs.str()
       << std::setw(10) << motions / c.runs.size() << std::setw(8)
       << cues / c.runs.size() << '\n';
  }
  return os.str();
}

SuiteReport run_suite(const SuiteConfig& config,
                      const std::filesystem::path& base_dir) {
  struct Cell {
    SuiteTask task;
    std::string arm;
  };
  std::vector<Cell> grid;
  for (const auto& t : config.tasks)
    for (const auto& arm : config.arms) grid.push_back({t, arm});

  if (!config.out_dir.empty())
    std::filesystem::create_directories(config.out_dir);

  auto run_cell = [&](const Cell& cell) {
    CellResult result;
    result.task_label = cell.task.label;
    result.arm = cell.arm;
    try {
      auto path = base_dir / cell.task.scenario_path;
      Scenario scenario = load_scenario(path);
      for (int it = 0; it < config.iterations; ++it) {
        ExecutorConfig cfg = arm_config(cell.arm, config.threshold,
                                        config.base_seed + it);
        Trace trace;
        // Fresh scenario copy per iteration: environments are single-owner.
        auto out = run_scenario(scenario, path.string(), config.planner, "",
                                "", cfg, trace);
        result.runs.push_back(out.metrics);
        if (!config.out_dir.empty()) {
          std::string stem = std::filesystem::path(cell.task.scenario_path)
                                 .stem()
                                 .string();
          trace.write_to(config.out_dir + "/" + stem + "_" + cell.arm + "_" +
                         std::to_string(it) + ".trace.jsonl");
        }
      }
    } catch (const std::exception& e) {
      result.runs.clear();
      result.error = e.what();
    }
    return result;
  };

  SuiteReport report;
  if (config.jobs > 1) {
    std::vector<std::future<CellResult>> futures;
    for (const auto& cell : grid)
      futures.push_back(std::async(std::launch::async, run_cell, cell));
    for (auto& f : futures) report.cells.push_back(f.get());
  } else {
    for (const auto& cell : grid) report.cells.push_back(run_cell(cell));
  }
  return report;
}

}  // namespace hicrisp
