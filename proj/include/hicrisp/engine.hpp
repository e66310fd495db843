#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hicrisp/environment.hpp"
#include "hicrisp/planner.hpp"
#include "hicrisp/trace.hpp"
#include "hicrisp/world.hpp"

namespace hicrisp {

struct CorrectionFrame {
  SemanticAction action;
  std::string info;  // error cause, non-empty
  FaultLevel level = FaultLevel::high;
  int attempt_count = 1;
};

struct StackEmpty : std::logic_error {
  using std::logic_error::logic_error;
};
struct StackExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bounded LIFO of (action, error cause) frames. Capacity equals the
// correction threshold; push past capacity signals exhaustion.
class CorrectionStack {
 public:
  explicit CorrectionStack(int threshold);

  void push(CorrectionFrame frame);
  CorrectionFrame pop();
  const CorrectionFrame& top() const;
  // Replaces the top frame's cause, keeping its action; bumps attempt_count.
  void update(std::string info);
  int depth() const { return static_cast<int>(frames_.size()); }
  int threshold() const { return threshold_; }

  // (action, info) pairs bottom-up, for prompt assembly.
  std::vector<std::pair<std::string, std::string>> history() const;

 private:
  std::vector<CorrectionFrame> frames_;  // back = top
  int threshold_;
};

enum class OnExhaustion { abort_task, skip_step };

struct ExecutorConfig {
  int threshold = 5;
  bool correction_enabled = true;
  bool low_level_feedback_enabled = true;
  OnExhaustion on_exhaustion = OnExhaustion::abort_task;
  std::uint64_t seed = 0;
};

enum class StepStatus { success, corrected, exhausted, skipped };

struct StepOutcome {
  StepStatus status = StepStatus::success;
  int corrections_used = 0;
  int cues_used = 0;
};

struct RunResult {
  bool goal_satisfied = false;
  std::vector<StepOutcome> steps;
};

// The closed-loop executor: per-action predefined checking, execution,
// perception against the expected successor, and the bounded stack-based
// correction loop.
class Executor {
 public:
  Executor(Environment& env, Planner& planner, ExecutorConfig config,
           Trace& trace);

  RunResult run_task(const Task& task);

 private:
  struct ActionResult {
    PerceptionReport report;
    FaultLevel level = FaultLevel::high;  // classification of the failure
  };

  ActionResult execute_action(const SemanticAction& action, int step,
                              const std::string& role);
  StepOutcome correction_loop(const SemanticAction& failed_action,
                              const std::string& info, FaultLevel level,
                              int step);
  // True when the stack emptied; false = stalled with the top cause updated.
  bool retry_chain(CorrectionStack& stack, int step);

  bool run_fix(const CheckRule& rule, int step);
  ExecContext next_context(int step, const std::string& primitive);

  Environment& env_;
  Planner& planner_;
  ExecutorConfig config_;
  Trace& trace_;
  const Task* task_ = nullptr;
  std::map<std::string, int> attempts_;  // per-step primitive attempt counts
};

nlohmann::json facts_json(const SymbolicState& state);
std::string to_string(StepStatus s);

}  // namespace hicrisp
