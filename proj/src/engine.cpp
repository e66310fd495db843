#include "hicrisp/engine.hpp"

#include "hicrisp/remote_planner.hpp"

namespace hicrisp {

CorrectionStack::CorrectionStack(int threshold) : threshold_(threshold) {
  if (threshold < 1) throw std::invalid_argument("threshold must be >= 1");
}

void CorrectionStack::push(CorrectionFrame frame) {
  if (frame.info.empty()) throw std::invalid_argument("frame info must be non-empty");
  if (depth() >= threshold_)
    throw StackExhausted("correction stack at threshold " + std::to_string(threshold_));
  frames_.push_back(std::move(frame));
}

CorrectionFrame CorrectionStack::pop() {
  if (frames_.empty()) throw StackEmpty("pop on empty correction stack");
  CorrectionFrame f = std::move(frames_.back());
  frames_.pop_back();
  return f;
}

const CorrectionFrame& CorrectionStack::top() const {
  if (frames_.empty()) throw StackEmpty("top on empty correction stack");
  return frames_.back();
}

void CorrectionStack::update(std::string info) {
  if (frames_.empty()) throw StackEmpty("update on empty correction stack");
  if (info.empty()) throw std::invalid_argument("frame info must be non-empty");
  frames_.back().info = std::move(info);
  frames_.back().attempt_count += 1;
}

std::vector<std::pair<std::string, std::string>> CorrectionStack::history() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : frames_) out.emplace_back(f.action.str(), f.info);
  return out;
}

nlohmann::json facts_json(const SymbolicState& state) {
  auto arr = nlohmann::json::array();
  for (const auto& f : state.facts) arr.push_back(f.str());
  return arr;
}

std::string to_string(StepStatus s) {
  switch (s) {
    case StepStatus::success: return "success";
    case StepStatus::corrected: return "corrected";
    case StepStatus::exhausted: return "exhausted";
    case StepStatus::skipped: return "skipped";
  }
  return "unknown";
}

Executor::Executor(Environment& env, Planner& planner, ExecutorConfig config,
                   Trace& trace)
    : env_(env), planner_(planner), config_(config), trace_(trace) {
  if (config_.threshold < 1)
    throw std::invalid_argument("threshold must be >= 1");
}

ExecContext Executor::next_context(int step, const std::string& primitive) {
  return ExecContext{step, primitive, ++attempts_[primitive]};
}

bool Executor::run_fix(const CheckRule& rule, int step) {
  for (const auto& call : rule.fix) {
    auto prim = ground_primitive(env_.domain(), call.name, call.args);
    auto result = env_.execute_primitive(prim, next_context(step, prim.name));
    nlohmann::json payload;
    payload["primitive"] = prim.str();
    payload["ok"] = result.ok;
    if (result.fault) payload["fault"] = result.fault->message;
    if (result.path_length >= 0) payload["path_length"] = result.path_length;
    trace_.add(EventKind::predefined_fix, payload);
    if (!result.ok) return false;
  }
  return true;
}

namespace {

const CheckRule* find_check(const GroundPrimitive& prim, const std::string& message) {
  for (const auto& rule : prim.checks)
    if (message.find(rule.violation) != std::string::npos) return &rule;
  return nullptr;
}

std::string remote_error_kind(const PlannerError& e) {
  if (dynamic_cast<const RemoteTimeout*>(&e)) return "timeout";
  if (dynamic_cast<const RemoteSchemaViolation*>(&e)) return "schema_violation";
  if (dynamic_cast<const RemoteTransport*>(&e)) return "transport";
  if (dynamic_cast<const NoCorrectionRule*>(&e)) return "no_correction_rule";
  if (dynamic_cast<const NoPlanFound*>(&e)) return "no_plan_found";
  return "planner_error";
}

}  // namespace

Executor::ActionResult Executor::execute_action(const SemanticAction& action,
                                                int step,
                                                const std::string& role) {
  const Domain& domain = env_.domain();
  const SymbolicState entry = env_.state();

  std::string failure_msg;
  for (const auto& prim : ground_action(domain, action)) {
    bool fixed = false;
    while (true) {
      if (config_.low_level_feedback_enabled && !fixed) {
        auto violations = check_preconditions(domain, env_.state(), prim);
        if (!violations.empty()) {
          std::string msg = "precondition violated: expected " +
                            violations.front().str() + " to hold";
          if (const CheckRule* rule = find_check(prim, msg)) {
            if (!run_fix(*rule, step)) {
              failure_msg = msg;
              break;
            }
            fixed = true;
            continue;
          }
        }
      }

      auto result = env_.execute_primitive(prim, next_context(step, prim.name));
      nlohmann::json payload;
      payload["primitive"] = prim.str();
      payload["ok"] = result.ok;
      payload["origin"] = role;
      if (result.fault) payload["fault"] = result.fault->message;
      if (result.path_length >= 0) payload["path_length"] = result.path_length;
      trace_.add(EventKind::primitive_exec, payload);

      if (result.ok) break;

      // A coverable failure is rectified inline once per primitive per
      // attempt; a second trigger escalates to the correction stack.
      if (config_.low_level_feedback_enabled && !fixed &&
          result.fault->coverable) {
        if (const CheckRule* rule = find_check(prim, result.fault->message)) {
          if (run_fix(*rule, step)) {
            fixed = true;
            continue;
          }
        }
      }
      failure_msg = result.fault->message;
      break;
    }
    if (!failure_msg.empty()) break;
  }

  ActionResult out;
  if (!failure_msg.empty()) {
    out.report.flag = false;
    out.report.info = failure_msg;
    out.report.observed = env_.state();
    out.level = FaultLevel::low;
  } else {
    out.report = env_.perceive(predicted_successor(domain, entry, action));
    out.level = FaultLevel::high;
  }
  nlohmann::json payload;
  payload["flag"] = out.report.flag;
  payload["info"] = out.report.info;
  payload["role"] = role;
  payload["action"] = action.str();
  payload["observed"] = facts_json(env_.state());
  trace_.add(EventKind::perception, payload);
  return out;
}

bool Executor::retry_chain(CorrectionStack& stack, int step) {
  while (stack.depth() > 0) {
    SemanticAction a_try = stack.top().action;
    nlohmann::json payload;
    payload["action"] = a_try.str();
    payload["depth"] = stack.depth();
    trace_.add(EventKind::correction_retry, payload);

    auto result = execute_action(a_try, step, "retry");
    if (result.report.flag) {
      stack.pop();
      nlohmann::json pop_payload;
      pop_payload["action"] = a_try.str();
      pop_payload["depth"] = stack.depth();
      trace_.add(EventKind::correction_pop, pop_payload);
    } else {
      stack.update(result.report.info);
      return false;
    }
  }
  return true;
}

StepOutcome Executor::correction_loop(const SemanticAction& failed_action,
                                      const std::string& info, FaultLevel level,
                                      int step) {
  CorrectionStack stack(config_.threshold);
  stack.push(CorrectionFrame{failed_action, info, level, 1});
  trace_.add(EventKind::correction_push,
             {{"action", failed_action.str()},
              {"info", info},
              {"level", level == FaultLevel::high ? "high" : "low"},
              {"depth", stack.depth()}});

  int generates = 0;
  for (int iter = 1; iter <= config_.threshold; ++iter) {
    const std::string psi = stack.top().info;
    auto bundle = assemble_prompt(*task_, env_.state(), psi, stack.history());
    ++generates;

    SemanticAction correction;
    bool valid = true;
    std::string gen_error, gen_kind;
    try {
      correction = planner_.correct(env_.state(), bundle);
      validate_plan(env_.domain(), {correction});
    } catch (const PlannerError& e) {
      valid = false;
      gen_error = e.what();
      gen_kind = remote_error_kind(e);
    } catch (const DomainError& e) {
      valid = false;
      gen_error = e.what();
      gen_kind = "invalid_action";
    }

    nlohmann::json payload;
    payload["iteration"] = iter;
    payload["valid"] = valid;
    if (valid)
      payload["action"] = correction.str();
    else {
      payload["error"] = gen_error;
      payload["error_kind"] = gen_kind;
    }
    trace_.add(EventKind::correction_generate, payload);

    if (!valid) {
      stack.update("planner produced invalid action: " + gen_error);
      continue;
    }

    auto result = execute_action(correction, step, "correction");
    if (result.report.flag) {
      if (retry_chain(stack, step)) {
        StepOutcome outcome;
        outcome.status = StepStatus::corrected;
        outcome.corrections_used = generates;
        outcome.cues_used = generates;
        return outcome;
      }
      // Stalled: the fresh cause now tops the stack.
    } else {
      try {
        stack.push(CorrectionFrame{correction, result.report.info, result.level, 1});
        trace_.add(EventKind::correction_push,
                   {{"action", correction.str()},
                    {"info", result.report.info},
                    {"level", result.level == FaultLevel::high ? "high" : "low"},
                    {"depth", stack.depth()}});
      } catch (const StackExhausted&) {
        trace_.add(EventKind::correction_exhausted,
                   {{"reason", "stack capacity"}, {"iterations", generates}});
        return StepOutcome{StepStatus::exhausted, generates, generates};
      }
    }
  }
  trace_.add(EventKind::correction_exhausted,
             {{"reason", "iteration threshold"}, {"iterations", generates}});
  return StepOutcome{StepStatus::exhausted, generates, generates};
}

RunResult Executor::run_task(const Task& task) {
  task_ = &task;
  RunResult result;

  std::vector<SemanticAction> plan;
  try {
    plan = planner_.plan(env_.state(), task);
    validate_plan(env_.domain(), plan);
  } catch (const PlannerError& e) {
    trace_.add(EventKind::plan_invalid,
               {{"error", e.what()}, {"error_kind", remote_error_kind(e)}});
    trace_.add(EventKind::task_end,
               {{"goal_satisfied", false},
                {"final_state", facts_json(env_.state())},
                {"steps", nlohmann::json::array()},
                {"aborted", true}});
    return result;
  } catch (const DomainError& e) {
    trace_.add(EventKind::plan_invalid,
               {{"error", e.what()}, {"error_kind", "invalid_action"}});
    trace_.add(EventKind::task_end,
               {{"goal_satisfied", false},
                {"final_state", facts_json(env_.state())},
                {"steps", nlohmann::json::array()},
                {"aborted", true}});
    return result;
  }

  {
    auto actions = nlohmann::json::array();
    for (const auto& a : plan) actions.push_back(a.str());
    trace_.add(EventKind::plan, {{"task", task.id}, {"actions", actions}});
  }

  auto steps_json = nlohmann::json::array();
  bool aborted = false;

  for (std::size_t idx = 0; idx < plan.size() && !aborted; ++idx) {
    const SemanticAction& action = plan[idx];
    attempts_.clear();
    const SymbolicState step_expected =
        predicted_successor(env_.domain(), env_.state(), action);
    trace_.add(EventKind::action_start, {{"index", idx},
                                         {"action", action.str()},
                                         {"expected", facts_json(step_expected)}});

    auto exec = execute_action(action, static_cast<int>(idx), "plan");
    StepOutcome outcome;
    if (exec.report.flag) {
      outcome.status = StepStatus::success;
    } else if (!config_.correction_enabled) {
      // Open-loop baseline: press on with the pre-generated plan.
      outcome.status = StepStatus::skipped;
      trace_.add(EventKind::step_skipped,
                 {{"index", idx}, {"reason", "correction disabled"}});
    } else {
      outcome = correction_loop(action, exec.report.info, exec.level,
                                static_cast<int>(idx));
      if (outcome.status == StepStatus::exhausted) {
        if (config_.on_exhaustion == OnExhaustion::abort_task) {
          aborted = true;
        } else {
          trace_.add(EventKind::step_skipped,
                     {{"index", idx}, {"reason", "correction exhausted"}});
          outcome.status = StepStatus::skipped;
        }
      }
    }

    nlohmann::json step_json;
    step_json["index"] = idx;
    step_json["status"] = to_string(outcome.status);
    step_json["corrections_used"] = outcome.corrections_used;
    step_json["cues_used"] = outcome.cues_used;
    if (outcome.status == StepStatus::corrected)
      step_json["restored"] = env_.state() == step_expected;
    steps_json.push_back(step_json);
    result.steps.push_back(outcome);
  }

  result.goal_satisfied = satisfies(env_.state(), task.goal);
  trace_.add(EventKind::task_end, {{"goal_satisfied", result.goal_satisfied},
                                   {"final_state", facts_json(env_.state())},
                                   {"steps", steps_json},
                                   {"aborted", aborted}});
  return result;
}

}  // namespace hicrisp
