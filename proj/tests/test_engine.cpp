#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "hicrisp/suite.hpp"

using namespace hicrisp;

namespace {

const std::string kScenarios = SCENARIO_DIR;

Predicate fact(const std::string& name, std::vector<std::string> args) {
  return Predicate{name, std::move(args)};
}

struct RunCapture {
  RunOutput out;
  Trace trace;
};

RunCapture run(const std::string& scenario_file, const std::string& planner,
               ExecutorConfig cfg = {}) {
  RunCapture cap;
  Scenario sc = load_scenario(kScenarios + "/" + scenario_file);
  cap.out = run_scenario(sc, scenario_file, planner, "", "", cfg, cap.trace);
  return cap;
}

int count(const Trace& trace, EventKind kind) {
  int n = 0;
  for (const auto& e : trace.events()) n += e.kind == kind;
  return n;
}

std::vector<const TraceEvent*> events_of(const Trace& trace, EventKind kind) {
  std::vector<const TraceEvent*> out;
  for (const auto& e : trace.events())
    if (e.kind == kind) out.push_back(&e);
  return out;
}

}  // namespace

TEST_CASE("correction stack is a bounded LIFO") {
  CorrectionStack stack(3);
  CHECK(stack.depth() == 0);
  CHECK(stack.threshold() == 3);
  CHECK_THROWS_AS(stack.pop(), StackEmpty);
  CHECK_THROWS_AS(stack.top(), StackEmpty);
  CHECK_THROWS_AS(stack.update("x"), StackEmpty);

  stack.push({SemanticAction{"a", {}}, "cause a", FaultLevel::low, 1});
  stack.push({SemanticAction{"b", {}}, "cause b", FaultLevel::high, 1});
  stack.push({SemanticAction{"c", {}}, "cause c", FaultLevel::low, 1});
  CHECK(stack.depth() == 3);
  CHECK_THROWS_AS(
      stack.push({SemanticAction{"d", {}}, "cause d", FaultLevel::low, 1}),
      StackExhausted);
  CHECK(stack.depth() == 3);  // a failed push leaves the stack intact

  auto history = stack.history();
  REQUIRE(history.size() == 3);
  CHECK(history[0].first == "a()");  // bottom-up
  CHECK(history[2].first == "c()");

  // update keeps the action, replaces the cause, bumps the attempt count.
  stack.update("cause c, retried");
  CHECK(stack.top().action == SemanticAction{"c", {}});
  CHECK(stack.top().info == "cause c, retried");
  CHECK(stack.top().attempt_count == 2);

  CHECK(stack.pop().action.name == "c");
  CHECK(stack.pop().action.name == "b");
  CHECK(stack.pop().action.name == "a");
  CHECK(stack.depth() == 0);

  CHECK_THROWS_AS(CorrectionStack(0), std::invalid_argument);
}

TEST_CASE("fault-free oracle run over every tabletop task") {
  Scenario sc = load_scenario(kScenarios + "/tabletop.json");
  for (const auto& [id, task] : sc.domain.tasks) {
    CAPTURE(id);
    Scenario copy = sc;
    copy.task_id = id;
    Trace trace;
    auto out = run_scenario(copy, "tabletop.json", "oracle", "", "", {}, trace);
    CHECK(out.result.goal_satisfied);
    CHECK(out.metrics.sr == 1);
    CHECK(out.metrics.cues == 0);
    CHECK(count(trace, EventKind::correction_generate) == 0);
    CHECK(count(trace, EventKind::predefined_fix) == 0);
    for (const auto& s : out.result.steps)
      CHECK(s.status == StepStatus::success);
    CHECK(trace.complete());
  }
}

TEST_CASE("low-level feedback covers a coverable fault without a cue") {
  auto cap = run("ablation/store_two_blocks.json", "oracle");
  CHECK(cap.out.result.goal_satisfied);
  CHECK(cap.out.metrics.cues == 0);
  CHECK(count(cap.trace, EventKind::predefined_fix) == 1);
  CHECK(count(cap.trace, EventKind::correction_generate) == 0);
  for (const auto& s : cap.out.result.steps)
    CHECK(s.status == StepStatus::success);
}

TEST_CASE("without low-level feedback the same fault costs one cue") {
  ExecutorConfig cfg;
  cfg.low_level_feedback_enabled = false;
  auto cap = run("ablation/store_two_blocks.json", "oracle", cfg);
  CHECK(cap.out.result.goal_satisfied);
  CHECK(cap.out.metrics.cues == 1);
  CHECK(count(cap.trace, EventKind::predefined_fix) == 0);
  CHECK(count(cap.trace, EventKind::correction_generate) == 1);
  CHECK(count(cap.trace, EventKind::correction_pop) == 1);

  // The corrected step restored the expected successor state.
  auto ends = events_of(cap.trace, EventKind::task_end);
  REQUIRE(ends.size() == 1);
  bool saw_corrected = false;
  for (const auto& s : ends[0]->payload["steps"]) {
    if (s["status"] == "corrected") {
      saw_corrected = true;
      CHECK(s["restored"] == true);
    }
  }
  CHECK(saw_corrected);
}

TEST_CASE("high-level divergence is caught by perception and corrected") {
  auto cap = run("sofa_fault.json", "scripted");
  CHECK(cap.out.result.goal_satisfied);
  CHECK(cap.out.metrics.cues == 1);

  // The failing step's perception carries the rendered cause.
  bool saw = false;
  for (const auto* e : events_of(cap.trace, EventKind::perception))
    if (e->payload["flag"] == false) {
      CHECK(e->payload["info"] == "agent is not at the sofa");
      saw = true;
      break;
    }
  CHECK(saw);

  // push -> generate -> retry -> pop, in that order.
  std::vector<EventKind> kinds;
  for (const auto& e : cap.trace.events())
    if (e.kind == EventKind::correction_push ||
        e.kind == EventKind::correction_generate ||
        e.kind == EventKind::correction_retry ||
        e.kind == EventKind::correction_pop)
      kinds.push_back(e.kind);
  CHECK(kinds == std::vector<EventKind>{
                     EventKind::correction_push, EventKind::correction_generate,
                     EventKind::correction_retry, EventKind::correction_pop});
}

TEST_CASE("exhaustion stops after exactly threshold consults") {
  for (int threshold : {1, 2, 5}) {
    CAPTURE(threshold);
    ExecutorConfig cfg;
    cfg.threshold = threshold;
    auto cap = run("exhaust.json", "oracle", cfg);
    CHECK_FALSE(cap.out.result.goal_satisfied);
    CHECK(count(cap.trace, EventKind::correction_generate) == threshold);
    CHECK(count(cap.trace, EventKind::correction_exhausted) == 1);
    // Stack depth never exceeds the threshold.
    for (const auto* e : events_of(cap.trace, EventKind::correction_push))
      CHECK(e->payload["depth"].get<int>() <= threshold);
    REQUIRE_FALSE(cap.out.result.steps.empty());
    CHECK(cap.out.result.steps[0].status == StepStatus::exhausted);
    // abort_task: nothing past the exhausted step.
    CHECK(cap.out.result.steps.size() == 1);
  }
}

TEST_CASE("on_exhaustion=skip_step presses on with the remaining plan") {
  ExecutorConfig cfg;
  cfg.on_exhaustion = OnExhaustion::skip_step;
  auto cap = run("exhaust.json", "oracle", cfg);
  CHECK_FALSE(cap.out.result.goal_satisfied);
  CHECK(cap.out.result.steps.size() >= 2);  // later steps were attempted
  CHECK(cap.out.result.steps[0].status == StepStatus::skipped);
  CHECK(count(cap.trace, EventKind::step_skipped) >= 1);
}

TEST_CASE("disabled correction leaves failures uncorrected") {
  ExecutorConfig cfg;
  cfg.correction_enabled = false;
  auto cap = run("sofa_fault.json", "scripted", cfg);
  CHECK_FALSE(cap.out.result.goal_satisfied);
  CHECK(cap.out.metrics.cues == 0);
  CHECK(count(cap.trace, EventKind::correction_generate) == 0);
  bool saw_skip = false;
  for (const auto& s : cap.out.result.steps)
    saw_skip |= s.status == StepStatus::skipped;
  CHECK(saw_skip);
}

TEST_CASE("an unparsable cause consumes iterations via stack update") {
  // "gripper jammed" names no fact, so the oracle has no correction rule;
  // each iteration records an invalid generate and updates the stack top.
  ExecutorConfig cfg;
  cfg.threshold = 3;
  auto cap = run("exhaust.json", "oracle", cfg);
  auto gens = events_of(cap.trace, EventKind::correction_generate);
  REQUIRE(gens.size() == 3);
  for (const auto* e : gens) {
    CHECK(e->payload["valid"] == false);
    CHECK(e->payload["error_kind"] == "no_correction_rule");
  }
  auto ex = events_of(cap.trace, EventKind::correction_exhausted);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0]->payload["reason"] == "iteration threshold");
}

TEST_CASE("grid: obstacle is covered inline, wrong landmark needs a cue") {
  auto obstacle = run("grid_obstacle.json", "scripted");
  CHECK(obstacle.out.result.goal_satisfied);
  CHECK(obstacle.out.metrics.cues == 0);
  CHECK(count(obstacle.trace, EventKind::predefined_fix) == 1);

  auto wrong = run("grid_wrong.json", "scripted");
  CHECK(wrong.out.result.goal_satisfied);
  CHECK(wrong.out.metrics.cues == 1);
}

TEST_CASE("the engine emits one perception event per action execution") {
  auto cap = run("sofa_fault.json", "scripted");
  int action_execs = count(cap.trace, EventKind::action_start) +
                     count(cap.trace, EventKind::correction_retry);
  for (const auto* e : events_of(cap.trace, EventKind::correction_generate))
    action_execs += e->payload["valid"] == true;
  CHECK(count(cap.trace, EventKind::perception) == action_execs);
}

TEST_CASE("traces end with task_end carrying the final state") {
  auto cap = run("box_offset.json", "scripted");
  REQUIRE(cap.trace.complete());
  const auto& last = cap.trace.events().back();
  CHECK(last.kind == EventKind::task_end);
  CHECK(last.payload["goal_satisfied"] == true);
  SymbolicState final = final_state(cap.trace);
  CHECK(final.holds(fact("around", {"box", "cylinder"})));
  // No events may follow task_end.
  Trace& t = cap.trace;
  CHECK_THROWS_AS(t.add(EventKind::plan, {}), std::logic_error);
}

TEST_CASE("identical runs produce identical determinism hashes") {
  auto a = run("ablation/make_one_empty.json", "oracle");
  auto b = run("ablation/make_one_empty.json", "oracle");
  CHECK(a.trace.determinism_hash() == b.trace.determinism_hash());

  ExecutorConfig other_seed;
  other_seed.seed = 42;
  auto c = run("ablation/make_one_empty.json", "oracle", other_seed);
  // Same fault schedule (p=1), so the event stream is identical except the
  // header, which is not part of the hash input.
  CHECK(c.trace.determinism_hash() == a.trace.determinism_hash());
}

TEST_CASE("plan failure is recorded and aborts cleanly") {
  Scenario sc = load_scenario(kScenarios + "/tabletop.json");
  sc.task_id = "store_two_blocks";
  sc.script.plans.clear();  // scripted planner with no plan for the task
  Trace trace;
  auto out = run_scenario(sc, "tabletop.json", "scripted", "", "", {}, trace);
  CHECK_FALSE(out.result.goal_satisfied);
  CHECK(out.metrics.sr == 0);
  REQUIRE(trace.complete());
  bool saw_invalid = false;
  for (const auto& e : trace.events())
    saw_invalid |= e.kind == EventKind::plan_invalid;
  CHECK(saw_invalid);
}
