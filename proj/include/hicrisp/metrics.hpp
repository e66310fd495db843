#pragma once

#include <utility>
#include <vector>

#include "hicrisp/trace.hpp"
#include "hicrisp/world.hpp"

namespace hicrisp {

struct IncompleteTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunMetrics {
  int sr = 0;        // 1 when the final state satisfies the goal
  double exec = 1.0; // successfully executed actions / actions attempted
  int motions = 0;   // planner-produced primitives executed (plan + corrections)
  int cues = 0;      // planner consults beyond the initial plan
};

// Fraction of attempted semantic actions (planned steps plus correction
// actions) whose execution ultimately succeeded; corrected-then-succeeded
// steps count as successes. Zero attempts (empty plan) is defined as 1.0.
double exec_rate(const Trace& trace);

int success(const Trace& trace, const Goal& goal);

// Inline predefined fixes are excluded from |motions|; the initial plan
// consult is not a cue.
int count_motions(const Trace& trace);
int count_cues(const Trace& trace);

RunMetrics compute_metrics(const Trace& trace, const Goal& goal);

// (arithmetic mean, population standard deviation).
std::pair<double, double> aggregate(const std::vector<double>& values);

// Final state snapshot recorded in the task_end event.
SymbolicState final_state(const Trace& trace);

// Inverse of Predicate::str(): "name(a, b)" -> Predicate.
Predicate parse_fact_string(const std::string& s);

}  // namespace hicrisp
