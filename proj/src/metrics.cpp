#include "hicrisp/metrics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace hicrisp {

namespace {

const TraceEvent& task_end_event(const Trace& trace) {
  if (!trace.complete())
    throw IncompleteTrace("trace lacks a task_end event");
  return trace.events().back();
}

}  // namespace

Predicate parse_fact_string(const std::string& s) {
  auto open = s.find('(');
  auto close = s.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("malformed fact string: " + s);
  Predicate p;
  p.name = s.substr(0, open);
  std::stringstream args(s.substr(open + 1, close - open - 1));
  std::string a;
  while (std::getline(args, a, ',')) {
    a.erase(0, a.find_first_not_of(' '));
    a.erase(a.find_last_not_of(' ') + 1);
    if (!a.empty()) p.args.push_back(a);
  }
  return p;
}

SymbolicState final_state(const Trace& trace) {
  const auto& end = task_end_event(trace);
  SymbolicState s;
  for (const auto& f : end.payload.at("final_state"))
    s.facts.insert(parse_fact_string(f.get<std::string>()));
  return s;
}

double exec_rate(const Trace& trace) {
  const auto& end = task_end_event(trace);

  int attempted = 0;
  int succeeded = 0;

  for (const auto& step : end.payload.at("steps")) {
    ++attempted;
    const std::string status = step.at("status").get<std::string>();
    if (status == "success" || status == "corrected") ++succeeded;
  }

  // Each correction consult is an attempted action; a valid one succeeded
  // when its own perception (role "correction") reported flag = true.
  const auto& events = trace.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].kind != EventKind::correction_generate) continue;
    ++attempted;
    if (!events[i].payload.value("valid", false)) continue;
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      if (events[j].kind == EventKind::correction_generate ||
          events[j].kind == EventKind::action_start)
        break;
      if (events[j].kind == EventKind::perception &&
          events[j].payload.value("role", "") == "correction") {
        if (events[j].payload.value("flag", false)) ++succeeded;
        break;
      }
    }
  }

  if (attempted == 0) return 1.0;
  return static_cast<double>(succeeded) / attempted;
}

int success(const Trace& trace, const Goal& goal) {
  return satisfies(final_state(trace), goal) ? 1 : 0;
}

int count_motions(const Trace& trace) {
  int n = 0;
  for (const auto& ev : trace.events())
    if (ev.kind == EventKind::primitive_exec) ++n;
  return n;
}

int count_cues(const Trace& trace) {
  int n = 0;
  for (const auto& ev : trace.events())
    if (ev.kind == EventKind::correction_generate) ++n;
  return n;
}

RunMetrics compute_metrics(const Trace& trace, const Goal& goal) {
  RunMetrics m;
  m.sr = success(trace, goal);
  m.exec = exec_rate(trace);
  m.motions = count_motions(trace);
  m.cues = count_cues(trace);
  return m;
}

std::pair<double, double> aggregate(const std::vector<double>& values) {
  if (values.empty()) throw EmptySample("aggregate over an empty sample");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= values.size();  // population variance
  return {mean, std::sqrt(var)};
}

}  // namespace hicrisp
