#include "hicrisp/planner.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <regex>
#include <sstream>

namespace hicrisp {

namespace {

constexpr const char* kPreamble =
    "You control a robot in a symbolic world. Given the task, the current "
    "state and any error information, answer with actions from the provided "
    "schema only.";

std::string render_state(const SymbolicState& state) {
  std::ostringstream os;
  bool first = true;
  for (const auto& f : state.facts) {  // std::set iterates in sorted order
    if (!first) os << "; ";
    os << f.str();
    first = false;
  }
  return os.str();
}

// All groundings of every action template, sorted by (name, params).
std::vector<SemanticAction> enumerate_groundings(const Domain& domain) {
  std::vector<SemanticAction> out;
  std::vector<std::string> ids;
  for (const auto& [id, e] : domain.entities) ids.push_back(id);

  for (const auto& [name, tpl] : domain.actions) {
    std::vector<std::vector<std::string>> partial{{}};
    for (std::size_t i = 0; i < tpl.params.size(); ++i) {
      std::vector<std::vector<std::string>> next;
      for (const auto& prefix : partial)
        for (const auto& id : ids) {
          if (!tpl.param_kinds[i].empty() &&
              domain.entities.at(id).kind != tpl.param_kinds[i])
            continue;
          auto ext = prefix;
          ext.push_back(id);
          next.push_back(std::move(ext));
        }
      partial = std::move(next);
    }
    for (auto& args : partial) out.push_back(SemanticAction{name, std::move(args)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PromptBundle assemble_prompt(
    const Task& task, const SymbolicState& state, const std::string& error_info,
    const std::vector<std::pair<std::string, std::string>>& history) {
  PromptBundle b;
  b.task_text = task.text;
  b.current_state_rendering = render_state(state);
  b.error_info = error_info;
  b.history = history;
  b.predefined_preamble = kPreamble;
  return b;
}

void validate_plan(const Domain& domain,
                   const std::vector<SemanticAction>& actions) {
  for (const auto& a : actions) {
    auto it = domain.actions.find(a.name);
    if (it == domain.actions.end())
      throw DomainError("plan references unknown action: " + a.name);
    if (a.args.size() != it->second.params.size())
      throw DomainError("plan action " + a.str() + " arity mismatch");
    for (const auto& arg : a.args)
      if (!domain.entities.count(arg))
        throw DomainError("plan action " + a.str() + " references unknown entity " + arg);
  }
}

std::optional<std::pair<Predicate, bool>> parse_fact_from_info(
    const Domain& domain, const std::string& info) {
  static const std::regex fact_re(R"(([a-zA-Z_][a-zA-Z0-9_]*)\(([^()]*)\))");
  for (auto it = std::sregex_iterator(info.begin(), info.end(), fact_re);
       it != std::sregex_iterator(); ++it) {
    std::string name = (*it)[1];
    if (!domain.predicates.count(name)) continue;
    Predicate p;
    p.name = name;
    std::stringstream args((*it)[2]);
    std::string a;
    while (std::getline(args, a, ',')) {
      a.erase(0, a.find_first_not_of(' '));
      a.erase(a.find_last_not_of(' ') + 1);
      if (!a.empty()) p.args.push_back(a);
    }
    if (p.args.size() != domain.predicates.at(name).arity) continue;
    auto pos = static_cast<std::size_t>(it->position());
    bool unwanted = info.rfind("unexpected", pos) != std::string::npos;
    return std::make_pair(p, unwanted);
  }
  return std::nullopt;
}

OraclePlanner::OraclePlanner(const Domain& domain, int depth_cap)
    : domain_(domain),
      depth_cap_(depth_cap),
      groundings_(enumerate_groundings(domain)) {}

std::vector<SemanticAction> OraclePlanner::search(const SymbolicState& initial,
                                                  const Goal& goal) const {
  if (satisfies(initial, goal)) return {};

  struct Node {
    SymbolicState state;
    int depth;
    std::size_t parent;
    SemanticAction via;
  };
  std::vector<Node> nodes{{initial, 0, 0, {}}};
  std::deque<std::size_t> frontier{0};
  std::set<std::set<Predicate>> visited{initial.facts};

  while (!frontier.empty()) {
    std::size_t idx = frontier.front();
    frontier.pop_front();
    if (nodes[idx].depth >= depth_cap_) continue;
    // Copy: `nodes` reallocates while expanding.
    const SymbolicState state = nodes[idx].state;
    const int depth = nodes[idx].depth;
    for (const auto& action : groundings_) {
      SymbolicState next;
      try {
        next = expected_successor(domain_, state, action);
      } catch (const DomainError&) {
        continue;  // inapplicable grounding
      }
      if (!visited.insert(next.facts).second) continue;
      nodes.push_back({next, depth + 1, idx, action});
      if (satisfies(next, goal)) {
        std::vector<SemanticAction> plan;
        for (std::size_t i = nodes.size() - 1; i != 0; i = nodes[i].parent)
          plan.push_back(nodes[i].via);
        std::reverse(plan.begin(), plan.end());
        return plan;
      }
      frontier.push_back(nodes.size() - 1);
    }
  }
  throw NoPlanFound("search exhausted at depth cap " + std::to_string(depth_cap_));
}

std::vector<SemanticAction> OraclePlanner::plan(const SymbolicState& initial,
                                                const Task& task) {
  return search(initial, task.goal);
}

SemanticAction OraclePlanner::correct(const SymbolicState& error_state,
                                      const PromptBundle& prompt) {
  if (prompt.error_info.empty())
    throw NoCorrectionRule("empty error info");
  auto parsed = parse_fact_from_info(domain_, prompt.error_info);
  if (!parsed)
    throw NoCorrectionRule("no recognizable fact in: " + prompt.error_info);
  const auto& [fact, unwanted] = *parsed;

  Goal goal;
  if (unwanted)
    goal.forbidden.insert(fact);
  else
    goal.required.insert(fact);
  std::vector<SemanticAction> sub;
  try {
    sub = search(error_state, goal);
  } catch (const NoPlanFound&) {
    throw NoCorrectionRule("no establisher reachable for " + fact.str());
  }
  if (sub.empty())
    throw NoCorrectionRule("condition already holds: " + fact.str());
  return sub.front();
}

ScriptedPlanner::ScriptedPlanner(const Domain& domain, Script script)
    : domain_(domain), script_(std::move(script)) {}

std::vector<SemanticAction> ScriptedPlanner::plan(const SymbolicState&,
                                                  const Task& task) {
  auto it = script_.plans.find(task.id);
  if (it == script_.plans.end())
    throw NoPlanFound("no scripted plan for task " + task.id);
  validate_plan(domain_, it->second);
  return it->second;
}

SemanticAction ScriptedPlanner::correct(const SymbolicState&,
                                        const PromptBundle& prompt) {
  for (const auto& rule : script_.corrections)
    if (prompt.error_info.find(rule.match) != std::string::npos)
      return rule.action;
  throw NoCorrectionRule("no scripted correction matches: " + prompt.error_info);
}

}  // namespace hicrisp
