#include "hicrisp/world.hpp"

#include <algorithm>
#include <sstream>

namespace hicrisp {

namespace {

std::string join_call(const std::string& name,
                      const std::vector<std::string>& args) {
  std::ostringstream os;
  os << name << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    os << args[i];
  }
  os << ')';
  return os.str();
}

// Wildcard-aware match of a ground fact against a delete pattern.
bool matches(const Predicate& pattern, const Predicate& fact) {
  if (pattern.name != fact.name || pattern.args.size() != fact.args.size())
    return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (pattern.args[i] != "*" && pattern.args[i] != fact.args[i])
      return false;
  return true;
}

Predicate substitute(const Predicate& p,
                     const std::map<std::string, std::string>& binding) {
  Predicate out{p.name, p.args};
  for (auto& a : out.args) {
    auto it = binding.find(a);
    if (it != binding.end()) a = it->second;
  }
  return out;
}

void enforce_functional(const Domain& domain, const SymbolicState& state) {
  for (const auto& [name, decl] : domain.predicates) {
    if (!decl.functional) continue;
    std::set<std::vector<std::string>> seen;
    for (const auto& f : state.facts) {
      if (f.name != name) continue;
      std::vector<std::string> key;
      for (auto pos : decl.functional_keys)
        if (pos < f.args.size()) key.push_back(f.args[pos]);
      if (!seen.insert(key).second)
        throw InvariantBreach("functional constraint violated for predicate " +
                              name);
    }
  }
}

}  // namespace

std::string Predicate::str() const { return join_call(name, args); }
std::string GroundPrimitive::str() const { return join_call(name, args); }
std::string SemanticAction::str() const { return join_call(name, args); }

const PredicateDecl& Domain::predicate(const std::string& n) const {
  auto it = predicates.find(n);
  if (it == predicates.end())
    throw UnknownPredicate("undeclared predicate: " + n);
  return it->second;
}

std::string Domain::render_arg(const std::string& id) const {
  auto it = entities.find(id);
  if (it != entities.end()) {
    auto a = it->second.attributes.find("label");
    if (a != it->second.attributes.end()) return a->second;
  }
  return id;
}

GroundPrimitive ground_primitive(const Domain& domain, const std::string& name,
                                 const std::vector<std::string>& args) {
  auto it = domain.primitives.find(name);
  if (it == domain.primitives.end())
    throw DomainError("unknown primitive: " + name);
  const MovementPrimitive& def = it->second;
  if (args.size() != def.params.size())
    throw DomainError("primitive " + name + " expects " +
                      std::to_string(def.params.size()) + " args, got " +
                      std::to_string(args.size()));
  std::map<std::string, std::string> binding;
  for (std::size_t i = 0; i < args.size(); ++i) binding[def.params[i]] = args[i];

  GroundPrimitive g;
  g.name = name;
  g.args = args;
  g.motion = def.motion;
  for (const auto& p : def.preconditions) g.preconditions.push_back(substitute(p, binding));
  for (const auto& p : def.add_effects) g.add_effects.push_back(substitute(p, binding));
  for (const auto& p : def.del_effects) g.del_effects.push_back(substitute(p, binding));
  for (const auto& c : def.checks) {
    CheckRule rule;
    rule.violation = c.violation;
    for (const auto& call : c.fix) {
      CheckRule::Call rc;
      rc.name = call.name;
      for (const auto& a : call.args) {
        auto b = binding.find(a);
        rc.args.push_back(b != binding.end() ? b->second : a);
      }
      rule.fix.push_back(std::move(rc));
    }
    g.checks.push_back(std::move(rule));
  }
  return g;
}

std::vector<GroundPrimitive> ground_action(const Domain& domain,
                                           const SemanticAction& action) {
  auto it = domain.actions.find(action.name);
  if (it == domain.actions.end())
    throw DomainError("unknown action: " + action.name);
  const ActionTemplate& tpl = it->second;
  if (action.args.size() != tpl.params.size())
    throw DomainError("action " + action.name + " expects " +
                      std::to_string(tpl.params.size()) + " args, got " +
                      std::to_string(action.args.size()));
  std::map<std::string, std::string> binding;
  for (std::size_t i = 0; i < action.args.size(); ++i)
    binding[tpl.params[i]] = action.args[i];

  std::vector<GroundPrimitive> out;
  for (const auto& call : tpl.primitives) {
    std::vector<std::string> args;
    for (const auto& a : call.args) {
      auto b = binding.find(a);
      args.push_back(b != binding.end() ? b->second : a);
    }
    out.push_back(ground_primitive(domain, call.name, args));
  }
  return out;
}

std::vector<Predicate> check_preconditions(const Domain& domain,
                                           const SymbolicState& state,
                                           const GroundPrimitive& prim) {
  std::vector<Predicate> violations;
  for (const auto& pre : prim.preconditions) {
    domain.predicate(pre.name);  // UnknownPredicate on undeclared symbols
    if (!state.holds(pre)) violations.push_back(pre);
  }
  return violations;
}

SymbolicState apply_fact_sets(const Domain& domain, const SymbolicState& state,
                              const std::vector<Predicate>& del,
                              const std::vector<Predicate>& add) {
  SymbolicState next = state;
  for (const auto& d : del)
    std::erase_if(next.facts, [&](const Predicate& f) { return matches(d, f); });
  for (const auto& a : add) {
    domain.predicate(a.name);
    next.facts.insert(a);
  }
  enforce_functional(domain, next);
  return next;
}

SymbolicState apply_effects_unchecked(const Domain& domain,
                                      const SymbolicState& state,
                                      const GroundPrimitive& prim) {
  return apply_fact_sets(domain, state, prim.del_effects, prim.add_effects);
}

SymbolicState apply_effects(const Domain& domain, const SymbolicState& state,
                            const GroundPrimitive& prim) {
  auto violations = check_preconditions(domain, state, prim);
  if (!violations.empty())
    throw PreconditionViolation("precondition violated: expected " +
                                violations.front().str() + " to hold");
  return apply_effects_unchecked(domain, state, prim);
}

SymbolicState expected_successor(const Domain& domain,
                                 const SymbolicState& state,
                                 const SemanticAction& action) {
  SymbolicState s = state;
  for (const auto& prim : ground_action(domain, action)) {
    auto violations = check_preconditions(domain, s, prim);
    if (!violations.empty())
      throw ChainBroken("chain broken at " + prim.str() +
                        ": precondition violated: expected " +
                        violations.front().str() + " to hold");
    s = apply_effects_unchecked(domain, s, prim);
  }
  return s;
}

SymbolicState predicted_successor(const Domain& domain,
                                  const SymbolicState& state,
                                  const SemanticAction& action) {
  SymbolicState s = state;
  for (const auto& prim : ground_action(domain, action))
    s = apply_effects_unchecked(domain, s, prim);
  return s;
}

bool satisfies(const SymbolicState& state, const Goal& goal) {
  for (const auto& r : goal.required)
    if (!state.holds(r)) return false;
  for (const auto& f : goal.forbidden)
    if (state.holds(f)) return false;
  return true;
}

}  // namespace hicrisp
