#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hicrisp {

struct Entity {
  std::string id;
  std::string kind;  // block, bowl, box, cylinder, landmark, obstacle, agent, gripper
  std::map<std::string, std::string> attributes;
};

// A ground (or pattern) fact. "*" in an argument position acts as a wildcard,
// permitted only inside delete-effect patterns.
struct Predicate {
  std::string name;
  std::vector<std::string> args;

  auto operator<=>(const Predicate&) const = default;
  std::string str() const;
};

struct SymbolicState {
  std::set<Predicate> facts;

  bool holds(const Predicate& p) const { return facts.count(p) > 0; }
  bool operator==(const SymbolicState&) const = default;
};

// One entry of a primitive's predefined error-checking table: when a failure
// message (violated precondition or environment fault) contains `violation`,
// the primitives in `fix` are executed inline before retrying.
struct CheckRule {
  std::string violation;
  struct Call {
    std::string name;
    std::vector<std::string> args;  // formal params of the owner or literals
  };
  std::vector<Call> fix;
};

struct MovementPrimitive {
  std::string name;
  std::vector<std::string> params;
  std::vector<Predicate> preconditions;  // declaration order matters
  std::vector<Predicate> add_effects;
  std::vector<Predicate> del_effects;
  std::vector<CheckRule> checks;
  std::string motion;  // "" for purely symbolic; "navigate" routes on the grid
};

// A movement primitive with every formal parameter substituted.
struct GroundPrimitive {
  std::string name;
  std::vector<std::string> args;
  std::vector<Predicate> preconditions;
  std::vector<Predicate> add_effects;
  std::vector<Predicate> del_effects;
  std::vector<CheckRule> checks;  // fix calls fully substituted
  std::string motion;

  std::string str() const;
};

struct PrimitiveCall {
  std::string name;
  std::vector<std::string> args;
};

struct ActionTemplate {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> param_kinds;  // optional, "" = any; advisory typing
  std::vector<PrimitiveCall> primitives;
};

// A planner-level action instance.
struct SemanticAction {
  std::string name;
  std::vector<std::string> args;

  auto operator<=>(const SemanticAction&) const = default;
  std::string str() const;
};

struct Goal {
  std::set<Predicate> required;
  std::set<Predicate> forbidden;
};

struct Task {
  std::string id;
  std::string text;
  Goal goal;
};

struct PredicateDecl {
  std::string name;
  std::size_t arity = 0;
  // Key argument positions of a functional constraint: at most one fact with
  // the same name and key args may hold at a time (single-holder gripper,
  // single-cell agent, single-container object).
  std::vector<std::size_t> functional_keys;
  bool functional = false;
  bool hidden = false;  // excluded from perception
  // Message templates; empty = built-in default. Placeholders: {fact}, {obs},
  // {argN}, {obsN} (argN/obsN render entity labels when declared).
  std::string missing_msg;
  std::string unexpected_msg;
  std::string mismatch_msg;
};

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

struct GridSpec {
  int width = 0;
  int height = 0;
  std::map<std::string, Cell> landmarks;  // entity id -> cell
  std::set<Cell> obstacles;
  std::string agent;  // entity id of the vehicle
  Cell start;
};

struct Domain {
  std::string name;
  std::string world_kind;  // "tabletop" or "grid"
  std::map<std::string, Entity> entities;
  std::map<std::string, PredicateDecl> predicates;
  std::map<std::string, MovementPrimitive> primitives;
  std::map<std::string, ActionTemplate> actions;
  SymbolicState initial_state;
  std::map<std::string, Task> tasks;
  std::optional<GridSpec> grid;

  const PredicateDecl& predicate(const std::string& n) const;
  // Entity label for message rendering: "label" attribute when present.
  std::string render_arg(const std::string& id) const;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownPredicate : DomainError {
  using DomainError::DomainError;
};
struct PreconditionViolation : DomainError {
  using DomainError::DomainError;
};
struct InvariantBreach : DomainError {
  using DomainError::DomainError;
};
struct ChainBroken : DomainError {
  using DomainError::DomainError;
};

// Grounds `action` against its template in `domain`.
std::vector<GroundPrimitive> ground_action(const Domain& domain,
                                           const SemanticAction& action);
GroundPrimitive ground_primitive(const Domain& domain, const std::string& name,
                                 const std::vector<std::string>& args);

// Unsatisfied preconditions in declaration order; empty = satisfied.
std::vector<Predicate> check_preconditions(const Domain& domain,
                                           const SymbolicState& state,
                                           const GroundPrimitive& prim);

// (state \ del) ∪ add. Deletions first, additions win on overlap. Throws
// PreconditionViolation when preconditions are unsatisfied and
// InvariantBreach when a functional constraint would be violated.
SymbolicState apply_effects(const Domain& domain, const SymbolicState& state,
                            const GroundPrimitive& prim);

// Effect application without the precondition gate (fault paths, prediction).
SymbolicState apply_effects_unchecked(const Domain& domain,
                                      const SymbolicState& state,
                                      const GroundPrimitive& prim);

// Folds apply_effects over the action's primitives; throws ChainBroken when
// an intermediate primitive's preconditions fail in the predicted chain.
SymbolicState expected_successor(const Domain& domain,
                                 const SymbolicState& state,
                                 const SemanticAction& action);

// Lenient fold used by perception when the strict chain is broken.
SymbolicState predicted_successor(const Domain& domain,
                                  const SymbolicState& state,
                                  const SemanticAction& action);

bool satisfies(const SymbolicState& state, const Goal& goal);

// Applies raw add/del fact sets under the domain's functional constraints.
SymbolicState apply_fact_sets(const Domain& domain, const SymbolicState& state,
                              const std::vector<Predicate>& del,
                              const std::vector<Predicate>& add);

}  // namespace hicrisp
