#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hicrisp/domain_loader.hpp"
#include "hicrisp/world.hpp"

namespace hicrisp {

struct PromptBundle {
  std::string task_text;
  std::string current_state_rendering;  // facts in lexicographic order
  std::string error_info;               // ψ, the stack top's cause
  std::vector<std::pair<std::string, std::string>> history;  // bottom-up
  std::string predefined_preamble;
};

// Deterministic prompt assembly; two permutations of the same fact set
// produce identical renderings.
PromptBundle assemble_prompt(
    const Task& task, const SymbolicState& state, const std::string& error_info,
    const std::vector<std::pair<std::string, std::string>>& history);

struct PlannerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoPlanFound : PlannerError {
  using PlannerError::PlannerError;
};
struct NoCorrectionRule : PlannerError {
  using PlannerError::PlannerError;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::vector<SemanticAction> plan(const SymbolicState& initial,
                                           const Task& task) = 0;
  // Exactly one action per consult; multi-step recovery emerges from the
  // correction loop's iterations.
  virtual SemanticAction correct(const SymbolicState& error_state,
                                 const PromptBundle& prompt) = 0;
  virtual std::string kind() const = 0;
};

// Breadth-first search over the symbolic transition system, lexicographic
// tie-breaking on (action name, params), depth cap 12. Shortest plans,
// deterministically.
class OraclePlanner : public Planner {
 public:
  explicit OraclePlanner(const Domain& domain, int depth_cap = 12);

  std::vector<SemanticAction> plan(const SymbolicState& initial,
                                   const Task& task) override;
  SemanticAction correct(const SymbolicState& error_state,
                         const PromptBundle& prompt) override;
  std::string kind() const override { return "oracle"; }

  // BFS to an arbitrary goal; shared by plan() and correct().
  std::vector<SemanticAction> search(const SymbolicState& initial,
                                     const Goal& goal) const;

 private:
  const Domain& domain_;
  int depth_cap_;
  std::vector<SemanticAction> groundings_;  // sorted
};

// Replays fixed plans and (error-pattern -> action) correction rules; the
// default for the shipped regression scenarios.
class ScriptedPlanner : public Planner {
 public:
  ScriptedPlanner(const Domain& domain, Script script);

  std::vector<SemanticAction> plan(const SymbolicState& initial,
                                   const Task& task) override;
  SemanticAction correct(const SymbolicState& error_state,
                         const PromptBundle& prompt) override;
  std::string kind() const override { return "scripted"; }

 private:
  const Domain& domain_;
  Script script_;
};

// Extracts the first declared-predicate fact rendered canonically inside an
// error message; second element is true when the fact is unwanted (the
// message marks it "unexpected") rather than missing.
std::optional<std::pair<Predicate, bool>> parse_fact_from_info(
    const Domain& domain, const std::string& info);

// Names and arities checked against the domain; throws DomainError.
void validate_plan(const Domain& domain,
                   const std::vector<SemanticAction>& actions);

}  // namespace hicrisp
