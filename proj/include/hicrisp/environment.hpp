#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hicrisp/world.hpp"

namespace hicrisp {

enum class FaultLevel { low, high };

struct FaultPersistence {
  enum Kind { transient, until, unrecoverable } kind = transient;
  Predicate until_fact;  // meaningful when kind == until
};

// One declarative injected deviation. Trigger fields are conjunctive; unset
// fields match anything. `probability` < 0 means no probabilistic gate.
struct FaultRule {
  std::optional<int> step;        // semantic-action index in the plan, 0-based
  std::string primitive;          // "" = any primitive
  std::optional<int> attempt;     // nth execution of the primitive in the step
  double probability = -1.0;      // in [0,1] when set
  FaultLevel level = FaultLevel::low;
  bool coverable = false;
  FaultPersistence persistence;
  std::string message;
  // Low-level faults suppress declared effects by default. High-level faults
  // apply the corrupt sets instead of the nominal ones.
  std::vector<Predicate> corrupt_add;
  std::vector<Predicate> corrupt_del;
  std::optional<Cell> obstacle;    // grid: insert obstacle before traversal
  std::string redirect;            // grid: landmark actually driven to
};

struct Fault {
  FaultLevel level;
  std::string message;
  bool coverable = false;
  const FaultRule* rule = nullptr;
};

// Context a rule is matched against.
struct ExecContext {
  int step = 0;
  std::string primitive;
  int attempt = 1;
};

// Deterministic fault source. One uniform draw is consumed per primitive
// execution regardless of whether any probabilistic rule matches, so the
// fault sequence depends only on (rules, seed, execution order).
class FaultInjector {
 public:
  FaultInjector(std::vector<FaultRule> rules, std::uint64_t seed);

  std::optional<Fault> inject(const ExecContext& ctx,
                              const SymbolicState& state);

 private:
  std::vector<FaultRule> rules_;
  std::vector<bool> fired_;  // transient rules fire at most once
  std::mt19937_64 rng_;
};

struct PerceptionReport {
  bool flag = true;
  std::string info;
  SymbolicState observed;
};

struct PrimitiveResult {
  bool ok = true;
  std::optional<Fault> fault;
  int path_length = -1;  // grid navigations: traversed cells this execution
};

// 4-connected shortest path, endpoints excluded/included as [from..to].
// Empty optional = blocked; from == to yields a single-cell path.
std::optional<std::vector<Cell>> route(const GridSpec& grid, Cell from, Cell to,
                                       const std::set<Cell>& obstacles);

// A live world owned by exactly one run: symbolic state plus, for grid
// domains, the vehicle position, mutable obstacle set and visit log.
class Environment {
 public:
  Environment(const Domain& domain, std::vector<FaultRule> faults,
              std::uint64_t seed);

  const Domain& domain() const { return domain_; }
  const SymbolicState& state() const { return state_; }
  const std::vector<std::string>& visit_log() const { return visit_log_; }
  Cell agv_cell() const { return agv_cell_; }
  const std::set<Cell>& obstacles() const { return obstacles_; }

  PrimitiveResult execute_primitive(const GroundPrimitive& prim,
                                    const ExecContext& ctx);

  PerceptionReport perceive(const SymbolicState& expected) const;

 private:
  PrimitiveResult execute_navigation(const GroundPrimitive& prim,
                                     const std::optional<Fault>& fault);

  const Domain& domain_;
  SymbolicState state_;
  FaultInjector injector_;
  std::set<Cell> obstacles_;
  Cell agv_cell_{};
  std::vector<std::string> visit_log_;
};

// Warm/cool color classification used by the tabletop task family.
bool is_warm_color(const std::string& color);
bool is_cool_color(const std::string& color);

}  // namespace hicrisp
