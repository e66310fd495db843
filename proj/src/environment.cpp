#include "hicrisp/environment.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace hicrisp {

bool is_warm_color(const std::string& color) {
  return color == "red" || color == "orange" || color == "yellow";
}

bool is_cool_color(const std::string& color) {
  return color == "green" || color == "blue" || color == "purple";
}

FaultInjector::FaultInjector(std::vector<FaultRule> rules, std::uint64_t seed)
    : rules_(std::move(rules)), fired_(rules_.size(), false), rng_(seed) {}

std::optional<Fault> FaultInjector::inject(const ExecContext& ctx,
                                           const SymbolicState& state) {
  // One draw per execution, before any matching.
  const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);

  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const FaultRule& r = rules_[i];
    if (fired_[i]) continue;  // transient and retired until-rules
    if (r.step && *r.step != ctx.step) continue;
    if (!r.primitive.empty() && r.primitive != ctx.primitive) continue;
    if (r.attempt && *r.attempt != ctx.attempt) continue;
    if (r.persistence.kind == FaultPersistence::until &&
        state.holds(r.persistence.until_fact)) {
      fired_[i] = true;
      continue;
    }
    if (r.probability >= 0.0 && draw >= r.probability) continue;
    if (r.persistence.kind == FaultPersistence::transient) fired_[i] = true;
    return Fault{r.level, r.message, r.coverable, &r};
  }
  return std::nullopt;
}

std::optional<std::vector<Cell>> route(const GridSpec& grid, Cell from, Cell to,
                                       const std::set<Cell>& obstacles) {
  auto in_bounds = [&](Cell c) {
    return c.x >= 0 && c.x < grid.width && c.y >= 0 && c.y < grid.height;
  };
  if (!in_bounds(from) || !in_bounds(to)) return std::nullopt;
  if (from == to) return std::vector<Cell>{from};

  std::map<Cell, Cell> parent;
  std::deque<Cell> queue{from};
  parent[from] = from;
  const Cell deltas[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    if (c == to) {
      std::vector<Cell> path;
      for (Cell p = to; !(p == from); p = parent[p]) path.push_back(p);
      path.push_back(from);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (const Cell& d : deltas) {
      Cell n{c.x + d.x, c.y + d.y};
      if (!in_bounds(n) || obstacles.count(n) || parent.count(n)) continue;
      parent[n] = c;
      queue.push_back(n);
    }
  }
  return std::nullopt;
}

Environment::Environment(const Domain& domain, std::vector<FaultRule> faults,
                         std::uint64_t seed)
    : domain_(domain),
      state_(domain.initial_state),
      injector_(std::move(faults), seed) {
  if (domain.grid) {
    obstacles_ = domain.grid->obstacles;
    agv_cell_ = domain.grid->start;
  }
}

PrimitiveResult Environment::execute_primitive(const GroundPrimitive& prim,
                                               const ExecContext& ctx) {
  auto fault = injector_.inject(ctx, state_);

  auto violations = check_preconditions(domain_, state_, prim);
  if (!violations.empty()) {
    PrimitiveResult r;
    r.ok = false;
    r.fault = Fault{FaultLevel::low,
                    "precondition violated: expected " +
                        violations.front().str() + " to hold",
                    true, nullptr};
    return r;
  }

  if (prim.motion == "navigate" && domain_.grid)
    return execute_navigation(prim, fault);

  if (fault) {
    PrimitiveResult r;
    if (fault->level == FaultLevel::high) {
      // Primitive "succeeds" but the state diverges from the nominal model.
      state_ = apply_fact_sets(domain_, state_, fault->rule->corrupt_del,
                               fault->rule->corrupt_add);
      r.ok = true;
      r.fault = fault;
      return r;
    }
    // Low-level: declared effects unapplied, or a corrupted set instead.
    if (!fault->rule->corrupt_add.empty() || !fault->rule->corrupt_del.empty())
      state_ = apply_fact_sets(domain_, state_, fault->rule->corrupt_del,
                               fault->rule->corrupt_add);
    r.ok = false;
    r.fault = fault;
    return r;
  }

  state_ = apply_effects_unchecked(domain_, state_, prim);
  return PrimitiveResult{};
}

PrimitiveResult Environment::execute_navigation(
    const GroundPrimitive& prim, const std::optional<Fault>& fault) {
  const GridSpec& grid = *domain_.grid;
  std::string target;
  for (const auto& a : prim.args)
    if (grid.landmarks.count(a)) {
      target = a;
      break;
    }
  if (target.empty()) {
    PrimitiveResult r;
    r.ok = false;
    r.fault = Fault{FaultLevel::low, "no landmark among arguments of " + prim.str(),
                    false, nullptr};
    return r;
  }

  std::string driven = target;
  if (fault && !fault->rule->redirect.empty()) driven = fault->rule->redirect;
  Cell goal_cell = grid.landmarks.at(driven);

  auto path = route(grid, agv_cell_, goal_cell, obstacles_);
  if (!path) {
    PrimitiveResult r;
    r.ok = false;
    r.fault = Fault{FaultLevel::low,
                    "no route to landmark " + domain_.render_arg(driven), false,
                    nullptr};
    return r;
  }

  // A mid-path obstacle appears after the trajectory was planned.
  if (fault && fault->rule->obstacle) obstacles_.insert(*fault->rule->obstacle);

  int traversed = 0;
  for (std::size_t i = 1; i < path->size(); ++i) {
    if (obstacles_.count((*path)[i])) {
      agv_cell_ = (*path)[i - 1];
      PrimitiveResult r;
      r.ok = false;
      r.path_length = traversed;
      r.fault = Fault{FaultLevel::low,
                      "path obstructed at (" + std::to_string((*path)[i].x) +
                          "," + std::to_string((*path)[i].y) + ")",
                      true, fault ? fault->rule : nullptr};
      return r;
    }
    agv_cell_ = (*path)[i];
    ++traversed;
  }

  PrimitiveResult r;
  r.path_length = traversed;
  if (fault && !fault->rule->redirect.empty()) {
    // Wrong-landmark drive: high-level divergence, no visit recorded.
    state_ = apply_fact_sets(domain_, state_, fault->rule->corrupt_del,
                             fault->rule->corrupt_add);
    r.ok = true;
    r.fault = fault;
    return r;
  }
  state_ = apply_effects_unchecked(domain_, state_, prim);
  if (visit_log_.empty() || visit_log_.back() != target)
    visit_log_.push_back(target);
  return r;
}

namespace {

std::string expand(std::string tpl, const Domain& domain, const Predicate& fact,
                   const Predicate* observed) {
  auto replace_all = [&tpl](const std::string& key, const std::string& value) {
    for (std::size_t pos; (pos = tpl.find(key)) != std::string::npos;)
      tpl.replace(pos, key.size(), value);
  };
  replace_all("{fact}", fact.str());
  if (observed) replace_all("{obs}", observed->str());
  for (std::size_t i = 0; i < fact.args.size(); ++i)
    replace_all("{arg" + std::to_string(i) + "}",
                domain.render_arg(fact.args[i]));
  if (observed)
    for (std::size_t i = 0; i < observed->args.size(); ++i)
      replace_all("{obs" + std::to_string(i) + "}",
                  domain.render_arg(observed->args[i]));
  return tpl;
}

}  // namespace

PerceptionReport Environment::perceive(const SymbolicState& expected) const {
  auto perceivable = [&](const Predicate& p) {
    auto it = domain_.predicates.find(p.name);
    return it == domain_.predicates.end() || !it->second.hidden;
  };

  // Symmetric difference over perceivable facts, lexicographic order.
  std::vector<std::pair<Predicate, bool>> diffs;  // (fact, missing?)
  for (const auto& f : expected.facts)
    if (perceivable(f) && !state_.holds(f)) diffs.emplace_back(f, true);
  for (const auto& f : state_.facts)
    if (perceivable(f) && !expected.holds(f)) diffs.emplace_back(f, false);
  std::sort(diffs.begin(), diffs.end());

  PerceptionReport report;
  report.observed = state_;
  if (diffs.empty()) return report;

  const auto& [fact, missing] = diffs.front();
  const PredicateDecl* decl = nullptr;
  if (auto it = domain_.predicates.find(fact.name);
      it != domain_.predicates.end())
    decl = &it->second;

  report.flag = false;
  if (missing) {
    // A functional counterpart in the observed state makes this a mismatch
    // ("at landmark C, expected landmark B") rather than a plain absence.
    const Predicate* counterpart = nullptr;
    if (decl && decl->functional) {
      for (const auto& g : state_.facts) {
        if (g.name != fact.name || g == fact) continue;
        bool same_key = true;
        for (auto pos : decl->functional_keys)
          if (pos >= g.args.size() || g.args[pos] != fact.args[pos])
            same_key = false;
        if (same_key) {
          counterpart = &g;
          break;
        }
      }
    }
    if (counterpart) {
      std::string tpl = decl && !decl->mismatch_msg.empty()
                            ? decl->mismatch_msg
                            : "expected {fact} to hold, but observed {obs}";
      report.info = expand(tpl, domain_, fact, counterpart);
    } else {
      std::string tpl = decl && !decl->missing_msg.empty()
                            ? decl->missing_msg
                            : "expected {fact} to hold";
      report.info = expand(tpl, domain_, fact, nullptr);
    }
  } else {
    std::string tpl = decl && !decl->unexpected_msg.empty()
                          ? decl->unexpected_msg
                          : "unexpected fact {fact} present";
    report.info = expand(tpl, domain_, fact, nullptr);
  }
  return report;
}

}  // namespace hicrisp
