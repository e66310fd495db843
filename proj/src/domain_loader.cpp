#include "hicrisp/domain_loader.hpp"

#include <fstream>
#include <set>

namespace hicrisp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

Predicate parse_fact(const json& j, const std::string& origin) {
  if (!j.is_array() || j.empty() || !j[0].is_string())
    fail(origin, "a fact must be an array [predicate, args...]");
  Predicate p;
  p.name = j[0].get<std::string>();
  for (std::size_t i = 1; i < j.size(); ++i) p.args.push_back(j[i].get<std::string>());
  return p;
}

std::vector<Predicate> parse_facts(const json& j, const std::string& origin) {
  std::vector<Predicate> out;
  for (const auto& f : j) out.push_back(parse_fact(f, origin));
  return out;
}

Goal parse_goal(const json& j, const std::string& origin) {
  Goal g;
  if (j.contains("required"))
    for (const auto& f : j["required"]) g.required.insert(parse_fact(f, origin));
  if (j.contains("forbidden"))
    for (const auto& f : j["forbidden"]) g.forbidden.insert(parse_fact(f, origin));
  return g;
}

SemanticAction parse_action_call(const json& j, const std::string& origin) {
  if (!j.is_array() || j.empty()) fail(origin, "an action call must be [name, args...]");
  SemanticAction a;
  a.name = j[0].get<std::string>();
  for (std::size_t i = 1; i < j.size(); ++i) a.args.push_back(j[i].get<std::string>());
  return a;
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open file: " + file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return doc;
}

}  // namespace

Domain parse_domain(const json& doc, const std::string& origin) {
  Domain d;
  d.name = doc.value("name", "unnamed");
  d.world_kind = doc.value("world", "tabletop");

  for (const auto& e : doc.value("entities", json::array())) {
    Entity ent;
    ent.id = e.at("id").get<std::string>();
    ent.kind = e.value("kind", "landmark");
    const json attrs = e.value("attributes", json::object());
    for (const auto& [k, v] : attrs.items())
      ent.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
    if (!d.entities.emplace(ent.id, ent).second)
      fail(origin, "duplicate entity id: " + ent.id);
  }

  for (const auto& p : doc.value("predicates", json::array())) {
    PredicateDecl decl;
    decl.name = p.at("name").get<std::string>();
    decl.arity = p.at("arity").get<std::size_t>();
    if (p.contains("functional")) {
      decl.functional = true;
      for (const auto& k : p["functional"]) decl.functional_keys.push_back(k.get<std::size_t>());
    }
    decl.hidden = p.value("hidden", false);
    decl.missing_msg = p.value("missing_msg", "");
    decl.unexpected_msg = p.value("unexpected_msg", "");
    decl.mismatch_msg = p.value("mismatch_msg", "");
    if (!d.predicates.emplace(decl.name, decl).second)
      fail(origin, "duplicate predicate: " + decl.name);
  }

  for (const auto& p : doc.value("primitives", json::array())) {
    MovementPrimitive prim;
    prim.name = p.at("name").get<std::string>();
    for (const auto& a : p.value("params", json::array()))
      prim.params.push_back(a.get<std::string>());
    prim.preconditions = parse_facts(p.value("pre", json::array()), origin);
    prim.add_effects = parse_facts(p.value("add", json::array()), origin);
    prim.del_effects = parse_facts(p.value("del", json::array()), origin);
    prim.motion = p.value("motion", "");
    for (const auto& c : p.value("checks", json::array())) {
      CheckRule rule;
      rule.violation = c.at("violation").get<std::string>();
      for (const auto& call : c.value("fix", json::array())) {
        CheckRule::Call rc;
        rc.name = call[0].get<std::string>();
        for (std::size_t i = 1; i < call.size(); ++i) rc.args.push_back(call[i].get<std::string>());
        rule.fix.push_back(std::move(rc));
      }
      prim.checks.push_back(std::move(rule));
    }
    if (!d.primitives.emplace(prim.name, prim).second)
      fail(origin, "duplicate primitive: " + prim.name);
  }

  for (const auto& a : doc.value("actions", json::array())) {
    ActionTemplate tpl;
    tpl.name = a.at("name").get<std::string>();
    for (const auto& x : a.value("params", json::array()))
      tpl.params.push_back(x.get<std::string>());
    for (const auto& x : a.value("kinds", json::array()))
      tpl.param_kinds.push_back(x.get<std::string>());
    tpl.param_kinds.resize(tpl.params.size(), "");
    for (const auto& call : a.value("primitives", json::array())) {
      PrimitiveCall pc;
      pc.name = call[0].get<std::string>();
      for (std::size_t i = 1; i < call.size(); ++i) pc.args.push_back(call[i].get<std::string>());
      tpl.primitives.push_back(std::move(pc));
    }
    if (tpl.primitives.empty())
      fail(origin, "action " + tpl.name + " has an empty primitive list");
    if (!d.actions.emplace(tpl.name, tpl).second)
      fail(origin, "duplicate action: " + tpl.name);
  }

  for (const auto& f : doc.value("initial_state", json::array()))
    d.initial_state.facts.insert(parse_fact(f, origin));

  for (const auto& t : doc.value("tasks", json::array())) {
    Task task;
    task.id = t.at("id").get<std::string>();
    task.text = t.at("text").get<std::string>();
    if (task.text.empty()) fail(origin, "task " + task.id + " has empty text");
    task.goal = parse_goal(t.value("goal", json::object()), origin);
    if (!d.tasks.emplace(task.id, task).second)
      fail(origin, "duplicate task id: " + task.id);
  }

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    GridSpec grid;
    grid.width = g.at("width").get<int>();
    grid.height = g.at("height").get<int>();
    grid.agent = g.value("agent", "agv");
    grid.start = Cell{g.at("start")[0].get<int>(), g.at("start")[1].get<int>()};
    const json landmarks = g.value("landmarks", json::object());
    for (const auto& [id, cell] : landmarks.items())
      grid.landmarks[id] = Cell{cell[0].get<int>(), cell[1].get<int>()};
    for (const auto& c : g.value("obstacles", json::array()))
      grid.obstacles.insert(Cell{c[0].get<int>(), c[1].get<int>()});
    d.grid = grid;
  }
  return d;
}

Domain load_domain(const std::filesystem::path& file) {
  return parse_domain(read_json(file), file.string());
}

std::vector<FaultRule> parse_fault_rules(const json& arr,
                                         const std::string& origin) {
  std::vector<FaultRule> rules;
  for (const auto& r : arr) {
    FaultRule rule;
    const auto& trig = r.value("trigger", json::object());
    if (trig.contains("step")) rule.step = trig["step"].get<int>();
    rule.primitive = trig.value("primitive", "");
    if (trig.contains("attempt")) rule.attempt = trig["attempt"].get<int>();
    if (trig.contains("p")) {
      rule.probability = trig["p"].get<double>();
      if (rule.probability < 0.0 || rule.probability > 1.0)
        fail(origin, "fault probability out of [0,1]");
    }
    std::string level = r.value("level", "low");
    if (level == "low")
      rule.level = FaultLevel::low;
    else if (level == "high")
      rule.level = FaultLevel::high;
    else
      fail(origin, "fault level must be 'low' or 'high'");
    rule.coverable = r.value("coverable", false);
    const auto& pers = r.value("persistence", json("transient"));
    if (pers.is_string()) {
      std::string s = pers.get<std::string>();
      if (s == "transient")
        rule.persistence.kind = FaultPersistence::transient;
      else if (s == "unrecoverable")
        rule.persistence.kind = FaultPersistence::unrecoverable;
      else
        fail(origin, "unknown persistence: " + s);
    } else if (pers.is_object() && pers.contains("until")) {
      rule.persistence.kind = FaultPersistence::until;
      rule.persistence.until_fact = parse_fact(pers["until"], origin);
    } else {
      fail(origin, "malformed persistence");
    }
    rule.message = r.value("message", "");
    if (rule.message.empty()) fail(origin, "fault rule needs a message");
    rule.corrupt_add = parse_facts(r.value("corrupt_add", json::array()), origin);
    rule.corrupt_del = parse_facts(r.value("corrupt_del", json::array()), origin);
    if (r.contains("obstacle"))
      rule.obstacle = Cell{r["obstacle"][0].get<int>(), r["obstacle"][1].get<int>()};
    rule.redirect = r.value("redirect", "");
    rules.push_back(std::move(rule));
  }
  return rules;
}

Scenario load_scenario(const std::filesystem::path& file) {
  json doc = read_json(file);
  Scenario sc;
  if (doc.contains("domain") && doc["domain"].is_string()) {
    auto rel = doc["domain"].get<std::string>();
    auto path = file.parent_path() / rel;
    sc.domain = load_domain(path);
    sc.domain_path = path.string();
  } else {
    // A bare domain file serves as a fault-free scenario.
    sc.domain = parse_domain(doc, file.string());
    sc.domain_path = file.string();
  }
  sc.task_id = doc.value("task", "");
  sc.faults = parse_fault_rules(doc.value("faults", json::array()), file.string());
  if (doc.contains("script")) {
    const auto& s = doc["script"];
    const json plans = s.value("plans", json::object());
    for (const auto& [task_id, plan] : plans.items()) {
      std::vector<SemanticAction> actions;
      for (const auto& a : plan) actions.push_back(parse_action_call(a, file.string()));
      sc.script.plans[task_id] = std::move(actions);
    }
    if (s.contains("plan") && !sc.task_id.empty()) {
      std::vector<SemanticAction> actions;
      for (const auto& a : s["plan"]) actions.push_back(parse_action_call(a, file.string()));
      sc.script.plans[sc.task_id] = std::move(actions);
    }
    for (const auto& c : s.value("corrections", json::array())) {
      ScriptedCorrection corr;
      corr.match = c.at("match").get<std::string>();
      corr.action = parse_action_call(c.at("action"), file.string());
      sc.script.corrections.push_back(std::move(corr));
    }
  }
  return sc;
}

namespace {

void check_fact_decl(const Domain& d, const Predicate& p,
                     const std::string& where, ValidationReport& rep,
                     bool allow_vars) {
  auto it = d.predicates.find(p.name);
  if (it == d.predicates.end()) {
    rep.errors.push_back(where + ": undeclared predicate " + p.name);
    return;
  }
  if (p.args.size() != it->second.arity)
    rep.errors.push_back(where + ": " + p.str() + " has arity " +
                         std::to_string(p.args.size()) + ", declared " +
                         std::to_string(it->second.arity));
  if (!allow_vars)
    for (const auto& a : p.args)
      if (a != "*" && !d.entities.count(a))
        rep.errors.push_back(where + ": unknown entity " + a + " in " + p.str());
}

}  // namespace

ValidationReport validate_domain(const Domain& d) {
  ValidationReport rep;

  for (const auto& [name, prim] : d.primitives) {
    const std::string where = "primitive " + name;
    for (const auto& p : prim.preconditions) check_fact_decl(d, p, where, rep, true);
    for (const auto& p : prim.add_effects) {
      check_fact_decl(d, p, where, rep, true);
      for (const auto& a : p.args)
        if (a == "*")
          rep.errors.push_back(where + ": wildcard not allowed in add effect " + p.str());
    }
    for (const auto& p : prim.del_effects) check_fact_decl(d, p, where, rep, true);
    std::set<Predicate> adds(prim.add_effects.begin(), prim.add_effects.end());
    for (const auto& p : prim.del_effects)
      if (adds.count(p))
        rep.errors.push_back(where + ": " + p.str() + " in both add and del effects");
    for (const auto& c : prim.checks)
      for (const auto& call : c.fix)
        if (!d.primitives.count(call.name))
          rep.errors.push_back(where + ": check fix references unknown primitive " + call.name);
    if (prim.motion == "navigate" && !d.grid)
      rep.errors.push_back(where + ": navigate motion in a domain without a grid");
  }

  for (const auto& [name, tpl] : d.actions) {
    const std::string where = "action " + name;
    for (const auto& call : tpl.primitives) {
      auto it = d.primitives.find(call.name);
      if (it == d.primitives.end()) {
        rep.errors.push_back(where + ": unknown primitive " + call.name);
        continue;
      }
      if (call.args.size() != it->second.params.size())
        rep.errors.push_back(where + ": primitive call " + call.name + " arity mismatch");
      std::set<std::string> formals(tpl.params.begin(), tpl.params.end());
      for (const auto& a : call.args)
        if (!formals.count(a) && !d.entities.count(a))
          rep.errors.push_back(where + ": argument " + a + " is neither a parameter nor an entity");
    }
  }

  for (const auto& f : d.initial_state.facts)
    check_fact_decl(d, f, "initial_state", rep, false);
  try {
    apply_fact_sets(d, SymbolicState{}, {},
                    {d.initial_state.facts.begin(), d.initial_state.facts.end()});
  } catch (const InvariantBreach& e) {
    rep.errors.push_back(std::string("initial_state: ") + e.what());
  } catch (const DomainError&) {
    // already reported above
  }

  for (const auto& [id, task] : d.tasks) {
    const std::string where = "task " + id;
    for (const auto& f : task.goal.required) {
      check_fact_decl(d, f, where, rep, false);
      if (task.goal.forbidden.count(f))
        rep.errors.push_back(where + ": " + f.str() + " both required and forbidden");
    }
    for (const auto& f : task.goal.forbidden) check_fact_decl(d, f, where, rep, false);
  }

  if (d.grid) {
    std::set<Cell> seen;
    for (const auto& [id, cell] : d.grid->landmarks) {
      if (!d.entities.count(id))
        rep.errors.push_back("grid: landmark " + id + " is not a declared entity");
      if (!seen.insert(cell).second)
        rep.errors.push_back("grid: landmarks share cell (" + std::to_string(cell.x) +
                             "," + std::to_string(cell.y) + ")");
    }
    auto s = d.grid->start;
    if (s.x < 0 || s.x >= d.grid->width || s.y < 0 || s.y >= d.grid->height)
      rep.errors.push_back("grid: start cell out of bounds");
    if (d.grid->obstacles.count(s))
      rep.errors.push_back("grid: start cell is an obstacle");
  }

  for (const auto& [id, ent] : d.entities) {
    static const std::set<std::string> kinds{"block", "bowl",  "box",     "cylinder",
                                             "landmark", "obstacle", "agent", "gripper"};
    if (!kinds.count(ent.kind))
      rep.warnings.push_back("entity " + id + " has unusual kind '" + ent.kind + "'");
  }
  return rep;
}

}  // namespace hicrisp
