#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hicrisp/environment.hpp"
#include "hicrisp/world.hpp"

namespace hicrisp {

struct ScriptedCorrection {
  std::string match;  // substring of the error info
  SemanticAction action;
};

struct Script {
  std::map<std::string, std::vector<SemanticAction>> plans;  // task id -> plan
  std::vector<ScriptedCorrection> corrections;               // first match wins
};

// A scenario binds a domain to a task, a fault schedule and (optionally) a
// scripted plan, so known failure cases replay deterministically.
struct Scenario {
  Domain domain;
  std::string domain_path;
  std::string task_id;
  std::vector<FaultRule> faults;
  Script script;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Domain load_domain(const std::filesystem::path& file);
Domain parse_domain(const nlohmann::json& doc, const std::string& origin);

// `file` may be a bare domain file (empty fault schedule, tasks as declared)
// or a scenario file referencing one via its "domain" key.
Scenario load_scenario(const std::filesystem::path& file);

std::vector<FaultRule> parse_fault_rules(const nlohmann::json& arr,
                                         const std::string& origin);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

// Structural checks beyond what parsing enforces: declared predicate symbols
// and arities everywhere, disjoint add/del sets, check rules referencing
// declared primitives, functional consistency of the initial state,
// entity-kind mismatches (warnings only).
ValidationReport validate_domain(const Domain& domain);

}  // namespace hicrisp
