#include "hicrisp/remote_planner.hpp"

#include <cmath>

#include <httplib.h>

namespace hicrisp {

RemotePlanner::RemotePlanner(const Domain& domain, std::string endpoint,
                             double timeout_seconds, std::string bearer_token)
    : domain_(domain),
      endpoint_(std::move(endpoint)),
      timeout_seconds_(timeout_seconds),
      bearer_token_(std::move(bearer_token)) {
  if (endpoint_.rfind("http://", 0) != 0 && endpoint_.rfind("https://", 0) != 0)
    endpoint_ = "http://" + endpoint_;
}

nlohmann::json RemotePlanner::build_request(const Task* task,
                                            const SymbolicState& state,
                                            const PromptBundle* prompt) const {
  nlohmann::json req;
  req["protocol"] = "hicrisp/1";
  if (task) req["task"] = task->text;
  auto facts = nlohmann::json::array();
  for (const auto& f : state.facts) facts.push_back(f.str());
  req["state_facts"] = facts;
  auto schema = nlohmann::json::array();
  for (const auto& [name, tpl] : domain_.actions) {
    nlohmann::json a;
    a["name"] = name;
    a["params"] = tpl.params;
    schema.push_back(a);
  }
  req["action_schema"] = schema;
  if (prompt) {
    req["task"] = prompt->task_text;
    req["error_info"] = prompt->error_info;
    auto hist = nlohmann::json::array();
    for (const auto& [action, info] : prompt->history)
      hist.push_back({{"action", action}, {"info", info}});
    req["history"] = hist;
    req["preamble"] = prompt->predefined_preamble;
  }
  return req;
}

std::vector<SemanticAction> RemotePlanner::call(const std::string& path,
                                                const nlohmann::json& request) {
  httplib::Client client(endpoint_);
  const auto secs = static_cast<time_t>(timeout_seconds_);
  const auto usecs = static_cast<time_t>(
      (timeout_seconds_ - std::floor(timeout_seconds_)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  if (!bearer_token_.empty()) client.set_bearer_token_auth(bearer_token_);

  auto res = client.Post(path, request.dump(), "application/json");
  if (!res) {
    auto err = httplib::to_string(res.error());
    if (res.error() == httplib::Error::ConnectionTimeout ||
        res.error() == httplib::Error::Read)
      throw RemoteTimeout("remote planner timed out: " + err);
    throw RemoteTransport("remote planner unreachable: " + err);
  }
  if (res->status != 200)
    throw RemoteTransport("remote planner returned HTTP " +
                          std::to_string(res->status));

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw RemoteSchemaViolation(std::string("malformed response body: ") + e.what());
  }
  if (!body.contains("actions") || !body["actions"].is_array())
    throw RemoteSchemaViolation("response lacks an 'actions' array");

  std::vector<SemanticAction> actions;
  for (const auto& a : body["actions"]) {
    if (!a.contains("name") || !a["name"].is_string())
      throw RemoteSchemaViolation("action entry lacks a name");
    SemanticAction act;
    act.name = a["name"].get<std::string>();
    for (const auto& p : a.value("params", nlohmann::json::array()))
      act.args.push_back(p.get<std::string>());
    actions.push_back(std::move(act));
  }
  try {
    validate_plan(domain_, actions);
  } catch (const DomainError& e) {
    throw RemoteSchemaViolation(e.what());
  }
  return actions;
}

std::vector<SemanticAction> RemotePlanner::plan(const SymbolicState& initial,
                                                const Task& task) {
  return call("/plan", build_request(&task, initial, nullptr));
}

SemanticAction RemotePlanner::correct(const SymbolicState& error_state,
                                      const PromptBundle& prompt) {
  auto actions = call("/correct", build_request(nullptr, error_state, &prompt));
  if (actions.size() != 1)
    throw RemoteSchemaViolation("correction must contain exactly one action, got " +
                                std::to_string(actions.size()));
  return actions.front();
}

}  // namespace hicrisp
