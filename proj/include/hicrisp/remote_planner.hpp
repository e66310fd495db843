#pragma once

#include <string>

#include "hicrisp/planner.hpp"

namespace hicrisp {

struct RemoteError : PlannerError {
  using PlannerError::PlannerError;
};
struct RemoteTimeout : RemoteError {
  using RemoteError::RemoteError;
};
struct RemoteTransport : RemoteError {
  using RemoteError::RemoteError;
};
struct RemoteSchemaViolation : RemoteError {
  using RemoteError::RemoteError;
};

// HTTP client for an external planning service speaking protocol hicrisp/1:
// POST /plan and POST /correct with JSON bodies. Every request carries the
// full domain action schema so a stateless service can answer; every
// response is validated against the domain before it reaches the engine.
class RemotePlanner : public Planner {
 public:
  // `endpoint` is host:port or http://host:port. `bearer_token`, when
  // non-empty, is sent as an Authorization header.
  RemotePlanner(const Domain& domain, std::string endpoint,
                double timeout_seconds = 30.0, std::string bearer_token = "");

  std::vector<SemanticAction> plan(const SymbolicState& initial,
                                   const Task& task) override;
  SemanticAction correct(const SymbolicState& error_state,
                         const PromptBundle& prompt) override;
  std::string kind() const override { return "remote"; }

  nlohmann::json build_request(const Task* task, const SymbolicState& state,
                               const PromptBundle* prompt) const;

 private:
  std::vector<SemanticAction> call(const std::string& path,
                                   const nlohmann::json& request);

  const Domain& domain_;
  std::string endpoint_;
  double timeout_seconds_;
  std::string bearer_token_;
};

}  // namespace hicrisp
