#pragma once

#include "pd/llm/gateway.hpp"
#include "pd/pipeline/templates.hpp"

namespace pd::pipeline {

/// What a step needs to talk to a model: the gateway, the shipped templates,
/// and which provider serves this bot.
struct ModelContext {
  const llm::Gateway& gateway;
  const Templates& templates;
  llm::Provider provider = llm::Provider::scripted;
};

/// A step could not get a usable answer out of the model.
class PipelineError : public Error {
 public:
  explicit PipelineError(const std::string& message) : Error(ErrorCode::provider, message) {}
};

}  // namespace pd::pipeline
