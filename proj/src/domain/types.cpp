#include "pd/domain/types.hpp"

#include "pd/common/error.hpp"

#include <algorithm>

namespace pd::domain {

std::string_view to_string(ModelChoice v) {
  switch (v) {
    case ModelChoice::openai: return "openai";
    case ModelChoice::anthropic: return "anthropic";
    case ModelChoice::google: return "google";
  }
  return "openai";
}

std::string_view to_string(BotStatus v) {
  return v == BotStatus::draft ? "draft" : "published";
}

std::string_view to_string(Provenance v) {
  switch (v) {
    case Provenance::initial: return "initial";
    case Provenance::pipeline_rewrite: return "pipeline_rewrite";
    case Provenance::manual_edit: return "manual_edit";
    case Provenance::from_template: return "template";
  }
  return "initial";
}

std::string_view to_string(HunkKind v) {
  switch (v) {
    case HunkKind::keep: return "keep";
    case HunkKind::remove: return "delete";
    case HunkKind::insert: return "insert";
  }
  return "keep";
}

std::string_view to_string(Role v) { return v == Role::student ? "student" : "bot"; }

std::string_view to_string(CaseStatus v) {
  switch (v) {
    case CaseStatus::unrun: return "unrun";
    case CaseStatus::awaiting_review: return "awaiting_review";
    case CaseStatus::passed: return "passed";
    case CaseStatus::regressed: return "regressed";
    case CaseStatus::failed: return "failed";
  }
  return "unrun";
}

std::string_view to_string(RunStatus v) {
  switch (v) {
    case RunStatus::running: return "running";
    case RunStatus::awaiting_teacher: return "awaiting_teacher";
    case RunStatus::applied: return "applied";
    case RunStatus::discarded: return "discarded";
    case RunStatus::errored: return "errored";
  }
  return "running";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::regression: return "regression";
    case Verdict::error: return "error";
  }
  return "error";
}

ModelChoice parse_model_choice(std::string_view text) {
  if (text == "openai") return ModelChoice::openai;
  if (text == "anthropic") return ModelChoice::anthropic;
  if (text == "google") return ModelChoice::google;
  throw ValidationError("unknown model_choice '" + std::string(text) +
                        "' (expected openai, anthropic or google)");
}

bool RegressionReport::all_pass() const {
  return std::all_of(evaluated_cases.begin(), evaluated_cases.end(),
                     [](const CaseVerdict& c) { return c.verdict == Verdict::pass; });
}

}  // namespace pd::domain
