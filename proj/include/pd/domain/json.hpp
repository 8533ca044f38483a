#pragma once

#include "pd/domain/types.hpp"

#include <nlohmann/json.hpp>

// JSON mappings for every persisted and wire-visible domain type. Optional
// fields are omitted when absent; timestamps are RFC 3339 strings.
namespace pd::domain {

void to_json(nlohmann::json& j, const MaterialAttachment& v);
void from_json(const nlohmann::json& j, MaterialAttachment& v);
void to_json(nlohmann::json& j, const Bot& v);
void from_json(const nlohmann::json& j, Bot& v);
void to_json(nlohmann::json& j, const Hunk& v);
void from_json(const nlohmann::json& j, Hunk& v);
void to_json(nlohmann::json& j, const TrackedDiff& v);
void from_json(const nlohmann::json& j, TrackedDiff& v);
void to_json(nlohmann::json& j, const PromptVersion& v);
void from_json(const nlohmann::json& j, PromptVersion& v);
void to_json(nlohmann::json& j, const StudentProfile& v);
void from_json(const nlohmann::json& j, StudentProfile& v);
void to_json(nlohmann::json& j, const Turn& v);
void from_json(const nlohmann::json& j, Turn& v);
void to_json(nlohmann::json& j, const ApprovedSnapshot& v);
void from_json(const nlohmann::json& j, ApprovedSnapshot& v);
void to_json(nlohmann::json& j, const TestCase& v);
void from_json(const nlohmann::json& j, TestCase& v);
void to_json(nlohmann::json& j, const Correction& v);
void from_json(const nlohmann::json& j, Correction& v);
void to_json(nlohmann::json& j, const InferredIntent& v);
void from_json(const nlohmann::json& j, InferredIntent& v);
void to_json(nlohmann::json& j, const CaseVerdict& v);
void from_json(const nlohmann::json& j, CaseVerdict& v);
void to_json(nlohmann::json& j, const RegressionReport& v);
void from_json(const nlohmann::json& j, RegressionReport& v);
void to_json(nlohmann::json& j, const PipelineRun& v);
void from_json(const nlohmann::json& j, PipelineRun& v);

NLOHMANN_JSON_SERIALIZE_ENUM(ModelChoice, {{ModelChoice::openai, "openai"},
                                           {ModelChoice::anthropic, "anthropic"},
                                           {ModelChoice::google, "google"}})
NLOHMANN_JSON_SERIALIZE_ENUM(BotStatus, {{BotStatus::draft, "draft"},
                                         {BotStatus::published, "published"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Provenance, {{Provenance::initial, "initial"},
                                          {Provenance::pipeline_rewrite, "pipeline_rewrite"},
                                          {Provenance::manual_edit, "manual_edit"},
                                          {Provenance::from_template, "template"}})
NLOHMANN_JSON_SERIALIZE_ENUM(HunkKind, {{HunkKind::keep, "keep"},
                                        {HunkKind::remove, "delete"},
                                        {HunkKind::insert, "insert"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Role, {{Role::student, "student"}, {Role::bot, "bot"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CaseStatus, {{CaseStatus::unrun, "unrun"},
                                          {CaseStatus::awaiting_review, "awaiting_review"},
                                          {CaseStatus::passed, "passed"},
                                          {CaseStatus::regressed, "regressed"},
                                          {CaseStatus::failed, "failed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(RunStatus, {{RunStatus::running, "running"},
                                         {RunStatus::awaiting_teacher, "awaiting_teacher"},
                                         {RunStatus::applied, "applied"},
                                         {RunStatus::discarded, "discarded"},
                                         {RunStatus::errored, "errored"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Verdict, {{Verdict::pass, "pass"},
                                       {Verdict::regression, "regression"},
                                       {Verdict::error, "error"}})

}  // namespace pd::domain
