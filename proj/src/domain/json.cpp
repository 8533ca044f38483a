#include "pd/domain/json.hpp"

namespace pd::domain {

using nlohmann::json;

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  }
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& v) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    v = it->get<T>();
  } else {
    v.reset();
  }
}

Timestamp get_time(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end()) {
    return parse_rfc3339(it->get<std::string>());
  }
  return Timestamp{};
}

}  // namespace

void to_json(json& j, const MaterialAttachment& v) {
  j = json{{"id", v.id},
           {"filename", v.filename},
           {"content", v.content},
           {"byte_size", v.byte_size},
           {"truncated", v.truncated}};
}

void from_json(const json& j, MaterialAttachment& v) {
  j.at("id").get_to(v.id);
  j.at("filename").get_to(v.filename);
  j.at("content").get_to(v.content);
  j.at("byte_size").get_to(v.byte_size);
  v.truncated = j.value("truncated", false);
}

void to_json(json& j, const Bot& v) {
  j = json{{"id", v.id},
           {"title", v.title},
           {"description", v.description},
           {"model_choice", v.model_choice},
           {"materials", v.materials},
           {"current_version", v.current_version},
           {"status", v.status},
           {"created_at", format_rfc3339(v.created_at)}};
  put_opt(j, "share_token", v.share_token);
}

void from_json(const json& j, Bot& v) {
  j.at("id").get_to(v.id);
  j.at("title").get_to(v.title);
  j.at("description").get_to(v.description);
  j.at("model_choice").get_to(v.model_choice);
  j.at("materials").get_to(v.materials);
  j.at("current_version").get_to(v.current_version);
  j.at("status").get_to(v.status);
  get_opt(j, "share_token", v.share_token);
  v.created_at = get_time(j, "created_at");
}

void to_json(json& j, const Hunk& v) { j = json{{"kind", v.kind}, {"lines", v.lines}}; }

void from_json(const json& j, Hunk& v) {
  j.at("kind").get_to(v.kind);
  j.at("lines").get_to(v.lines);
}

void to_json(json& j, const TrackedDiff& v) {
  j = json{{"hunks", v.hunks},
           {"old_trailing_newline", v.old_trailing_newline},
           {"new_trailing_newline", v.new_trailing_newline}};
}

void from_json(const json& j, TrackedDiff& v) {
  j.at("hunks").get_to(v.hunks);
  v.old_trailing_newline = j.value("old_trailing_newline", false);
  v.new_trailing_newline = j.value("new_trailing_newline", false);
}

void to_json(json& j, const PromptVersion& v) {
  j = json{{"id", v.id},
           {"bot_id", v.bot_id},
           {"full_text", v.full_text},
           {"diff_from_parent", v.diff_from_parent},
           {"provenance", v.provenance},
           {"created_at", format_rfc3339(v.created_at)}};
  put_opt(j, "parent_id", v.parent_id);
  put_opt(j, "origin_correction", v.origin_correction);
}

void from_json(const json& j, PromptVersion& v) {
  j.at("id").get_to(v.id);
  j.at("bot_id").get_to(v.bot_id);
  get_opt(j, "parent_id", v.parent_id);
  j.at("full_text").get_to(v.full_text);
  j.at("diff_from_parent").get_to(v.diff_from_parent);
  j.at("provenance").get_to(v.provenance);
  get_opt(j, "origin_correction", v.origin_correction);
  v.created_at = get_time(j, "created_at");
}

void to_json(json& j, const StudentProfile& v) {
  j = json{{"id", v.id},
           {"name", v.name},
           {"description", v.description},
           {"opening_message", v.opening_message},
           {"scripted_followups", v.scripted_followups},
           {"builtin", v.builtin}};
}

void from_json(const json& j, StudentProfile& v) {
  j.at("id").get_to(v.id);
  j.at("name").get_to(v.name);
  v.description = j.value("description", std::string{});
  j.at("opening_message").get_to(v.opening_message);
  v.scripted_followups = j.value("scripted_followups", std::vector<std::string>{});
  v.builtin = j.value("builtin", false);
}

void to_json(json& j, const Turn& v) {
  j = json{{"role", v.role}, {"text", v.text}};
  put_opt(j, "produced_by_version", v.produced_by_version);
}

void from_json(const json& j, Turn& v) {
  j.at("role").get_to(v.role);
  j.at("text").get_to(v.text);
  get_opt(j, "produced_by_version", v.produced_by_version);
}

void to_json(json& j, const ApprovedSnapshot& v) {
  j = json{{"turn_index", v.turn_index}, {"text", v.text}, {"prompt_version", v.prompt_version}};
}

void from_json(const json& j, ApprovedSnapshot& v) {
  j.at("turn_index").get_to(v.turn_index);
  j.at("text").get_to(v.text);
  j.at("prompt_version").get_to(v.prompt_version);
}

void to_json(json& j, const TestCase& v) {
  j = json{{"id", v.id},
           {"bot_id", v.bot_id},
           {"profile_id", v.profile_id},
           {"transcript", v.transcript},
           {"status", v.status},
           {"next_followup", v.next_followup},
           {"updated_at", format_rfc3339(v.updated_at)}};
  put_opt(j, "approved_snapshot", v.approved_snapshot);
}

void from_json(const json& j, TestCase& v) {
  j.at("id").get_to(v.id);
  j.at("bot_id").get_to(v.bot_id);
  j.at("profile_id").get_to(v.profile_id);
  j.at("transcript").get_to(v.transcript);
  j.at("status").get_to(v.status);
  get_opt(j, "approved_snapshot", v.approved_snapshot);
  v.next_followup = j.value("next_followup", std::size_t{0});
  v.updated_at = get_time(j, "updated_at");
}

void to_json(json& j, const Correction& v) {
  j = json{{"id", v.id},
           {"bot_id", v.bot_id},
           {"test_case_id", v.test_case_id},
           {"turn_index", v.turn_index},
           {"original_text", v.original_text},
           {"corrected_text", v.corrected_text},
           {"created_at", format_rfc3339(v.created_at)}};
}

void from_json(const json& j, Correction& v) {
  j.at("id").get_to(v.id);
  j.at("bot_id").get_to(v.bot_id);
  j.at("test_case_id").get_to(v.test_case_id);
  j.at("turn_index").get_to(v.turn_index);
  j.at("original_text").get_to(v.original_text);
  j.at("corrected_text").get_to(v.corrected_text);
  v.created_at = get_time(j, "created_at");
}

void to_json(json& j, const InferredIntent& v) {
  j = json{{"summary", v.summary}, {"behavioral_rule", v.behavioral_rule}};
}

void from_json(const json& j, InferredIntent& v) {
  j.at("summary").get_to(v.summary);
  j.at("behavioral_rule").get_to(v.behavioral_rule);
}

void to_json(json& j, const CaseVerdict& v) {
  j = json{{"test_case_id", v.test_case_id},
           {"verdict", v.verdict},
           {"rationale", v.rationale},
           {"replayed_response", v.replayed_response}};
}

void from_json(const json& j, CaseVerdict& v) {
  j.at("test_case_id").get_to(v.test_case_id);
  j.at("verdict").get_to(v.verdict);
  j.at("rationale").get_to(v.rationale);
  j.at("replayed_response").get_to(v.replayed_response);
}

void to_json(json& j, const RegressionReport& v) {
  j = json{{"evaluated_cases", v.evaluated_cases}, {"prompt_version", v.prompt_version}};
}

void from_json(const json& j, RegressionReport& v) {
  j.at("evaluated_cases").get_to(v.evaluated_cases);
  j.at("prompt_version").get_to(v.prompt_version);
}

void to_json(json& j, const PipelineRun& v) {
  j = json{{"id", v.id},
           {"bot_id", v.bot_id},
           {"correction_id", v.correction_id},
           {"rewrite_rationale", v.rewrite_rationale},
           {"status", v.status},
           {"created_at", format_rfc3339(v.created_at)},
           {"updated_at", format_rfc3339(v.updated_at)}};
  put_opt(j, "inferred_intent", v.inferred_intent);
  put_opt(j, "proposed_version", v.proposed_version);
  put_opt(j, "regression_report", v.regression_report);
  put_opt(j, "error_detail", v.error_detail);
}

void from_json(const json& j, PipelineRun& v) {
  j.at("id").get_to(v.id);
  j.at("bot_id").get_to(v.bot_id);
  j.at("correction_id").get_to(v.correction_id);
  get_opt(j, "inferred_intent", v.inferred_intent);
  get_opt(j, "proposed_version", v.proposed_version);
  v.rewrite_rationale = j.value("rewrite_rationale", std::string{});
  get_opt(j, "regression_report", v.regression_report);
  j.at("status").get_to(v.status);
  get_opt(j, "error_detail", v.error_detail);
  v.created_at = get_time(j, "created_at");
  v.updated_at = get_time(j, "updated_at");
}

}  // namespace pd::domain
