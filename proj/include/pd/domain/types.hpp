#pragma once

#include "pd/common/clock.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pd::domain {

enum class ModelChoice { openai, anthropic, google };
enum class BotStatus { draft, published };
enum class Provenance { initial, pipeline_rewrite, manual_edit, from_template };
enum class HunkKind { keep, remove, insert };
enum class Role { student, bot };
enum class CaseStatus { unrun, awaiting_review, passed, regressed, failed };
enum class RunStatus { running, awaiting_teacher, applied, discarded, errored };
enum class Verdict { pass, regression, error };

std::string_view to_string(ModelChoice v);
std::string_view to_string(BotStatus v);
std::string_view to_string(Provenance v);
std::string_view to_string(HunkKind v);
std::string_view to_string(Role v);
std::string_view to_string(CaseStatus v);
std::string_view to_string(RunStatus v);
std::string_view to_string(Verdict v);

/// Throws ValidationError for anything outside {openai, anthropic, google}.
ModelChoice parse_model_choice(std::string_view text);

struct MaterialAttachment {
  std::string id;
  std::string filename;
  std::string content;
  std::uint64_t byte_size = 0;
  bool truncated = false;

  bool operator==(const MaterialAttachment&) const = default;
};

struct Bot {
  std::string id;
  std::string title;
  std::string description;
  ModelChoice model_choice = ModelChoice::openai;
  std::vector<MaterialAttachment> materials;
  std::string current_version;
  BotStatus status = BotStatus::draft;
  std::optional<std::string> share_token;
  Timestamp created_at{};

  bool operator==(const Bot&) const = default;
};

struct Hunk {
  HunkKind kind = HunkKind::keep;
  std::vector<std::string> lines;

  bool operator==(const Hunk&) const = default;
};

/// Line-granular diff. The trailing-newline flags record whether each side
/// ended with LF, which the line lists alone cannot express.
struct TrackedDiff {
  std::vector<Hunk> hunks;
  bool old_trailing_newline = false;
  bool new_trailing_newline = false;

  bool empty() const { return hunks.empty(); }
  bool operator==(const TrackedDiff&) const = default;
};

struct PromptVersion {
  std::string id;
  std::string bot_id;
  std::optional<std::string> parent_id;
  std::string full_text;
  TrackedDiff diff_from_parent;
  Provenance provenance = Provenance::initial;
  std::optional<std::string> origin_correction;
  Timestamp created_at{};

  bool operator==(const PromptVersion&) const = default;
};

struct StudentProfile {
  std::string id;
  std::string name;
  std::string description;
  std::string opening_message;
  std::vector<std::string> scripted_followups;
  bool builtin = false;

  bool operator==(const StudentProfile&) const = default;
};

struct Turn {
  Role role = Role::student;
  std::string text;
  std::optional<std::string> produced_by_version;

  bool operator==(const Turn&) const = default;
};

struct ApprovedSnapshot {
  std::size_t turn_index = 0;
  std::string text;
  std::string prompt_version;

  bool operator==(const ApprovedSnapshot&) const = default;
};

struct TestCase {
  std::string id;
  std::string bot_id;
  std::string profile_id;
  std::vector<Turn> transcript;
  CaseStatus status = CaseStatus::unrun;
  std::optional<ApprovedSnapshot> approved_snapshot;
  std::size_t next_followup = 0;
  Timestamp updated_at{};

  bool operator==(const TestCase&) const = default;
};

struct Correction {
  std::string id;
  std::string bot_id;
  std::string test_case_id;
  std::size_t turn_index = 0;
  std::string original_text;
  std::string corrected_text;
  Timestamp created_at{};

  bool operator==(const Correction&) const = default;
};

struct InferredIntent {
  std::string summary;
  std::string behavioral_rule;

  bool operator==(const InferredIntent&) const = default;
};

struct CaseVerdict {
  std::string test_case_id;
  Verdict verdict = Verdict::pass;
  std::string rationale;
  std::string replayed_response;

  bool operator==(const CaseVerdict&) const = default;
};

struct RegressionReport {
  std::vector<CaseVerdict> evaluated_cases;
  std::string prompt_version;

  bool all_pass() const;
  bool operator==(const RegressionReport&) const = default;
};

struct PipelineRun {
  std::string id;
  std::string bot_id;
  std::string correction_id;
  std::optional<InferredIntent> inferred_intent;
  std::optional<std::string> proposed_version;
  std::string rewrite_rationale;
  std::optional<RegressionReport> regression_report;
  RunStatus status = RunStatus::running;
  std::optional<std::string> error_detail;
  Timestamp created_at{};
  Timestamp updated_at{};

  bool operator==(const PipelineRun&) const = default;
};

}  // namespace pd::domain
