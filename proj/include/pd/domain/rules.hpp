#pragma once

#include "pd/domain/types.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pd::domain {

inline constexpr std::size_t kMaterialCharCap = 20'000;

inline constexpr std::string_view kReasonNoCycle = "no completed pipeline cycle";
inline constexpr std::string_view kReasonNoCases = "no test cases";

struct GateDecision {
  bool allowed = false;
  std::vector<std::string> reasons;
  std::vector<std::string> offending_case_ids;
};

/// Publication is allowed iff at least one run was applied, the bot has at
/// least one test case, and every case is passed. One reason per violation;
/// each non-passed case is its own reason.
GateDecision check_publication_gate(const Bot& bot, std::span<const TestCase> cases,
                                    std::span<const PipelineRun> runs);

/// Allowed test-case status transitions (self-loops included where the
/// status machine allows them).
bool is_allowed_transition(CaseStatus from, CaseStatus to);

/// Throws StateError on a disallowed transition.
void transition(TestCase& tc, CaseStatus to);

/// Roles alternate student, bot, student, ... starting with student.
bool transcript_alternates(std::span<const Turn> transcript);

std::string root_scaffold(std::string_view description,
                          std::span<const MaterialAttachment> materials);

/// Replaces the "Reference materials:" section of a prompt, or appends one.
std::string with_materials(std::string_view prompt,
                           std::span<const MaterialAttachment> materials);

/// Truncates `raw` to kMaterialCharCap code points. Rejects non-UTF-8 input.
MaterialAttachment make_material(std::string id, std::string filename, std::string_view raw);

/// >=128 bits from the system CSPRNG, base64url without padding.
std::string mint_share_token();

/// Validates inputs and builds a draft bot plus its root version.
std::pair<Bot, PromptVersion> new_bot(std::string_view title, std::string_view description,
                                      ModelChoice model, std::vector<MaterialAttachment> materials,
                                      Clock& clock, IdSource& ids);

}  // namespace pd::domain
