#pragma once

#include "pd/domain/types.hpp"
#include "pd/pipeline/context.hpp"
#include "pd/scenario/judge.hpp"

#include <span>
#include <string>
#include <string_view>

namespace pd::pipeline {

struct ProposedPromptUpdate {
  std::string new_full_text;
  domain::TrackedDiff diff;
  std::string rationale;
};

/// Throws ValidationError when the correction changes nothing or does not
/// address a bot turn of `transcript`.
void validate_correction(const domain::Correction& correction,
                         std::span<const domain::Turn> transcript);

/// Step 1. One completion with the intent-analysis template; one reprompt if
/// the reply has no SUMMARY/RULE block, then PipelineError.
domain::InferredIntent analyze_correction(const ModelContext& ctx,
                                          const domain::Correction& correction,
                                          std::span<const domain::Turn> transcript,
                                          std::string_view current_prompt);

/// Step 2. One completion with the rewrite template. The new prompt must keep
/// the current prompt's first line and must differ from it; a violation (or
/// an unparseable reply) gets one follow-up request, then PipelineError.
ProposedPromptUpdate propose_rewrite(const ModelContext& ctx, std::string_view current_prompt,
                                     const domain::InferredIntent& intent,
                                     const domain::Correction& correction);

/// Step 3. Replays each passed case up to its approved turn under the
/// proposed prompt at temperature 0 and judges the reply against the approved
/// snapshot. Per-case failures become error verdicts. Cases run in parallel;
/// the report is ordered by case id.
domain::RegressionReport verify_regressions(const ModelContext& ctx,
                                            const ProposedPromptUpdate& proposed,
                                            const std::string& proposed_version_id,
                                            std::span<const domain::TestCase> passed_cases,
                                            std::span<const domain::InferredIntent> intent_history,
                                            scenario::JudgeMode mode, unsigned max_parallel = 4);

}  // namespace pd::pipeline
