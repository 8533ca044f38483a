#pragma once

#include "pd/domain/types.hpp"
#include "pd/pipeline/context.hpp"

#include <span>
#include <string>
#include <string_view>

namespace pd::scenario {

enum class JudgeMode { exact, llm };

std::string_view to_string(JudgeMode m);
JudgeMode parse_judge_mode(std::string_view text);

inline constexpr std::string_view kExactEqual = "byte-identical after normalization";
inline constexpr std::string_view kExactDiffer = "texts differ";

struct JudgeVerdict {
  bool equivalent = false;
  std::string rationale;
  JudgeMode mode = JudgeMode::exact;
};

/// CRLF -> LF, trailing whitespace removed from each line.
std::string normalize(std::string_view text);

/// exact: equivalent iff the normalized texts match. llm: texts that already
/// match after normalization short-circuit to an exact verdict; otherwise one
/// judge completion (plus at most one reprompt on an unparseable reply).
/// Throws PipelineError when the reply stays unparseable; gateway errors
/// propagate.
JudgeVerdict judge_equivalence(const pipeline::ModelContext& ctx, std::string_view approved_text,
                               std::string_view replayed_text,
                               std::span<const domain::InferredIntent> intent_history,
                               JudgeMode mode);

/// Exact mode only; needs no model.
JudgeVerdict judge_exact(std::string_view approved_text, std::string_view replayed_text);

}  // namespace pd::scenario
