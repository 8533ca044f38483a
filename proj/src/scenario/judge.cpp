#include "pd/scenario/judge.hpp"

#include "pd/pipeline/reply_format.hpp"

namespace pd::scenario {

std::string_view to_string(JudgeMode m) { return m == JudgeMode::exact ? "exact" : "llm"; }

JudgeMode parse_judge_mode(std::string_view text) {
  if (text == "exact") return JudgeMode::exact;
  if (text == "llm") return JudgeMode::llm;
  throw ValidationError("judge mode must be 'exact' or 'llm', got '" + std::string(text) + "'");
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t line_start = 0;
  auto flush_line = [&](std::string_view line) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r' ||
                             line.back() == '\f' || line.back() == '\v')) {
      line.remove_suffix(1);
    }
    out.append(line);
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      flush_line(text.substr(line_start, i - line_start));
      out += '\n';
      line_start = i + 1;
    }
  }
  flush_line(text.substr(line_start));
  return out;
}

JudgeVerdict judge_exact(std::string_view approved_text, std::string_view replayed_text) {
  const bool same = normalize(approved_text) == normalize(replayed_text);
  return JudgeVerdict{same, std::string(same ? kExactEqual : kExactDiffer), JudgeMode::exact};
}

JudgeVerdict judge_equivalence(const pipeline::ModelContext& ctx, std::string_view approved_text,
                               std::string_view replayed_text,
                               std::span<const domain::InferredIntent> intent_history,
                               JudgeMode mode) {
  JudgeVerdict exact = judge_exact(approved_text, replayed_text);
  if (mode == JudgeMode::exact || exact.equivalent) {
    return exact;
  }

  std::string rules;
  for (const auto& intent : intent_history) {
    rules += "- " + intent.behavioral_rule + "\n";
  }
  if (rules.empty()) {
    rules = "(none yet)\n";
  }
  const auto& tmpl = ctx.templates.equivalence_judge();
  llm::ChatRequest req;
  req.system_prompt = tmpl.system;
  req.messages.push_back({llm::MessageRole::user,
                          pipeline::render(tmpl.user, {{"approved_response", std::string(approved_text)},
                                                       {"replayed_response", std::string(replayed_text)},
                                                       {"behavioral_rules", rules}})});
  req.temperature = llm::kPipelineTemperature;
  req.provider = ctx.provider;

  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = ctx.gateway.complete(req).text;
    if (auto fields = pipeline::parse_labeled_block(reply, {"EQUIVALENT", "RATIONALE"})) {
      if (auto yn = pipeline::parse_yes_no((*fields)["EQUIVALENT"])) {
        return JudgeVerdict{yn->yes, (*fields)["RATIONALE"], JudgeMode::llm};
      }
    }
    if (auto yn = pipeline::parse_yes_no(reply)) {
      return JudgeVerdict{yn->yes, yn->rationale, JudgeMode::llm};
    }
    req.messages.push_back({llm::MessageRole::assistant, reply});
    req.messages.push_back({llm::MessageRole::user, ctx.templates.reprompt_format()});
  }
  throw pipeline::PipelineError("judge reply could not be parsed after one reprompt");
}

}  // namespace pd::scenario
