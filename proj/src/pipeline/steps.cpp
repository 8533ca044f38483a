#include "pd/pipeline/steps.hpp"

#include "pd/diff/tracked_diff.hpp"
#include "pd/pipeline/reply_format.hpp"
#include "pd/scenario/conversation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <thread>

namespace pd::pipeline {

using domain::Role;

namespace {

constexpr int kRewriteMaxTokens = 4096;

std::string first_line(std::string_view text) {
  return std::string(text.substr(0, text.find('\n')));
}

bool contains_line(std::string_view text, std::string_view line) {
  const auto lines = diff::split_lines(text).lines;
  return std::find(lines.begin(), lines.end(), line) != lines.end();
}

llm::ChatRequest base_request(const ModelContext& ctx, const MessageTemplate& tmpl,
                              const std::map<std::string, std::string>& vars) {
  llm::ChatRequest req;
  req.system_prompt = tmpl.system;
  req.messages.push_back({llm::MessageRole::user, render(tmpl.user, vars)});
  req.temperature = llm::kPipelineTemperature;
  req.provider = ctx.provider;
  return req;
}

void follow_up(llm::ChatRequest& req, const std::string& reply, std::string message) {
  req.messages.push_back({llm::MessageRole::assistant, reply});
  req.messages.push_back({llm::MessageRole::user, std::move(message)});
}

}  // namespace

void validate_correction(const domain::Correction& correction,
                         std::span<const domain::Turn> transcript) {
  if (correction.turn_index >= transcript.size()) {
    throw ValidationError(fmt::format("turn {} is out of range (transcript has {} turns)",
                                      correction.turn_index, transcript.size()));
  }
  if (transcript[correction.turn_index].role != Role::bot) {
    throw ValidationError(fmt::format("turn {} is a student turn", correction.turn_index));
  }
  if (correction.corrected_text == correction.original_text) {
    throw ValidationError("corrected text is identical to the original response");
  }
}

domain::InferredIntent analyze_correction(const ModelContext& ctx,
                                          const domain::Correction& correction,
                                          std::span<const domain::Turn> transcript,
                                          std::string_view current_prompt) {
  validate_correction(correction, transcript);
  std::string student_turn;
  for (std::size_t i = correction.turn_index; i-- > 0;) {
    if (transcript[i].role == Role::student) {
      student_turn = transcript[i].text;
      break;
    }
  }
  auto req = base_request(ctx, ctx.templates.intent_analysis(),
                          {{"current_prompt", std::string(current_prompt)},
                           {"student_turn", student_turn},
                           {"original_response", correction.original_text},
                           {"corrected_response", correction.corrected_text}});
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = ctx.gateway.complete(req).text;
    if (auto f = parse_labeled_block(reply, {"SUMMARY", "RULE"})) {
      return domain::InferredIntent{(*f)["SUMMARY"], (*f)["RULE"]};
    }
    follow_up(req, reply, ctx.templates.reprompt_format());
  }
  throw PipelineError("intent analysis reply could not be parsed after one reprompt");
}

ProposedPromptUpdate propose_rewrite(const ModelContext& ctx, std::string_view current_prompt,
                                     const domain::InferredIntent& intent,
                                     const domain::Correction& correction) {
  if (intent.summary.empty() || intent.behavioral_rule.empty()) {
    throw ValidationError("inferred intent needs a summary and a behavioral rule");
  }
  const std::string anchor = first_line(current_prompt);
  auto req = base_request(ctx, ctx.templates.prompt_rewrite(),
                          {{"current_prompt", std::string(current_prompt)},
                           {"intent_summary", intent.summary},
                           {"behavioral_rule", intent.behavioral_rule},
                           {"original_response", correction.original_text},
                           {"corrected_response", correction.corrected_text}});
  req.max_output_tokens = kRewriteMaxTokens;

  std::string failure;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = ctx.gateway.complete(req).text;
    auto f = parse_labeled_block(reply, {"RATIONALE", "PROMPT"}, "PROMPT");
    if (!f) {
      failure = "rewrite reply could not be parsed";
      follow_up(req, reply, ctx.templates.reprompt_format());
      continue;
    }
    std::string text = (*f)["PROMPT"];
    if (text == current_prompt) {
      failure = "rewrite returned the current prompt unchanged";
      follow_up(req, reply, ctx.templates.rewrite_must_change());
      continue;
    }
    if (!contains_line(text, anchor)) {
      failure = "rewrite dropped the prompt's first line";
      follow_up(req, reply, render(ctx.templates.rewrite_keep_anchor(), {{"anchor_line", anchor}}));
      continue;
    }
    ProposedPromptUpdate out;
    out.diff = diff::compute_diff(current_prompt, text);
    out.new_full_text = std::move(text);
    out.rationale = (*f)["RATIONALE"];
    return out;
  }
  throw PipelineError(failure + " after one retry");
}

domain::RegressionReport verify_regressions(const ModelContext& ctx,
                                            const ProposedPromptUpdate& proposed,
                                            const std::string& proposed_version_id,
                                            std::span<const domain::TestCase> passed_cases,
                                            std::span<const domain::InferredIntent> intent_history,
                                            scenario::JudgeMode mode, unsigned max_parallel) {
  std::vector<const domain::TestCase*> ordered;
  for (const auto& tc : passed_cases) {
    if (tc.status != domain::CaseStatus::passed || !tc.approved_snapshot) {
      throw ValidationError("verify_regressions needs passed cases with an approved snapshot; " +
                            tc.id + " is not");
    }
    ordered.push_back(&tc);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });

  std::vector<domain::CaseVerdict> verdicts(ordered.size());
  auto evaluate = [&](std::size_t k) {
    const domain::TestCase& tc = *ordered[k];
    domain::CaseVerdict& out = verdicts[k];
    out.test_case_id = tc.id;
    try {
      const auto& snap = *tc.approved_snapshot;
      if (snap.turn_index >= tc.transcript.size()) {
        throw ValidationError("approved turn is outside the transcript");
      }
      const std::span<const domain::Turn> prefix(tc.transcript.data(), snap.turn_index);
      auto replayed = scenario::replay(ctx.gateway, ctx.provider, proposed.new_full_text,
                                       proposed_version_id, prefix, llm::kPipelineTemperature);
      out.replayed_response = replayed.back().text;
      const auto v = scenario::judge_equivalence(ctx, snap.text, out.replayed_response,
                                                 intent_history, mode);
      out.verdict = v.equivalent ? domain::Verdict::pass : domain::Verdict::regression;
      out.rationale = v.rationale;
    } catch (const std::exception& e) {
      out.verdict = domain::Verdict::error;
      out.rationale = e.what();
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(max_parallel, static_cast<unsigned>(ordered.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < ordered.size(); k = next++) evaluate(k);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  domain::RegressionReport report;
  report.evaluated_cases = std::move(verdicts);
  report.prompt_version = proposed_version_id;
  return report;
}

}  // namespace pd::pipeline
