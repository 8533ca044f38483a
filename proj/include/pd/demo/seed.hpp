#pragma once

#include "pd/llm/gateway.hpp"
#include "pd/pipeline/templates.hpp"
#include "pd/service/workspace.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace pd::demo {

inline constexpr std::string_view kBotId = "demo-bot";
inline constexpr std::string_view kBotTitle = "Stats Tutor";
inline constexpr std::string_view kBotDescription = "a Socratic tutor for introductory statistics";

/// Rule the demo correction teaches, as the rewrite appends it to the prompt.
inline constexpr std::string_view kRuleLine =
    "Always ask a guiding question before revealing any answer.";
inline constexpr std::string_view kIntentSummary = "Prefer questions over answers";
inline constexpr std::string_view kIntentRule =
    "Ask a guiding question instead of stating the solution.";

/// The teacher's edit of the first bot reply of the "expected path" case.
inline constexpr std::string_view kCorrectedReply =
    "Good question! Before we calculate anything: what do you think the first step is when "
    "finding a mean?";

/// Fixed ids of the seeded test cases, one per built-in profile, in
/// builtin_profiles() order.
inline constexpr std::string_view kCaseIds[] = {"demo-case-expected-path",
                                                "demo-case-struggling-learner",
                                                "demo-case-off-topic-input"};

/// Messages the fixtures cover for the published-bot chat.
inline constexpr std::string_view kShareMessages[] = {"hello", "What is a median?"};

/// Deterministic stand-in for a tutor model. Answers test chats directly
/// under a prompt without the demo rule and with a guiding question once the
/// rule is in the prompt; answers pipeline templates in their reply formats.
std::string demo_responder(const pipeline::Templates& templates, const llm::ChatRequest& request);

struct SeedResult {
  bool created = false;
  std::size_t fixtures = 0;
  std::filesystem::path fixture_file;
};

/// Records fixtures for the whole demo workflow (seeded suite, new test cases,
/// the demo correction through apply, publish, and share chat) into
/// `fixture_file`, then creates the demo bot with three passed cases in
/// `store` unless it already exists.
SeedResult seed(store::Store& store, const std::filesystem::path& asset_root,
                const std::filesystem::path& fixture_file, Clock& clock);

}  // namespace pd::demo
