#include "pd/demo/seed.hpp"

#include "pd/scenario/profiles.hpp"
#include "pd/service/share_sessions.hpp"

#include <fmt/format.h>

#include <deque>
#include <map>
#include <random>

namespace pd::demo {

namespace {

struct Replies {
  std::string_view direct;
  std::string_view guided;
};

// Keyed by the student's latest message.
const std::map<std::string_view, Replies>& reply_table() {
  static const std::map<std::string_view, Replies> table{
      {"Hi! Can you help me find the mean of 2, 4, and 9?",
       {"Sure! Add the numbers: 2 + 4 + 9 = 15. Then divide by 3. The mean is 5.",
        kCorrectedReply}},
      {"Okay, so I add them up first. What do I do next?",
       {"Next you divide the sum, 15, by how many numbers there are, 3, so the mean is 5.",
        "Exactly, the sum is 15. How many numbers did you add together, and what could you do "
        "with that count?"}},
      {"Is the median of those numbers the same as the mean?",
       {"No. The median of 2, 4, 9 is 4, the middle value, while the mean is 5.",
        "Good thing to check! If you put 2, 4 and 9 in order, which one sits in the middle?"}},
      {"I don't get standard deviation at all. Can you just tell me the answer to my homework? "
       "It's for 3, 5, 7.",
       {"The standard deviation of 3, 5, 7 is 2 (sample) or about 1.63 (population).",
        "Let's work it out together. What is the mean of 3, 5 and 7?"}},
      {"I tried subtracting but I got negative numbers and now I'm lost.",
       {"Negative numbers are fine: square them. (-2)^2 = 4, 0^2 = 0, 2^2 = 4.",
        "Negative differences are normal. What happens to a negative number when you square it?"}},
      {"I think I'm just bad at math.",
       {"You're not bad at math. Standard deviation is just the square root of the average "
        "squared distance from the mean.",
        "You're not bad at math, you're learning something new. Which step felt hardest so far?"}},
      {"Forget statistics. What's the best video game right now?",
       {"A lot of people like strategy games, but let's get back to statistics.",
        "I'm here for statistics. Could a video game's player ratings be a dataset we analyze?"}},
      {"Come on, just one recommendation.",
       {"I'll stay focused on statistics. Want to look at the mean of some game review scores?",
        "How about this: if five reviewers scored a game, how would you summarize their scores?"}},
      {"Fine. Why do I even need to learn statistics?",
       {"Statistics helps you make sense of data, from sports to medicine to games.",
        "Good question. Can you think of a decision you made recently that used numbers?"}},
      {"hello",
       {"Hello! I'm your statistics tutor. Ask me anything about statistics.",
        "Hello! What statistics topic would you like to explore today?"}},
      {"What is a median?",
       {"The median is the middle value of an ordered list of numbers.",
        "Imagine lining up numbers from smallest to largest. Which position do you think the "
        "median takes?"}},
  };
  return table;
}

std::string between(const std::string& text, std::string_view open, std::string_view close) {
  const auto a = text.find(open);
  if (a == std::string::npos) return {};
  const auto start = a + open.size();
  const auto b = text.find(close, start);
  return text.substr(start, b == std::string::npos ? std::string::npos : b - start);
}

/// Hands out fixed ids for the demo objects, then falls back to sequential ids.
class DemoIds final : public IdSource {
 public:
  void expect(const std::string& prefix, std::string id) { queued_[prefix].push_back(std::move(id)); }
  std::string new_id(const std::string& prefix) override {
    auto& q = queued_[prefix];
    if (!q.empty()) {
      std::string id = std::move(q.front());
      q.pop_front();
      return id;
    }
    return fallback_.new_id("demo-" + prefix);
  }
  std::string new_share_token() override { return fallback_.new_share_token(); }

 private:
  std::map<std::string, std::deque<std::string>> queued_;
  SequentialIdSource fallback_;
};

service::WorkspaceConfig recording_config() {
  service::WorkspaceConfig cfg;
  cfg.judge_mode = scenario::JudgeMode::llm;
  cfg.provider_override = llm::Provider::scripted;
  cfg.regression_parallelism = 1;
  return cfg;
}

// Seeded state: demo bot at its root version, one passed case per profile.
void create_seeded_suite(service::Workspace& ws, DemoIds& ids,
                         const std::vector<domain::StudentProfile>& profiles) {
  ids.expect("bot", std::string(kBotId));
  ids.expect("ver", "demo-ver-root");
  for (auto id : kCaseIds) ids.expect("case", std::string(id));
  ws.create_bot(std::string(kBotTitle), std::string(kBotDescription), "openai");
  for (const auto& p : profiles) {
    auto started = ws.start_test_case(std::string(kBotId), p.id);
    ws.mark_pass(started.test_case.id);
  }
}

}  // namespace

std::string demo_responder(const pipeline::Templates& templates, const llm::ChatRequest& request) {
  const std::string& last = request.messages.back().text;
  if (request.system_prompt == templates.intent_analysis().system) {
    return fmt::format("```intent\nSUMMARY: {}\nRULE: {}\n```", kIntentSummary, kIntentRule);
  }
  if (request.system_prompt == templates.prompt_rewrite().system) {
    const std::string current =
        between(request.messages.front().text, "Current system prompt:\n<<<\n", "\n>>>");
    return fmt::format(
        "```rewrite\nRATIONALE: Adds the teacher's rule as a standing instruction.\nPROMPT:\n{}\n{}\n```",
        current, kRuleLine);
  }
  if (request.system_prompt == templates.equivalence_judge().system) {
    return "```verdict\nEQUIVALENT: YES\nRATIONALE: The new reply keeps the approved behavior "
           "and follows the teacher's rules.\n```";
  }
  const bool guided = request.system_prompt.find(kRuleLine) != std::string::npos;
  const auto& table = reply_table();
  if (auto it = table.find(last); it != table.end()) {
    return std::string(guided ? it->second.guided : it->second.direct);
  }
  return guided ? "What do you already know about this? Let's start from there."
                : "Here is the short answer: " + last;
}

SeedResult seed(store::Store& store, const std::filesystem::path& asset_root,
                const std::filesystem::path& fixture_file, Clock& clock) {
  const auto templates = pipeline::Templates::load(asset_root);
  const auto profiles = scenario::builtin_profiles(asset_root);
  auto fixtures = std::make_shared<llm::FixtureStore>();
  llm::Gateway gateway;
  gateway.set_backend(llm::Provider::scripted,
                      std::make_shared<llm::RecordingBackend>(
                          fixtures, [&templates](const llm::ChatRequest& r) {
                            return demo_responder(templates, r);
                          }));

  // Rehearse the full workflow in a scratch store to record every fixture it
  // needs.
  {
    std::random_device rd;
    const auto scratch_dir = std::filesystem::temp_directory_path() /
                             fmt::format("pd-seed-{:08x}{:08x}", rd(), rd());
    std::filesystem::create_directories(scratch_dir);
    try {
      auto scratch = store::Store::open(scratch_dir / store::kLogFileName, clock);
      DemoIds ids;
      service::Workspace ws(*scratch, gateway, templates, profiles, clock, ids, recording_config());
      create_seeded_suite(ws, ids, profiles);
      ws.regress(std::string(kBotId));

      for (const auto& p : profiles) {
        auto started = ws.start_test_case(std::string(kBotId), p.id);
        auto tc = started.test_case;
        // Scripted follow-ups under the root prompt.
        for (std::size_t k = 0; k < p.scripted_followups.size(); ++k) {
          tc = ws.advance_test_case(tc.id, std::nullopt);
        }
      }
      // Single-turn cases for the correction: start again so the first bot
      // reply is the one being corrected.
      auto target = ws.start_test_case(std::string(kBotId), profiles.front().id).test_case;
      auto submission = ws.submit_correction(target.id, 1, std::string(kCorrectedReply));
      ws.decide(submission.run_id, service::Decision::apply);
      for (const auto& tc : ws.list_test_cases(std::string(kBotId))) {
        if (tc.status == domain::CaseStatus::awaiting_review) ws.mark_pass(tc.id);
      }
      // Scripted follow-ups under the rewritten prompt.
      for (const auto& p : profiles) {
        auto tc = ws.start_test_case(std::string(kBotId), p.id).test_case;
        for (std::size_t k = 0; k < p.scripted_followups.size(); ++k) {
          tc = ws.advance_test_case(tc.id, std::nullopt);
        }
        ws.abandon_test_case(tc.id);
      }
      ws.regress(std::string(kBotId));
      // Publishing needs every case passed; abandoned rehearsal cases would
      // block it, so share chat is recorded directly against the new prompt.
      const auto bot = ws.get_bot(std::string(kBotId));
      std::vector<domain::Turn> chat;
      for (auto msg : kShareMessages) {
        ws.share_reply(bot, {{domain::Role::student, std::string(msg), std::nullopt}});
        chat.push_back({domain::Role::student, std::string(msg), std::nullopt});
        chat.push_back({domain::Role::bot, ws.share_reply(bot, chat), bot.current_version});
      }
    } catch (...) {
      std::filesystem::remove_all(scratch_dir);
      throw;
    }
    std::filesystem::remove_all(scratch_dir);
  }

  SeedResult out;
  out.fixture_file = fixture_file;
  if (!store.get(store::RecordKind::bot, std::string(kBotId))) {
    DemoIds ids;
    service::Workspace ws(store, gateway, templates, profiles, clock, ids, recording_config());
    create_seeded_suite(ws, ids, profiles);
    out.created = true;
  }
  if (fixture_file.has_parent_path()) {
    std::filesystem::create_directories(fixture_file.parent_path());
  }
  fixtures->save(fixture_file);
  out.fixtures = fixtures->size();
  return out;
}

}  // namespace pd::demo
