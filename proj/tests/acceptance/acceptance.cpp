// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Everything runs against the scripted provider.

#include "../diff_oracle.hpp"
#include "../support.hpp"

#include "pd/diff/tracked_diff.hpp"
#include "pd/domain/json.hpp"
#include "pd/domain/rules.hpp"
#include "pd/pipeline/steps.hpp"
#include "pd/service/share_sessions.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <thread>

#include <sys/wait.h>

using namespace pd;
using domain::CaseStatus;
using pd::testing::FunctionBackend;
using pd::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

template <typename F>
void expect_error(ErrorCode code, F&& f, const std::string& what,
                  std::function<void(const Error&)> inspect = {}) {
  try {
    f();
  } catch (const Error& e) {
    require(e.code() == code, what + ": got " + std::string(to_string(e.code())) + " " + e.what());
    if (inspect) inspect(e);
    return;
  }
  throw Failure(what + ": no error raised");
}

/// Workspace over a fresh store holding the seeded demo bot, with the
/// scripted provider playing back `fixture_file`.
struct SeededWorld {
  TempDir dir;
  SteppingClock clock{pd::testing::epoch_2026()};
  SequentialIdSource ids;
  pipeline::Templates templates = pipeline::Templates::load(pd::testing::asset_root());
  std::vector<domain::StudentProfile> profiles = scenario::builtin_profiles(pd::testing::asset_root());
  std::shared_ptr<llm::FixtureStore> fixtures = std::make_shared<llm::FixtureStore>();
  llm::Gateway gateway;
  std::unique_ptr<store::Store> store;
  std::unique_ptr<service::Workspace> ws;

  explicit SeededWorld(const fs::path& fixture_file, std::shared_ptr<llm::ChatBackend> backend = {}) {
    store = store::Store::open(dir / "store.pdlog", clock);
    demo::seed(*store, pd::testing::asset_root(), dir / "seed-fixtures.jsonl", clock);
    fixtures->load_fixture_file(fixture_file);
    gateway.set_backend(llm::Provider::scripted,
                        backend ? backend : std::make_shared<llm::ScriptedBackend>(fixtures));
    service::WorkspaceConfig cfg;
    cfg.provider_override = llm::Provider::scripted;
    cfg.judge_mode = scenario::JudgeMode::llm;
    ws = std::make_unique<service::Workspace>(*store, gateway, templates, profiles, clock, ids, cfg);
  }
  std::string bot_id() const { return std::string(demo::kBotId); }
};

/// Fixture file written once by the seed path, shared by the criteria.
fs::path demo_fixtures(const TempDir& dir) {
  const fs::path file = dir / "fixtures.jsonl";
  if (!fs::exists(file)) {
    SystemClock clock;
    auto s = store::Store::open(dir / "seed-store.pdlog", clock);
    demo::seed(*s, pd::testing::asset_root(), file, clock);
  }
  return file;
}

// Seeded bot -> one case per profile -> correction -> apply -> all pass.
// Returns the id of the corrected case.
std::string run_cycle(SeededWorld& w) {
  std::vector<std::string> fresh;
  for (const auto& p : w.profiles) {
    auto started = w.ws->start_test_case(w.bot_id(), p.id);
    require(!started.error, "start " + p.id + ": " + started.error.value_or(""));
    require(started.test_case.status == CaseStatus::awaiting_review, "new case awaits review");
    fresh.push_back(started.test_case.id);
  }
  const auto before = w.ws->get_version(w.ws->get_bot(w.bot_id()).current_version);
  const auto sub = w.ws->submit_correction(fresh[0], 1, std::string(demo::kCorrectedReply));
  const auto run = w.ws->get_run(sub.run_id);
  require(run.status == domain::RunStatus::awaiting_teacher,
          "run awaiting_teacher, got " + std::string(domain::to_string(run.status)) + " " +
              run.error_detail.value_or(""));
  require(run.inferred_intent && !run.inferred_intent->summary.empty() &&
              !run.inferred_intent->behavioral_rule.empty(),
          "non-empty intent");
  const auto proposed = w.ws->get_version(*run.proposed_version);
  require(diff::apply_diff(before.full_text, proposed.diff_from_parent) == proposed.full_text,
          "diff round-trips");
  require(run.regression_report && run.regression_report->evaluated_cases.size() == 3 &&
              run.regression_report->all_pass(),
          "three passing verdicts");

  const auto applied = w.ws->decide(sub.run_id, service::Decision::apply);
  require(applied.refresh_errors.empty(), "refresh without errors");
  for (const auto& tc : applied.cases) {
    require(tc.transcript.back().produced_by_version == proposed.id, "case " + tc.id + " refreshed");
    if (tc.status == CaseStatus::awaiting_review) w.ws->mark_pass(tc.id);
  }
  for (const auto& tc : w.ws->list_test_cases(w.bot_id())) {
    require(tc.status == CaseStatus::passed, "case " + tc.id + " passed");
  }
  return fresh[0];
}

std::string criterion_happy_path(const fs::path& fixtures, fs::path* store_copy = nullptr) {
  const auto started = std::chrono::steady_clock::now();
  SeededWorld w(fixtures);
  run_cycle(w);
  const std::string url = w.ws->publish(w.bot_id());
  const auto bot = w.ws->get_bot(w.bot_id());
  require(bot.share_token && url == "/share/" + *bot.share_token, "share url");

  service::ShareSessions sessions(*w.ws, w.clock, w.ids);
  const auto reply = sessions.send(*bot.share_token, std::nullopt, "hello");
  llm::ChatRequest expected_call;
  expected_call.system_prompt = w.ws->get_version(bot.current_version).full_text;
  expected_call.messages = {{llm::MessageRole::user, "hello"}};
  expected_call.temperature = llm::kInteractiveTemperature;
  require(reply.reply == w.fixtures->lookup(llm::fixture_key(expected_call)).value_or("<none>"),
          "share chat answers under the new version");
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  require(elapsed < std::chrono::seconds(5), fmt::format("took {} ms", elapsed.count()));
  if (store_copy) fs::copy_file(w.store->file(), *store_copy, fs::copy_options::overwrite_existing);
  return fmt::format("{} ms", elapsed.count());
}

// Backend that degrades one passed case's replay under any rewritten prompt
// and has the judge reject it.
std::shared_ptr<FunctionBackend> degrading_backend(const pipeline::Templates& templates,
                                                   std::string student_message) {
  static const std::string kDegraded = "The standard deviation is 2. Just copy that down.";
  return std::make_shared<FunctionBackend>(
      [&templates, student_message](const llm::ChatRequest& r) -> std::string {
        if (r.system_prompt == templates.equivalence_judge().system) {
          if (r.messages[0].text.find(kDegraded) != std::string::npos) {
            return "```verdict\nEQUIVALENT: NO\nRATIONALE: gives away the answer\n```";
          }
        } else if (r.system_prompt.find(demo::kRuleLine) != std::string::npos &&
                   r.messages.size() == 1 && r.messages[0].text == student_message) {
          return kDegraded;
        }
        return demo::demo_responder(templates, r);
      });
}

std::string criterion_gate(const fs::path& fixtures) {
  // No completed cycle yet: the seeded bot has only passed cases.
  {
    SeededWorld w(fixtures);
    expect_error(ErrorCode::gate_blocked, [&] { w.ws->publish(w.bot_id()); }, "no-cycle publish",
                 [](const Error& e) {
                   require(e.details().at("reasons").dump().find(domain::kReasonNoCycle) !=
                               std::string::npos,
                           "no-cycle reason present");
                 });
  }
  const auto blocked_by = [&](SeededWorld& w, const std::string& case_id, CaseStatus status) {
    require(w.ws->get_test_case(case_id).status == status, "case reached " + std::string(to_string(status)));
    expect_error(ErrorCode::gate_blocked, [&] { w.ws->publish(w.bot_id()); },
                 std::string(to_string(status)) + " blocks", [&](const Error& e) {
                   require(e.details().at("offending_case_ids") == nlohmann::json::array({case_id}),
                           "names exactly " + case_id);
                 });
  };
  {
    SeededWorld w(fixtures);
    run_cycle(w);
    // unrun: a profile the fixtures know nothing about.
    domain::StudentProfile p;
    p.name = "silent student";
    p.opening_message = "...";
    const auto silent = w.ws->add_profile(p);
    const auto unrun = w.ws->start_test_case(w.bot_id(), silent.id);
    require(unrun.error.has_value(), "start fails without fixture");
    blocked_by(w, unrun.test_case.id, CaseStatus::unrun);
  }
  {
    SeededWorld w(fixtures);
    run_cycle(w);
    const auto tc = w.ws->start_test_case(w.bot_id(), "off-topic-input").test_case;
    blocked_by(w, tc.id, CaseStatus::awaiting_review);
  }
  {
    SeededWorld w(fixtures);
    run_cycle(w);
    const auto tc = w.ws->start_test_case(w.bot_id(), "off-topic-input").test_case;
    w.ws->abandon_test_case(tc.id);
    require(w.ws->get_test_case(tc.id).status == CaseStatus::failed, "abandon -> failed");
    expect_error(ErrorCode::gate_blocked, [&] { w.ws->publish(w.bot_id()); }, "failed blocks",
                 [&](const Error& e) {
                   require(e.details().at("offending_case_ids") == nlohmann::json::array({tc.id}),
                           "names the failed case");
                 });
  }
  {
    SeededWorld w(fixtures);
    w.gateway.set_backend(llm::Provider::scripted,
                          degrading_backend(w.templates, w.profiles[1].opening_message));
    const auto fresh = w.ws->start_test_case(w.bot_id(), "expected-path").test_case;
    const auto sub = w.ws->submit_correction(fresh.id, 1, std::string(demo::kCorrectedReply));
    w.ws->decide(sub.run_id, service::Decision::apply);
    w.ws->mark_pass(fresh.id);
    require(w.ws->get_test_case(std::string(demo::kCaseIds[1])).status == CaseStatus::regressed,
            "case regressed");
    expect_error(ErrorCode::gate_blocked, [&] { w.ws->publish(w.bot_id()); }, "regressed blocks",
                 [&](const Error& e) {
                   require(e.details().at("offending_case_ids") ==
                               nlohmann::json::array({std::string(demo::kCaseIds[1])}),
                           "names the regressed case");
                 });
  }
  return "unrun, awaiting_review, failed, regressed each blocked; no-cycle reason reported";
}

std::string criterion_diff(std::size_t& pairs_checked) {
  pd::testing::TextFuzzer fuzz(7);
  const std::vector<std::pair<std::string, std::string>> edge = {
      {"", ""}, {"", "a"}, {"a", ""}, {"a", "a\n"}, {"a\n", "a"}, {"\n", ""}, {"\n\n", "\n"},
      {"ünï\ncødé", "ünï\nnew\ncødé"}, {"x\r\ny\r\n", "x\r\nz\r\n"}};
  std::size_t fuzzed = 0;
  auto check = [&](const std::string& a, const std::string& b) {
    const auto d = diff::compute_diff(a, b);
    require(diff::apply_diff(a, d) == b, "round trip failed for pair " + std::to_string(fuzzed));
    require(diff::is_maximal(d), "hunks not maximal");
    ++fuzzed;
  };
  for (const auto& [a, b] : edge) check(a, b);
  while (fuzzed < 1000) {
    const auto [a, b] = fuzz.pair();
    check(a, b);
  }
  const pd::testing::SmallTextUniverse u;
  for (std::size_t a = 0; a < u.size(); ++a) {
    const std::string old_text = u.text(a);
    for (std::size_t b = 0; b < u.size(); ++b) {
      const auto d = diff::compute_diff(old_text, u.text(b));
      if (diff::change_cost(d) != u.min_edit_cost(a, b)) {
        throw Failure(fmt::format("non-minimal diff {} -> {}", nlohmann::json(old_text).dump(),
                                     nlohmann::json(u.text(b)).dump()));
      }
      ++pairs_checked;
    }
  }
  return fmt::format("{} fuzzed round trips; {} exhaustive pairs minimal", fuzzed, pairs_checked);
}

std::string criterion_regression(const fs::path& fixtures) {
  SeededWorld w(fixtures);
  const std::string watched = std::string(demo::kCaseIds[1]);
  w.gateway.set_backend(llm::Provider::scripted,
                        degrading_backend(w.templates, w.profiles[1].opening_message));
  const auto fresh = w.ws->start_test_case(w.bot_id(), "expected-path").test_case;
  const auto sub = w.ws->submit_correction(fresh.id, 1, std::string(demo::kCorrectedReply));
  const auto run = w.ws->get_run(sub.run_id);
  require(run.status == domain::RunStatus::awaiting_teacher, "run awaiting_teacher");
  std::size_t regressions = 0;
  for (const auto& v : run.regression_report->evaluated_cases) {
    if (v.verdict == domain::Verdict::regression) {
      ++regressions;
      require(v.test_case_id == watched, "regression on the degraded case");
    } else {
      require(v.verdict == domain::Verdict::pass, "other cases pass");
    }
  }
  require(regressions == 1, fmt::format("exactly one regression, got {}", regressions));

  w.ws->decide(sub.run_id, service::Decision::apply);
  require(w.ws->get_test_case(watched).status == CaseStatus::regressed, "status regressed after apply");
  w.ws->mark_pass(fresh.id);
  expect_error(ErrorCode::gate_blocked, [&] { w.ws->publish(w.bot_id()); }, "publish blocked");
  w.ws->mark_pass(watched);
  const auto url = w.ws->publish(w.bot_id());
  require(url.rfind("/share/", 0) == 0, "publish after review");
  return "one regression verdict; regressed, blocked, then unblocked by mark pass";
}

std::string criterion_coverage() {
  const auto templates = pipeline::Templates::load(pd::testing::asset_root());
  llm::Gateway gateway;
  gateway.set_backend(llm::Provider::scripted, std::make_shared<FunctionBackend>(
                                                   [](const llm::ChatRequest&) { return "same"; }));
  const pipeline::ModelContext ctx{gateway, templates, llm::Provider::scripted};
  for (int n : {0, 1, 5}) {
    std::vector<domain::TestCase> cases;
    std::vector<std::string> want;
    for (int i = 0; i < n; ++i) {
      domain::TestCase tc;
      tc.id = fmt::format("case-{}", (i * 7) % 5);
      tc.id += std::to_string(i);
      tc.status = CaseStatus::passed;
      tc.transcript = {{domain::Role::student, "q", std::nullopt}, {domain::Role::bot, "same", std::string("v1")}};
      tc.approved_snapshot = domain::ApprovedSnapshot{1, "same", "v1"};
      cases.push_back(tc);
      want.push_back(tc.id);
    }
    const pipeline::ProposedPromptUpdate update{"new prompt", {}, "r"};
    const auto report =
        pipeline::verify_regressions(ctx, update, "v2", cases, {}, scenario::JudgeMode::exact);
    std::vector<std::string> got;
    for (const auto& v : report.evaluated_cases) got.push_back(v.test_case_id);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    require(got == want, fmt::format("ids differ for {} cases", n));
    require(report.evaluated_cases.size() == cases.size(), "no duplicates");
  }
  return "0, 1 and 5 cases covered exactly";
}

std::string criterion_determinism(const fs::path& fixtures, const TempDir& scratch) {
  fs::path a = scratch / "run-a.pdlog";
  fs::path b = scratch / "run-b.pdlog";
  criterion_happy_path(fixtures, &a);
  criterion_happy_path(fixtures, &b);
  const std::string x = read_file(a);
  const std::string y = read_file(b);
  require(!x.empty(), "store written");
  require(x == y, "store files differ");
  return fmt::format("two runs, {} identical bytes", x.size());
}

std::string criterion_crash_consistency() {
  TempDir dir;
  const fs::path file = dir / "store.pdlog";
  SteppingClock clock{pd::testing::epoch_2026()};
  struct Put {
    store::RecordKind kind;
    std::string id;
    std::string bot;
    nlohmann::json payload;
  };
  std::vector<Put> puts;
  for (int i = 0; i < 50; ++i) {
    if (i < 5) {
      puts.push_back({store::RecordKind::bot, fmt::format("bot-{}", i), fmt::format("bot-{}", i), {{"n", i}}});
    } else if (i % 3 == 0) {
      puts.push_back({store::RecordKind::version, fmt::format("ver-{}", i), fmt::format("bot-{}", i % 5),
                      {{"full_text", fmt::format("prompt {}", i)}}});
    } else {
      puts.push_back({store::RecordKind::test_case, fmt::format("case-{}", i % 7),
                      fmt::format("bot-{}", i % 5), {{"n", i}}});
    }
  }
  {
    auto s = store::Store::open(file, clock);
    for (const auto& p : puts) s->put(p.kind, p.id, p.bot, p.payload);
  }
  const std::string bytes = read_file(file);
  std::vector<std::size_t> boundaries{6};
  while (boundaries.back() < bytes.size()) {
    const auto at = boundaries.back();
    const std::size_t len = (std::size_t(std::uint8_t(bytes[at])) << 24) |
                            (std::size_t(std::uint8_t(bytes[at + 1])) << 16) |
                            (std::size_t(std::uint8_t(bytes[at + 2])) << 8) | std::uint8_t(bytes[at + 3]);
    boundaries.push_back(at + 4 + len);
  }
  require(boundaries.size() == 51 && boundaries.back() == bytes.size(), "50 framed records");

  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    TempDir cut;
    {
      std::ofstream out(cut / "store.pdlog", std::ios::binary);
      out << bytes.substr(0, boundaries[k]);
    }
    auto s = store::Store::open(cut / "store.pdlog", clock);
    require(!s->degraded(), fmt::format("degraded at boundary {}", k));
    require(s->open_report().records == k, fmt::format("record count at boundary {}", k));
    require(s->last_sequence() == k, fmt::format("sequence at boundary {}", k));
    std::map<std::pair<store::RecordKind, std::string>, nlohmann::json> expected;
    for (std::size_t i = 0; i < k; ++i) expected[{puts[i].kind, puts[i].id}] = puts[i].payload;
    for (const auto& p : puts) {
      const auto got = s->get(p.kind, p.id);
      auto it = expected.find({p.kind, p.id});
      if (it == expected.end()) {
        require(!got, fmt::format("{} present beyond boundary {}", p.id, k));
      } else {
        require(got && *got == it->second, fmt::format("{} wrong at boundary {}", p.id, k));
      }
    }
    // The surviving prefix accepts new writes.
    s->put(store::RecordKind::bot, "bot-new", "bot-new", nlohmann::json::object());
  }
  return "51 truncation points open cleanly with exactly the surviving prefix";
}

std::string criterion_concurrency() {
  pd::testing::Harness h;
  const auto bot = h.demo_bot();
  std::atomic<int> issued{0}, rejected{0};
  auto thread_a = [&] {
    std::string current;
    for (int i = 0; i < 100; ++i) {
      try {
        if (i % 3 == 0 || current.empty()) {
          current = h.ws->start_test_case(bot.id, h.profiles[i % 3].id).test_case.id;
        } else if (i % 3 == 1) {
          h.ws->refresh_test_case(current);
        } else {
          h.ws->mark_pass(current);
        }
      } catch (const StateError&) {
        ++rejected;  // e.g. approving a transcript the other thread made stale
      }
      ++issued;
      std::this_thread::yield();
    }
  };
  auto thread_b = [&] {
    const std::string root = h.ws->get_version(bot.current_version).full_text;
    for (int i = 0; i < 100; ++i) {
      h.ws->edit_prompt(bot.id, root + fmt::format("\nRevision {}.", i));
      ++issued;
      std::this_thread::yield();
    }
  };
  std::thread ta(thread_a), tb(thread_b);
  ta.join();
  tb.join();
  require(issued == 200, "all mutations issued");

  // Version chain: root to current, each diff rebuilds the child from its parent.
  const auto chain = h.ws->version_chain(bot.id);
  require(chain.size() == 101, fmt::format("101 versions, got {}", chain.size()));
  require(!chain.front().parent_id, "chain starts at root");
  for (std::size_t i = 1; i < chain.size(); ++i) {
    require(chain[i].parent_id == chain[i - 1].id, "parent links");
    require(diff::apply_diff(chain[i - 1].full_text, chain[i].diff_from_parent) == chain[i].full_text,
            "diff rebuilds version " + chain[i].id);
  }
  require(h.ws->get_bot(bot.id).current_version == chain.back().id, "current is the chain tip");

  // Status machine: every successive persisted status of every case is allowed.
  const std::string bytes = read_file(h.store->file());
  std::map<std::string, CaseStatus> last;
  std::size_t at = 6, transitions = 0, switches = 0;
  std::optional<store::RecordKind> previous_kind;
  while (at < bytes.size()) {
    const std::size_t len = (std::size_t(std::uint8_t(bytes[at])) << 24) |
                            (std::size_t(std::uint8_t(bytes[at + 1])) << 16) |
                            (std::size_t(std::uint8_t(bytes[at + 2])) << 8) | std::uint8_t(bytes[at + 3]);
    const auto rec = store::decode_record(std::string_view(bytes).substr(at + 4, len));
    at += 4 + len;
    if (rec.kind == store::RecordKind::version || rec.kind == store::RecordKind::test_case) {
      switches += previous_kind && *previous_kind != rec.kind;
      previous_kind = rec.kind;
    }
    if (rec.kind != store::RecordKind::test_case) continue;
    const auto tc = rec.payload.get<domain::TestCase>();
    if (auto it = last.find(tc.id); it != last.end()) {
      require(domain::is_allowed_transition(it->second, tc.status),
              fmt::format("{}: {} -> {}", tc.id, to_string(it->second), to_string(tc.status)));
      ++transitions;
    }
    require(domain::transcript_alternates(tc.transcript), "alternating transcript");
    require(tc.status != CaseStatus::passed || tc.approved_snapshot, "passed has snapshot");
    last[tc.id] = tc.status;
  }
  require(switches >= 10, fmt::format("threads barely interleaved ({} switches)", switches));
  for (const auto& tc : h.ws->list_test_cases(bot.id)) {
    if (tc.status == CaseStatus::passed) {
      require(tc.approved_snapshot->prompt_version == h.ws->get_bot(bot.id).current_version,
              "passed snapshots refer to the current version");
    }
  }

  // Distinct bots: critical sections interleave; the same bot: never.
  using clk = std::chrono::steady_clock;
  struct Span {
    clk::time_point a, b;
  };
  auto s = store::Store::open(h.dir / "locks.pdlog", h.clock);
  std::mutex mu;
  std::map<std::string, std::vector<Span>> spans;
  auto worker = [&](const std::string& bot_id) {
    for (int i = 0; i < 20; ++i) {
      s->with_bot_lock(bot_id, [&] {
        const auto a = clk::now();
        s->put(store::RecordKind::bot, bot_id, bot_id, {{"i", i}});
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        std::lock_guard g(mu);
        spans[bot_id].push_back({a, clk::now()});
      });
    }
  };
  std::thread w1(worker, "bot-x"), w2(worker, "bot-y"), w3(worker, "bot-x");
  w1.join();
  w2.join();
  w3.join();
  auto overlaps = [](const Span& p, const Span& q) { return p.a < q.b && q.a < p.b; };
  std::size_t cross = 0;
  for (const auto& p : spans["bot-x"]) {
    for (const auto& q : spans["bot-y"]) cross += overlaps(p, q);
  }
  const auto& same = spans["bot-x"];
  for (std::size_t i = 0; i < same.size(); ++i) {
    for (std::size_t j = i + 1; j < same.size(); ++j) {
      require(!overlaps(same[i], same[j]), "same-bot critical sections overlapped");
    }
  }
  require(cross > 0, "no overlap between distinct bots");
  return fmt::format(
      "200 mutations ({} rejected by rules, {} interleavings), {} case transitions valid, {} "
      "cross-bot overlaps",
      rejected.load(), switches, transitions, cross);
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  TempDir tmp;
  const fs::path capture = tmp / "out.txt";
  const std::string cmd = fmt::format("\"{}\" {} >\"{}\" 2>&1", PD_CLI_PATH, args, capture.string());
  const int status = std::system(cmd.c_str());
  if (out) *out = read_file(capture);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string criterion_cli() {
  TempDir dir;
  const std::string data = fmt::format("--data-dir \"{}\" --asset-dir \"{}\"", dir.path().string(),
                                       pd::testing::asset_root().string());
  std::string out;
  require(run_cli(data + " seed", &out) == 0, "seed: " + out);
  require(run_cli(data + " regress demo-bot", &out) == 0, "all-pass regress exits 0: " + out);
  const auto pass_rows = std::count(out.begin(), out.end(), '\n');
  require(pass_rows == 3, "three verdict rows");

  // Degrade the seeded replay of one case.
  llm::FixtureStore fixtures;
  fixtures.load_fixture_file(dir / "fixtures.jsonl");
  const auto profiles = scenario::builtin_profiles(pd::testing::asset_root());
  llm::ChatRequest replay;
  replay.system_prompt = domain::root_scaffold(demo::kBotDescription, {});
  replay.messages = {{llm::MessageRole::user, profiles[2].opening_message}};
  replay.temperature = llm::kPipelineTemperature;
  require(fixtures.lookup(llm::fixture_key(replay)).has_value(), "seeded replay fixture exists");
  fixtures.register_fixture(llm::fixture_key(replay), "Best game? Definitely the newest shooter.");
  fixtures.save(dir / "degraded.jsonl");
  const std::string degraded = fmt::format("--fixtures \"{}\"", (dir / "degraded.jsonl").string());

  require(run_cli(data + " " + degraded + " --judge-mode exact regress demo-bot", &out) == 1,
          "regression exits 1: " + out);
  require(out.find("\tregression\t") != std::string::npos, "regression row printed");
  require(run_cli(data + " " + degraded + " regress demo-bot", &out) == 1, "error verdict exits 1: " + out);
  require(out.find("\terror\t") != std::string::npos, "error row printed");
  require(run_cli(data + " regress no-such-bot", &out) == 2, "unknown bot exits 2: " + out);
  return "exit codes 0 / 1 (regression) / 1 (error) / 2";
}

}  // namespace

int main() {
  TempDir shared;
  fs::path fixtures;
  try {
    fixtures = demo_fixtures(shared);
  } catch (const std::exception& e) {
    std::cout << "FAIL setup: " << e.what() << std::endl;
    return 1;
  }
  std::size_t exhaustive_pairs = 0;
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"1 end-to-end happy path", [&] { return criterion_happy_path(fixtures); }},
      {"2 publication gate blocking", [&] { return criterion_gate(fixtures); }},
      {"3 diff algebra", [&] { return criterion_diff(exhaustive_pairs); }},
      {"4 regression flagging", [&] { return criterion_regression(fixtures); }},
      {"5 report coverage", [&] { return criterion_coverage(); }},
      {"6 determinism", [&] { return criterion_determinism(fixtures, shared); }},
      {"7 crash consistency", [&] { return criterion_crash_consistency(); }},
      {"8 concurrency", [&] { return criterion_concurrency(); }},
      {"9 cli regress exit codes", [&] { return criterion_cli(); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    try {
      const std::string detail = check();
      std::cout << "PASS [" << name << "] " << detail << std::endl;
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL [" << name << "] " << e.what() << std::endl;
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
