#include "pd/service/workspace.hpp"

#include "pd/diff/tracked_diff.hpp"
#include "pd/domain/json.hpp"
#include "pd/scenario/conversation.hpp"
#include "pd/scenario/profiles.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace pd::service {

using domain::Bot;
using domain::BotStatus;
using domain::CaseStatus;
using domain::PipelineRun;
using domain::PromptVersion;
using domain::RunStatus;
using domain::TestCase;
using store::RecordKind;

namespace {

template <typename T>
T load(const store::Store& s, RecordKind kind, const std::string& id, std::string_view what) {
  auto payload = s.get(kind, id);
  if (!payload) {
    throw NotFoundError(fmt::format("{} {} not found", what, id));
  }
  return payload->get<T>();
}

template <typename T>
std::vector<T> load_all(const store::Store& s, RecordKind kind, const std::string& bot_id) {
  std::vector<T> out;
  for (const auto& j : s.list(kind, bot_id)) out.push_back(j.get<T>());
  return out;
}

void require_draft(const Bot& bot) {
  if (bot.status != BotStatus::draft) {
    throw StateError(fmt::format("bot {} is published and cannot be changed", bot.id));
  }
}

}  // namespace

Workspace::Workspace(store::Store& store, const llm::Gateway& gateway, pipeline::Templates templates,
                     std::vector<domain::StudentProfile> builtin_profiles, Clock& clock,
                     IdSource& ids, WorkspaceConfig config)
    : store_(store),
      gateway_(gateway),
      templates_(std::move(templates)),
      builtins_(std::move(builtin_profiles)),
      clock_(clock),
      ids_(ids),
      config_(std::move(config)) {}

llm::Provider Workspace::provider_for(const Bot& bot) const {
  if (config_.provider_override) return *config_.provider_override;
  switch (bot.model_choice) {
    case domain::ModelChoice::openai: return llm::Provider::openai;
    case domain::ModelChoice::anthropic: return llm::Provider::anthropic;
    case domain::ModelChoice::google: return llm::Provider::google;
  }
  return llm::Provider::scripted;
}

pipeline::ModelContext Workspace::model_for(const Bot& bot) const {
  return pipeline::ModelContext{gateway_, templates_, provider_for(bot)};
}

void Workspace::save(const Bot& bot) { store_.put(RecordKind::bot, bot.id, bot.id, bot); }

void Workspace::save(const TestCase& tc) {
  if (!domain::transcript_alternates(tc.transcript)) {
    throw InternalError("refusing to store test case " + tc.id + " with a non-alternating transcript");
  }
  store_.put(RecordKind::test_case, tc.id, tc.bot_id, tc);
}

void Workspace::save(const PipelineRun& run) { store_.put(RecordKind::run, run.id, run.bot_id, run); }

// ---------------------------------------------------------------------------
// Bots and versions

Bot Workspace::create_bot(const std::string& title, const std::string& description,
                          const std::string& model_choice,
                          const std::vector<MaterialUpload>& materials) {
  const auto model = domain::parse_model_choice(model_choice);
  std::vector<domain::MaterialAttachment> attached;
  for (const auto& m : materials) {
    attached.push_back(domain::make_material(ids_.new_id("mat"), m.filename, m.content));
  }
  auto [bot, root] = domain::new_bot(title, description, model, std::move(attached), clock_, ids_);
  store_.with_bot_lock(bot.id, [&] {
    store_.put(RecordKind::version, root.id, bot.id, root);
    save(bot);
  });
  return bot;
}

Bot Workspace::get_bot(const std::string& bot_id) const {
  return load<Bot>(store_, RecordKind::bot, bot_id, "bot");
}

std::vector<Bot> Workspace::list_bots() const { return load_all<Bot>(store_, RecordKind::bot, {}); }

PromptVersion Workspace::get_version(const std::string& version_id) const {
  return load<PromptVersion>(store_, RecordKind::version, version_id, "prompt version");
}

std::vector<PromptVersion> Workspace::version_chain(const std::string& bot_id) const {
  const Bot bot = get_bot(bot_id);
  std::vector<PromptVersion> chain;
  std::optional<std::string> next = bot.current_version;
  while (next) {
    if (chain.size() > 100'000) throw InternalError("version chain of " + bot_id + " has a cycle");
    chain.push_back(get_version(*next));
    next = chain.back().parent_id;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

PromptVersion Workspace::commit_version(Bot bot, std::string new_text,
                                        domain::Provenance provenance) {
  const PromptVersion current = get_version(bot.current_version);
  if (new_text == current.full_text) {
    throw ValidationError("the new prompt is identical to the current one");
  }
  PromptVersion v;
  v.id = ids_.new_id("ver");
  v.bot_id = bot.id;
  v.parent_id = current.id;
  v.diff_from_parent = diff::compute_diff(current.full_text, new_text);
  v.full_text = std::move(new_text);
  v.provenance = provenance;
  v.created_at = clock_.now();
  store_.put(RecordKind::version, v.id, bot.id, v);

  bot.current_version = v.id;
  save(bot);
  for (auto tc : list_test_cases(bot.id)) {
    if (tc.status == CaseStatus::passed) {
      domain::transition(tc, CaseStatus::awaiting_review);
      tc.updated_at = clock_.now();
      save(tc);
    }
  }
  return v;
}

Bot Workspace::add_material(const std::string& bot_id, const MaterialUpload& upload) {
  return store_.with_bot_lock(bot_id, [&] {
    Bot bot = get_bot(bot_id);
    require_draft(bot);
    bot.materials.push_back(domain::make_material(ids_.new_id("mat"), upload.filename, upload.content));
    const PromptVersion current = get_version(bot.current_version);
    std::string text = domain::with_materials(current.full_text, bot.materials);
    const PromptVersion v = commit_version(bot, std::move(text), domain::Provenance::manual_edit);
    bot.current_version = v.id;
    return bot;
  });
}

PromptVersion Workspace::edit_prompt(const std::string& bot_id, const std::string& new_text) {
  return store_.with_bot_lock(bot_id, [&] {
    Bot bot = get_bot(bot_id);
    require_draft(bot);
    return commit_version(std::move(bot), new_text, domain::Provenance::manual_edit);
  });
}

PromptVersion Workspace::apply_template(const std::string& bot_id, const std::string& template_name) {
  const auto& prompts = templates_.prompt_templates();
  const auto it = prompts.find(template_name);
  if (it == prompts.end()) {
    throw NotFoundError("prompt template " + template_name + " not found");
  }
  return store_.with_bot_lock(bot_id, [&] {
    Bot bot = get_bot(bot_id);
    require_draft(bot);
    std::string text = pipeline::render(it->second, {{"description", bot.description}});
    text = domain::with_materials(text, bot.materials);
    return commit_version(std::move(bot), std::move(text), domain::Provenance::from_template);
  });
}

std::vector<std::string> Workspace::template_names() const {
  std::vector<std::string> out;
  for (const auto& [name, text] : templates_.prompt_templates()) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------
// Profiles

std::vector<domain::StudentProfile> Workspace::profiles() const {
  auto out = builtins_;
  for (auto& p : load_all<domain::StudentProfile>(store_, RecordKind::profile, {})) {
    out.push_back(std::move(p));
  }
  return out;
}

domain::StudentProfile Workspace::get_profile(const std::string& profile_id) const {
  for (const auto& p : builtins_) {
    if (p.id == profile_id) return p;
  }
  return load<domain::StudentProfile>(store_, RecordKind::profile, profile_id, "profile");
}

domain::StudentProfile Workspace::add_profile(domain::StudentProfile profile) {
  scenario::validate_profile(profile);
  profile.id = ids_.new_id("profile");
  profile.builtin = false;
  store_.put(RecordKind::profile, profile.id, {}, profile);
  return profile;
}

// ---------------------------------------------------------------------------
// Test cases

StartResult Workspace::start_test_case(const std::string& bot_id, const std::string& profile_id) {
  const auto profile = get_profile(profile_id);
  return store_.with_bot_lock(bot_id, [&] {
    const Bot bot = get_bot(bot_id);
    const PromptVersion current = get_version(bot.current_version);
    StartResult out;
    TestCase& tc = out.test_case;
    tc.id = ids_.new_id("case");
    tc.bot_id = bot.id;
    tc.profile_id = profile.id;
    tc.transcript.push_back({domain::Role::student, profile.opening_message, std::nullopt});
    tc.status = CaseStatus::unrun;
    try {
      std::string reply = scenario::bot_reply(gateway_, provider_for(bot), current.full_text,
                                              tc.transcript, llm::kInteractiveTemperature);
      tc.transcript.push_back({domain::Role::bot, std::move(reply), current.id});
      domain::transition(tc, CaseStatus::awaiting_review);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    tc.updated_at = clock_.now();
    save(tc);
    return out;
  });
}

TestCase Workspace::advance_test_case(const std::string& case_id,
                                      const std::optional<std::string>& student_message) {
  const TestCase snapshot = get_test_case(case_id);
  return store_.with_bot_lock(snapshot.bot_id, [&] {
    TestCase tc = get_test_case(case_id);
    if (tc.transcript.empty() || tc.transcript.back().role != domain::Role::bot) {
      throw StateError("test case " + tc.id + " has no bot reply yet; re-run it first");
    }
    const auto profile = get_profile(tc.profile_id);
    std::string message;
    bool scripted = false;
    if (student_message) {
      if (student_message->empty()) throw ValidationError("student message must be non-empty");
      message = *student_message;
    } else if (tc.next_followup < profile.scripted_followups.size()) {
      message = profile.scripted_followups[tc.next_followup];
      scripted = true;
    } else {
      throw ValidationError("input required: profile '" + profile.name +
                            "' has no scripted follow-ups left; provide a student message");
    }
    const Bot bot = get_bot(tc.bot_id);
    const PromptVersion current = get_version(bot.current_version);
    if (!domain::is_allowed_transition(tc.status, CaseStatus::awaiting_review)) {
      throw StateError(fmt::format("test case {} is {} and cannot continue", tc.id,
                                   domain::to_string(tc.status)));
    }
    auto transcript = tc.transcript;
    transcript.push_back({domain::Role::student, message, std::nullopt});
    std::string reply = scenario::bot_reply(gateway_, provider_for(bot), current.full_text,
                                            transcript, llm::kInteractiveTemperature);
    transcript.push_back({domain::Role::bot, std::move(reply), current.id});
    tc.transcript = std::move(transcript);
    if (scripted) ++tc.next_followup;
    domain::transition(tc, CaseStatus::awaiting_review);
    tc.updated_at = clock_.now();
    save(tc);
    return tc;
  });
}

TestCase Workspace::replay_case(const Bot& bot, TestCase tc) {
  const PromptVersion current = get_version(bot.current_version);
  tc.transcript = scenario::replay(gateway_, provider_for(bot), current.full_text, current.id,
                                   tc.transcript, llm::kPipelineTemperature);
  return tc;
}

TestCase Workspace::refresh_test_case(const std::string& case_id) {
  const TestCase snapshot = get_test_case(case_id);
  return store_.with_bot_lock(snapshot.bot_id, [&] {
    TestCase tc = get_test_case(case_id);
    const Bot bot = get_bot(tc.bot_id);
    tc = replay_case(bot, std::move(tc));
    domain::transition(tc, CaseStatus::awaiting_review);
    tc.updated_at = clock_.now();
    save(tc);
    return tc;
  });
}

TestCase Workspace::mark_pass(const std::string& case_id) {
  const TestCase snapshot = get_test_case(case_id);
  return store_.with_bot_lock(snapshot.bot_id, [&] {
    TestCase tc = get_test_case(case_id);
    if (tc.status == CaseStatus::unrun) {
      throw StateError("test case " + tc.id + " is unrun: nothing to approve");
    }
    if (tc.status != CaseStatus::awaiting_review && tc.status != CaseStatus::regressed) {
      throw StateError(fmt::format("test case {} is {}; only awaiting_review or regressed cases "
                                   "can be marked pass",
                                   tc.id, domain::to_string(tc.status)));
    }
    if (tc.transcript.empty() || tc.transcript.back().role != domain::Role::bot) {
      throw StateError("test case " + tc.id + " does not end with a bot reply");
    }
    const Bot bot = get_bot(tc.bot_id);
    const auto& last = tc.transcript.back();
    if (last.produced_by_version != bot.current_version) {
      throw StateError("test case " + tc.id +
                       " was produced under an older prompt version; re-run it before approving");
    }
    tc.approved_snapshot =
        domain::ApprovedSnapshot{tc.transcript.size() - 1, last.text, *last.produced_by_version};
    domain::transition(tc, CaseStatus::passed);
    tc.updated_at = clock_.now();
    save(tc);
    return tc;
  });
}

TestCase Workspace::abandon_test_case(const std::string& case_id) {
  const TestCase snapshot = get_test_case(case_id);
  return store_.with_bot_lock(snapshot.bot_id, [&] {
    TestCase tc = get_test_case(case_id);
    domain::transition(tc, CaseStatus::failed);
    tc.updated_at = clock_.now();
    save(tc);
    return tc;
  });
}

TestCase Workspace::get_test_case(const std::string& case_id) const {
  return load<TestCase>(store_, RecordKind::test_case, case_id, "test case");
}

std::vector<TestCase> Workspace::list_test_cases(const std::string& bot_id) const {
  return load_all<TestCase>(store_, RecordKind::test_case, bot_id);
}

// ---------------------------------------------------------------------------
// Pipeline

Submission Workspace::submit_correction(const std::string& case_id, std::size_t turn_index,
                                        const std::string& corrected_text) {
  const TestCase snapshot = get_test_case(case_id);
  Submission out = store_.with_bot_lock(snapshot.bot_id, [&] {
    const TestCase tc = get_test_case(case_id);
    const Bot bot = get_bot(tc.bot_id);
    require_draft(bot);
    if (turn_index >= tc.transcript.size()) {
      throw ValidationError(fmt::format("turn {} is out of range (transcript has {} turns)",
                                        turn_index, tc.transcript.size()));
    }
    domain::Correction c;
    c.id = ids_.new_id("corr");
    c.bot_id = bot.id;
    c.test_case_id = tc.id;
    c.turn_index = turn_index;
    c.original_text = tc.transcript[turn_index].text;
    c.corrected_text = corrected_text;
    c.created_at = clock_.now();
    pipeline::validate_correction(c, tc.transcript);

    for (const auto& r : list_runs(bot.id)) {
      if (r.status == RunStatus::running) {
        throw BusyError("bot " + bot.id + " already has pipeline run " + r.id + " in progress");
      }
    }
    store_.put(RecordKind::correction, c.id, bot.id, c);
    PipelineRun run;
    run.id = ids_.new_id("run");
    run.bot_id = bot.id;
    run.correction_id = c.id;
    run.status = RunStatus::running;
    run.created_at = run.updated_at = clock_.now();
    save(run);
    return Submission{c, run.id};
  });

  if (config_.schedule) {
    const std::string run_id = out.run_id;
    config_.schedule([this, run_id] { execute_run(run_id); });
  } else {
    execute_run(out.run_id);
  }
  return out;
}

PipelineRun Workspace::run_pipeline(const std::string& correction_id) {
  const auto c = get_correction(correction_id);
  const std::string run_id = store_.with_bot_lock(c.bot_id, [&] {
    const Bot bot = get_bot(c.bot_id);
    require_draft(bot);
    for (const auto& r : list_runs(bot.id)) {
      if (r.status == RunStatus::running) {
        throw BusyError("bot " + bot.id + " already has pipeline run " + r.id + " in progress");
      }
    }
    PipelineRun run;
    run.id = ids_.new_id("run");
    run.bot_id = bot.id;
    run.correction_id = c.id;
    run.status = RunStatus::running;
    run.created_at = run.updated_at = clock_.now();
    save(run);
    return run.id;
  });
  return execute_run(run_id);
}

void Workspace::fail_run(PipelineRun run, const std::string& detail) {
  store_.with_bot_lock(run.bot_id, [&] {
    run.status = RunStatus::errored;
    run.error_detail = detail;
    run.updated_at = clock_.now();
    save(run);
  });
}

PipelineRun Workspace::execute_run(const std::string& run_id) {
  PipelineRun run = get_run(run_id);
  if (run.status != RunStatus::running) {
    throw StateError("pipeline run " + run_id + " is not running");
  }
  try {
    const auto correction = get_correction(run.correction_id);
    const TestCase tc = get_test_case(correction.test_case_id);
    const Bot bot = get_bot(run.bot_id);
    const PromptVersion current = get_version(bot.current_version);
    const auto ctx = model_for(bot);
    auto checkpoint = [&] {
      run.updated_at = clock_.now();
      store_.with_bot_lock(run.bot_id, [&] { save(run); });
    };

    const auto intent = pipeline::analyze_correction(ctx, correction, tc.transcript, current.full_text);
    run.inferred_intent = intent;
    checkpoint();

    const auto proposed = pipeline::propose_rewrite(ctx, current.full_text, intent, correction);
    PromptVersion staged;
    staged.id = ids_.new_id("ver");
    staged.bot_id = bot.id;
    staged.parent_id = current.id;
    staged.full_text = proposed.new_full_text;
    staged.diff_from_parent = proposed.diff;
    staged.provenance = domain::Provenance::pipeline_rewrite;
    staged.origin_correction = correction.id;
    staged.created_at = clock_.now();
    store_.with_bot_lock(run.bot_id, [&] {
      store_.put(RecordKind::version, staged.id, bot.id, staged);
    });
    run.proposed_version = staged.id;
    run.rewrite_rationale = proposed.rationale;
    checkpoint();

    std::vector<TestCase> passed;
    for (auto& c : list_test_cases(bot.id)) {
      if (c.status == CaseStatus::passed) passed.push_back(std::move(c));
    }
    auto history = intent_history(bot.id);
    history.push_back(intent);
    run.regression_report =
        pipeline::verify_regressions(ctx, proposed, staged.id, passed, history, config_.judge_mode,
                                     config_.regression_parallelism);
    run.status = RunStatus::awaiting_teacher;
    checkpoint();
  } catch (const std::exception& e) {
    fail_run(run, e.what());
    return get_run(run_id);
  }
  return run;
}

ApplyOutcome Workspace::decide(const std::string& run_id, Decision decision) {
  const PipelineRun snapshot = get_run(run_id);
  return store_.with_bot_lock(snapshot.bot_id, [&] {
    ApplyOutcome out;
    out.run = get_run(run_id);
    out.bot = get_bot(out.run.bot_id);
    if (out.run.status != RunStatus::awaiting_teacher) {
      throw StateError(fmt::format("pipeline run {} is {}, not awaiting_teacher", run_id,
                                   domain::to_string(out.run.status)));
    }
    if (decision == Decision::discard) {
      out.run.status = RunStatus::discarded;
      out.run.updated_at = clock_.now();
      save(out.run);
      out.cases = list_test_cases(out.bot.id);
      return out;
    }

    require_draft(out.bot);
    const PromptVersion proposed = get_version(*out.run.proposed_version);
    if (proposed.parent_id != out.bot.current_version) {
      throw StateError("pipeline run " + run_id +
                       " was proposed against an older prompt version; submit the correction again");
    }
    out.bot.current_version = proposed.id;
    save(out.bot);
    out.run.status = RunStatus::applied;
    out.run.updated_at = clock_.now();
    save(out.run);

    const auto& report = *out.run.regression_report;
    auto verdict_of = [&](const std::string& case_id) -> std::optional<domain::Verdict> {
      for (const auto& v : report.evaluated_cases) {
        if (v.test_case_id == case_id) return v.verdict;
      }
      return std::nullopt;
    };

    for (TestCase tc : list_test_cases(out.bot.id)) {
      if (tc.status == CaseStatus::passed) {
        if (verdict_of(tc.id) == domain::Verdict::pass) {
          tc.approved_snapshot->prompt_version = proposed.id;
        } else {
          domain::transition(tc, CaseStatus::regressed);
        }
      }
      if (tc.status != CaseStatus::failed) {
        try {
          tc = replay_case(out.bot, std::move(tc));
          if (tc.status == CaseStatus::unrun) domain::transition(tc, CaseStatus::awaiting_review);
        } catch (const std::exception& e) {
          out.refresh_errors[tc.id] = e.what();
        }
      }
      tc.updated_at = clock_.now();
      save(tc);
      out.cases.push_back(std::move(tc));
    }
    return out;
  });
}

PipelineRun Workspace::get_run(const std::string& run_id) const {
  return load<PipelineRun>(store_, RecordKind::run, run_id, "pipeline run");
}

std::vector<PipelineRun> Workspace::list_runs(const std::string& bot_id) const {
  return load_all<PipelineRun>(store_, RecordKind::run, bot_id);
}

domain::Correction Workspace::get_correction(const std::string& correction_id) const {
  return load<domain::Correction>(store_, RecordKind::correction, correction_id, "correction");
}

std::size_t Workspace::recover_interrupted_runs() {
  std::size_t n = 0;
  for (auto run : load_all<PipelineRun>(store_, RecordKind::run, {})) {
    if (run.status == RunStatus::running) {
      fail_run(std::move(run), "interrupted before completion");
      ++n;
    }
  }
  return n;
}

std::vector<domain::InferredIntent> Workspace::intent_history(const std::string& bot_id) const {
  const auto runs = list_runs(bot_id);
  std::vector<domain::InferredIntent> out;
  for (const auto& v : version_chain(bot_id)) {
    if (v.provenance != domain::Provenance::pipeline_rewrite) continue;
    for (const auto& r : runs) {
      if (r.status == RunStatus::applied && r.proposed_version == v.id && r.inferred_intent) {
        out.push_back(*r.inferred_intent);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regression and publication

RegressOutcome Workspace::regress(const std::string& bot_id) {
  const Bot bot = get_bot(bot_id);
  const PromptVersion current = get_version(bot.current_version);
  std::vector<TestCase> passed;
  for (auto& c : list_test_cases(bot.id)) {
    if (c.status == CaseStatus::passed) passed.push_back(std::move(c));
  }
  pipeline::ProposedPromptUpdate same{current.full_text, {}, {}};
  const auto history = intent_history(bot.id);
  RegressOutcome out;
  out.version_id = current.id;
  out.report = pipeline::verify_regressions(model_for(bot), same, current.id, passed, history,
                                            config_.judge_mode, config_.regression_parallelism);
  return out;
}

domain::GateDecision Workspace::gate(const std::string& bot_id) const {
  const Bot bot = get_bot(bot_id);
  const auto cases = list_test_cases(bot_id);
  const auto runs = list_runs(bot_id);
  return domain::check_publication_gate(bot, cases, runs);
}

std::string Workspace::publish(const std::string& bot_id) {
  get_bot(bot_id);
  return store_.with_bot_lock(bot_id, [&] {
    Bot bot = get_bot(bot_id);
    if (bot.status == BotStatus::published) {
      throw StateError("bot " + bot_id + " is already published");
    }
    const auto decision = gate(bot_id);
    if (!decision.allowed) {
      std::string msg = "publication blocked";
      for (std::size_t i = 0; i < decision.reasons.size(); ++i) {
        msg += (i == 0 ? ": " : "; ") + decision.reasons[i];
      }
      throw Error(ErrorCode::gate_blocked, msg,
                  nlohmann::json{{"reasons", decision.reasons},
                                 {"offending_case_ids", decision.offending_case_ids}});
    }
    bot.share_token = ids_.new_share_token();
    bot.status = BotStatus::published;
    save(bot);
    return "/share/" + *bot.share_token;
  });
}

Bot Workspace::bot_by_share_token(const std::string& token) const {
  if (!token.empty()) {
    for (auto& bot : list_bots()) {
      if (bot.status == BotStatus::published && bot.share_token == token) return bot;
    }
  }
  throw NotFoundError("no published bot for this share link");
}

std::string Workspace::share_reply(const Bot& bot, const std::vector<domain::Turn>& transcript) {
  const PromptVersion current = get_version(bot.current_version);
  return scenario::bot_reply(gateway_, provider_for(bot), current.full_text, transcript,
                             llm::kInteractiveTemperature);
}

}  // namespace pd::service
