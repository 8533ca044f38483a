#pragma once

#include "pd/domain/rules.hpp"
#include "pd/domain/types.hpp"
#include "pd/llm/gateway.hpp"
#include "pd/pipeline/steps.hpp"
#include "pd/pipeline/templates.hpp"
#include "pd/scenario/judge.hpp"
#include "pd/store/store.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pd::service {

struct WorkspaceConfig {
  scenario::JudgeMode judge_mode = scenario::JudgeMode::llm;
  /// Serves every bot from this provider instead of its model_choice.
  std::optional<llm::Provider> provider_override;
  unsigned regression_parallelism = 4;
  /// Where submit_correction schedules pipeline work. Runs inline when empty.
  std::function<void(std::function<void()>)> schedule;
};

struct MaterialUpload {
  std::string filename;
  std::string content;
};

struct StartResult {
  domain::TestCase test_case;
  /// Set when the first bot reply could not be produced; the case stays unrun.
  std::optional<std::string> error;
};

struct Submission {
  domain::Correction correction;
  std::string run_id;
};

enum class Decision { apply, discard };

struct ApplyOutcome {
  domain::Bot bot;
  domain::PipelineRun run;
  std::vector<domain::TestCase> cases;
  /// case id -> error for cases whose refresh failed (transcript kept).
  std::map<std::string, std::string> refresh_errors;
};

struct RegressOutcome {
  domain::RegressionReport report;
  std::string version_id;
};

/// The authoring workflow over one store. Every state change goes through a
/// method here and happens under the owning bot's writer lock; the HTTP layer
/// and the CLI add no rules of their own.
class Workspace {
 public:
  Workspace(store::Store& store, const llm::Gateway& gateway, pipeline::Templates templates,
            std::vector<domain::StudentProfile> builtin_profiles, Clock& clock, IdSource& ids,
            WorkspaceConfig config = {});

  // Bots and prompt versions.
  domain::Bot create_bot(const std::string& title, const std::string& description,
                         const std::string& model_choice,
                         const std::vector<MaterialUpload>& materials = {});
  domain::Bot get_bot(const std::string& bot_id) const;
  std::vector<domain::Bot> list_bots() const;
  domain::Bot add_material(const std::string& bot_id, const MaterialUpload& upload);
  domain::PromptVersion get_version(const std::string& version_id) const;
  /// Root first, current version last.
  std::vector<domain::PromptVersion> version_chain(const std::string& bot_id) const;
  /// New manual_edit version; passed cases drop back to awaiting_review.
  domain::PromptVersion edit_prompt(const std::string& bot_id, const std::string& new_text);
  /// New template version from templates/prompts/<name>.txt.
  domain::PromptVersion apply_template(const std::string& bot_id, const std::string& template_name);
  std::vector<std::string> template_names() const;

  // Profiles.
  std::vector<domain::StudentProfile> profiles() const;
  domain::StudentProfile get_profile(const std::string& profile_id) const;
  domain::StudentProfile add_profile(domain::StudentProfile profile);

  // Test cases.
  StartResult start_test_case(const std::string& bot_id, const std::string& profile_id);
  domain::TestCase advance_test_case(const std::string& case_id,
                                     const std::optional<std::string>& student_message);
  /// Replays the case under the bot's current version (refresh_after_apply).
  domain::TestCase refresh_test_case(const std::string& case_id);
  domain::TestCase mark_pass(const std::string& case_id);
  domain::TestCase abandon_test_case(const std::string& case_id);
  domain::TestCase get_test_case(const std::string& case_id) const;
  std::vector<domain::TestCase> list_test_cases(const std::string& bot_id) const;

  // Reverse prompting pipeline.
  /// Persists the correction and a running pipeline run, then schedules the
  /// run. Throws BusyError if the bot already has a running run.
  Submission submit_correction(const std::string& case_id, std::size_t turn_index,
                               const std::string& corrected_text);
  /// Executes a run created by submit_correction to completion.
  domain::PipelineRun execute_run(const std::string& run_id);
  /// Synchronous pipeline for an already persisted correction.
  domain::PipelineRun run_pipeline(const std::string& correction_id);
  ApplyOutcome decide(const std::string& run_id, Decision decision);
  domain::PipelineRun get_run(const std::string& run_id) const;
  std::vector<domain::PipelineRun> list_runs(const std::string& bot_id) const;
  domain::Correction get_correction(const std::string& correction_id) const;
  /// Marks runs left in `running` by a previous process as errored.
  std::size_t recover_interrupted_runs();

  // Regression and publication.
  /// Replays every passed case against the current version; changes nothing.
  RegressOutcome regress(const std::string& bot_id);
  domain::GateDecision gate(const std::string& bot_id) const;
  /// Returns the share path /share/{token}. Throws Error(gate_blocked).
  std::string publish(const std::string& bot_id);
  domain::Bot bot_by_share_token(const std::string& token) const;
  /// One published-bot reply to `transcript` (ending with a student turn).
  std::string share_reply(const domain::Bot& bot, const std::vector<domain::Turn>& transcript);

  /// Behavioral rules of the applied runs on the bot's current chain, oldest first.
  std::vector<domain::InferredIntent> intent_history(const std::string& bot_id) const;

  store::Store& store() { return store_; }
  const WorkspaceConfig& config() const { return config_; }

 private:
  pipeline::ModelContext model_for(const domain::Bot& bot) const;
  llm::Provider provider_for(const domain::Bot& bot) const;
  domain::PromptVersion commit_version(domain::Bot bot, std::string new_text,
                                       domain::Provenance provenance);
  void save(const domain::Bot& bot);
  void save(const domain::TestCase& tc);
  void save(const domain::PipelineRun& run);
  void fail_run(domain::PipelineRun run, const std::string& detail);
  domain::TestCase replay_case(const domain::Bot& bot, domain::TestCase tc);

  store::Store& store_;
  const llm::Gateway& gateway_;
  pipeline::Templates templates_;
  std::vector<domain::StudentProfile> builtins_;
  Clock& clock_;
  IdSource& ids_;
  WorkspaceConfig config_;
};

}  // namespace pd::service
