#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace pd::pipeline {

/// A chat template: system prompt plus one user message, with {{name}}
/// placeholders.
struct MessageTemplate {
  std::string system;
  std::string user;
};

/// Replaces each {{name}} with vars[name]. Substituted values are not
/// re-scanned. Throws InternalError for a placeholder with no value.
std::string render(std::string_view text, const std::map<std::string, std::string>& vars);

/// Parses the "=== system ===" / "=== user ===" section format.
MessageTemplate parse_message_template(std::string_view text);

/// Text assets under <root>/templates. Their exact wording feeds the fixture
/// keys, so edits to these files invalidate recorded fixtures.
class Templates {
 public:
  static Templates load(const std::filesystem::path& asset_root);

  const MessageTemplate& intent_analysis() const { return intent_; }
  const MessageTemplate& prompt_rewrite() const { return rewrite_; }
  const MessageTemplate& equivalence_judge() const { return judge_; }
  const std::string& reprompt_format() const { return reprompt_; }
  const std::string& rewrite_must_change() const { return must_change_; }
  const std::string& rewrite_keep_anchor() const { return keep_anchor_; }

  /// Named system-prompt starters from templates/prompts/<name>.txt.
  const std::map<std::string, std::string>& prompt_templates() const { return prompts_; }

 private:
  MessageTemplate intent_;
  MessageTemplate rewrite_;
  MessageTemplate judge_;
  std::string reprompt_;
  std::string must_change_;
  std::string keep_anchor_;
  std::map<std::string, std::string> prompts_;
};

/// PD_ASSET_DIR if set, else the directory baked in at build time.
std::filesystem::path default_asset_root();

}  // namespace pd::pipeline
