#include "pd/pipeline/templates.hpp"

#include "pd/common/error.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef PD_DEFAULT_ASSET_DIR
#define PD_DEFAULT_ASSET_DIR "."
#endif

namespace pd::pipeline {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw InternalError("cannot read asset " + p.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_final_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string render(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 2, close - open - 2));
    const auto it = vars.find(name);
    if (it == vars.end()) {
      throw InternalError("template placeholder {{" + name + "}} has no value");
    }
    out += it->second;
    pos = close + 2;
  }
  return out;
}

MessageTemplate parse_message_template(std::string_view text) {
  constexpr std::string_view kSystem = "=== system ===\n";
  constexpr std::string_view kUser = "\n=== user ===\n";
  const auto s = text.find(kSystem);
  const auto u = text.find(kUser);
  if (s != 0 || u == std::string_view::npos) {
    throw InternalError("message template needs '=== system ===' then '=== user ===' sections");
  }
  MessageTemplate t;
  t.system = std::string(text.substr(kSystem.size(), u - kSystem.size()));
  t.user = strip_final_newline(std::string(text.substr(u + kUser.size())));
  return t;
}

Templates Templates::load(const std::filesystem::path& asset_root) {
  const auto dir = asset_root / "templates";
  Templates t;
  t.intent_ = parse_message_template(read_file(dir / "intent_analysis.txt"));
  t.rewrite_ = parse_message_template(read_file(dir / "prompt_rewrite.txt"));
  t.judge_ = parse_message_template(read_file(dir / "equivalence_judge.txt"));
  t.reprompt_ = strip_final_newline(read_file(dir / "reprompt_format.txt"));
  t.must_change_ = strip_final_newline(read_file(dir / "rewrite_must_change.txt"));
  t.keep_anchor_ = strip_final_newline(read_file(dir / "rewrite_keep_anchor.txt"));
  const auto prompts = dir / "prompts";
  if (std::filesystem::is_directory(prompts)) {
    for (const auto& entry : std::filesystem::directory_iterator(prompts)) {
      if (entry.path().extension() == ".txt") {
        t.prompts_[entry.path().stem().string()] = strip_final_newline(read_file(entry.path()));
      }
    }
  }
  return t;
}

std::filesystem::path default_asset_root() {
  if (const char* v = std::getenv("PD_ASSET_DIR"); v != nullptr && *v != '\0') {
    return v;
  }
  return PD_DEFAULT_ASSET_DIR;
}

}  // namespace pd::pipeline
