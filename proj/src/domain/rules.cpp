#include "pd/domain/rules.hpp"

#include "pd/common/error.hpp"

#include <fmt/format.h>
#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace pd::domain {

namespace {

constexpr std::string_view kScaffoldPrefix = "You are a tutoring assistant. Context: ";
constexpr std::string_view kMaterialsHeading = "\n\nReference materials:";

// Length of the UTF-8 sequence starting with `lead`, or 0 if `lead` cannot
// start one.
std::size_t utf8_sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return lead >= 0xC2 ? 2 : 0;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return lead <= 0xF4 ? 4 : 0;
  return 0;
}

}  // namespace

GateDecision check_publication_gate(const Bot& bot, std::span<const TestCase> cases,
                                    std::span<const PipelineRun> runs) {
  GateDecision out;
  const bool has_cycle = std::any_of(runs.begin(), runs.end(), [&](const PipelineRun& r) {
    return r.bot_id == bot.id && r.status == RunStatus::applied;
  });
  if (!has_cycle) {
    out.reasons.emplace_back(kReasonNoCycle);
  }
  if (cases.empty()) {
    out.reasons.emplace_back(kReasonNoCases);
  }
  for (const auto& tc : cases) {
    if (tc.status != CaseStatus::passed) {
      out.reasons.push_back(fmt::format("test case {} is {}", tc.id, to_string(tc.status)));
      out.offending_case_ids.push_back(tc.id);
    }
  }
  out.allowed = out.reasons.empty();
  return out;
}

bool is_allowed_transition(CaseStatus from, CaseStatus to) {
  if (from == to) {
    return true;
  }
  switch (from) {
    case CaseStatus::unrun:
      return to == CaseStatus::awaiting_review;
    case CaseStatus::awaiting_review:
      return to == CaseStatus::passed || to == CaseStatus::failed;
    case CaseStatus::passed:
      return to == CaseStatus::regressed || to == CaseStatus::awaiting_review;
    case CaseStatus::regressed:
      return to == CaseStatus::awaiting_review || to == CaseStatus::passed;
    case CaseStatus::failed:
      return to == CaseStatus::awaiting_review;
  }
  return false;
}

void transition(TestCase& tc, CaseStatus to) {
  if (!is_allowed_transition(tc.status, to)) {
    throw StateError(fmt::format("test case {} cannot move from {} to {}", tc.id,
                                 to_string(tc.status), to_string(to)));
  }
  tc.status = to;
}

bool transcript_alternates(std::span<const Turn> transcript) {
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::student : Role::bot;
    if (transcript[i].role != expected) {
      return false;
    }
  }
  return true;
}

std::string root_scaffold(std::string_view description,
                          std::span<const MaterialAttachment> materials) {
  std::string prompt(kScaffoldPrefix);
  prompt += description;
  return with_materials(prompt, materials);
}

std::string with_materials(std::string_view prompt,
                           std::span<const MaterialAttachment> materials) {
  std::string out(prompt.substr(0, prompt.find(kMaterialsHeading)));
  if (materials.empty()) {
    return out;
  }
  out += kMaterialsHeading;
  for (const auto& m : materials) {
    out += "\n\n### ";
    out += m.filename;
    out += '\n';
    out += m.content;
  }
  return out;
}

MaterialAttachment make_material(std::string id, std::string filename, std::string_view raw) {
  MaterialAttachment m;
  m.id = std::move(id);
  m.filename = std::move(filename);
  m.byte_size = raw.size();
  std::size_t pos = 0;
  std::size_t chars = 0;
  std::size_t cut = raw.size();
  while (pos < raw.size()) {
    const auto lead = static_cast<unsigned char>(raw[pos]);
    const std::size_t len = utf8_sequence_length(lead);
    if (len == 0 || pos + len > raw.size()) {
      throw ValidationError("material '" + m.filename + "' is not UTF-8 text");
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(raw[pos + k]) & 0xC0) != 0x80) {
        throw ValidationError("material '" + m.filename + "' is not UTF-8 text");
      }
    }
    if (lead == 0) {
      throw ValidationError("material '" + m.filename + "' contains NUL bytes");
    }
    if (chars == kMaterialCharCap && cut == raw.size()) {
      cut = pos;
    }
    ++chars;
    pos += len;
  }
  m.truncated = cut < raw.size();
  m.content = std::string(raw.substr(0, cut));
  return m;
}

std::string mint_share_token() {
  std::array<unsigned char, 16> bytes{};
  if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1) {
    throw InternalError("entropy source failure");
  }
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (unsigned char b : bytes) {
    acc = (acc << 8) | b;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      out += kAlphabet[(acc >> bits) & 0x3F];
    }
  }
  if (bits > 0) {
    out += kAlphabet[(acc << (6 - bits)) & 0x3F];
  }
  return out;
}

std::pair<Bot, PromptVersion> new_bot(std::string_view title, std::string_view description,
                                      ModelChoice model, std::vector<MaterialAttachment> materials,
                                      Clock& clock, IdSource& ids) {
  const bool blank = std::all_of(title.begin(), title.end(),
                                 [](unsigned char c) { return std::isspace(c) != 0; });
  if (blank) {
    throw ValidationError("title must be non-empty");
  }
  const Timestamp now = clock.now();
  Bot bot;
  bot.id = ids.new_id("bot");
  bot.title = std::string(title);
  bot.description = std::string(description);
  bot.model_choice = model;
  bot.materials = std::move(materials);
  bot.created_at = now;

  PromptVersion root;
  root.id = ids.new_id("ver");
  root.bot_id = bot.id;
  root.full_text = root_scaffold(description, bot.materials);
  root.provenance = Provenance::initial;
  root.created_at = now;

  bot.current_version = root.id;
  return {std::move(bot), std::move(root)};
}

}  // namespace pd::domain
