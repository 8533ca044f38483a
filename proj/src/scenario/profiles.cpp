#include "pd/scenario/profiles.hpp"

#include "pd/common/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace pd::scenario {

namespace {
constexpr const char* kBuiltinFiles[] = {"expected_path.json", "struggling_learner.json",
                                         "off_topic_input.json"};
}

domain::StudentProfile load_profile(const std::filesystem::path& file, bool builtin) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw InternalError("cannot read profile " + file.string());
  }
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw InternalError("profile " + file.string() + " is not a JSON object");
  }
  domain::StudentProfile p;
  try {
    p.id = doc.at("id").get<std::string>();
    p.name = doc.at("name").get<std::string>();
    p.description = doc.value("description", std::string{});
    p.opening_message = doc.at("opening_message").get<std::string>();
    p.scripted_followups = doc.value("followups", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw InternalError("profile " + file.string() + ": " + e.what());
  }
  p.builtin = builtin;
  validate_profile(p);
  return p;
}

std::vector<domain::StudentProfile> builtin_profiles(const std::filesystem::path& asset_root) {
  std::vector<domain::StudentProfile> out;
  for (const char* name : kBuiltinFiles) {
    out.push_back(load_profile(asset_root / "profiles" / name, true));
  }
  return out;
}

void validate_profile(const domain::StudentProfile& profile) {
  if (profile.name.empty()) {
    throw ValidationError("profile name must be non-empty");
  }
  if (profile.opening_message.empty()) {
    throw ValidationError("profile opening_message must be non-empty");
  }
}

}  // namespace pd::scenario
