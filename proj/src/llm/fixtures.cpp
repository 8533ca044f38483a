#include "pd/llm/fixtures.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <mutex>
#include <vector>

namespace pd::llm {

void FixtureStore::register_fixture(const std::string& key, std::string response_text) {
  if (key.empty()) {
    throw ValidationError("fixture key must be non-empty");
  }
  std::unique_lock lock(mu_);
  entries_[key] = std::move(response_text);
}

std::size_t FixtureStore::load_fixture_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FixtureLoadError(0, fmt::format("cannot read fixture file {}", path.string()));
  }
  // Parse everything first so a bad line leaves the store untouched.
  std::vector<std::pair<std::string, std::string>> parsed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FixtureLoadError(line_no, fmt::format("{}:{}: malformed fixture record: {}",
                                                  path.string(), line_no, e.what()));
    }
    if (!record.is_object() || !record.contains("key") || !record.contains("response") ||
        !record["key"].is_string() || !record["response"].is_string() ||
        record["key"].get_ref<const std::string&>().empty()) {
      throw FixtureLoadError(line_no, fmt::format("{}:{}: fixture record needs string key and response",
                                                  path.string(), line_no));
    }
    parsed.emplace_back(record["key"].get<std::string>(), record["response"].get<std::string>());
  }
  std::unique_lock lock(mu_);
  for (auto& [k, v] : parsed) {
    entries_[k] = std::move(v);
  }
  return parsed.size();
}

std::optional<std::string> FixtureStore::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::size_t FixtureStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

void FixtureStore::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mu_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InternalError(fmt::format("cannot write fixture file {}", path.string()));
  }
  for (const auto& [k, v] : entries_) {
    out << nlohmann::json{{"key", k}, {"response", v}}.dump() << '\n';
  }
}

}  // namespace pd::llm
