#pragma once

#include "pd/llm/types.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

namespace pd::llm {

class FixtureLoadError : public Error {
 public:
  FixtureLoadError(std::size_t line, const std::string& message)
      : Error(ErrorCode::validation, message), line_(line) {}
  /// 1-based line number of the offending record, 0 if the file is unreadable.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// key -> response text. Concurrent lookups, serialized writes.
class FixtureStore {
 public:
  void register_fixture(const std::string& key, std::string response_text);

  /// Loads a JSON-lines file of {"key": ..., "response": ...} objects.
  /// Additive; later entries win. Blank lines are skipped.
  std::size_t load_fixture_file(const std::filesystem::path& path);

  std::optional<std::string> lookup(const std::string& key) const;
  std::size_t size() const;

  /// Sorted by key, one record per line.
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::string> entries_;
};

}  // namespace pd::llm
