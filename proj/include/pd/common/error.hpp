#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace pd {

/// Error categories surfaced at the service boundary. Every exception thrown
/// by the library derives from pd::Error and carries one of these.
enum class ErrorCode {
  validation,
  state,
  not_found,
  gate_blocked,
  busy,
  provider,
  internal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json details = nullptr)
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error(ErrorCode::validation, m) {}
};

struct StateError : Error {
  explicit StateError(const std::string& m) : Error(ErrorCode::state, m) {}
};

struct NotFoundError : Error {
  explicit NotFoundError(const std::string& m) : Error(ErrorCode::not_found, m) {}
};

struct BusyError : Error {
  explicit BusyError(const std::string& m) : Error(ErrorCode::busy, m) {}
};

struct InternalError : Error {
  explicit InternalError(const std::string& m) : Error(ErrorCode::internal, m) {}
};

}  // namespace pd
