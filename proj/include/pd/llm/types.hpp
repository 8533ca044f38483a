#pragma once

#include "pd/common/error.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pd::llm {

enum class Provider { openai, anthropic, google, scripted };
enum class MessageRole { user, assistant };

std::string_view to_string(Provider p);
std::string_view to_string(MessageRole r);
/// Throws ValidationError for unknown names.
Provider parse_provider(std::string_view text);

struct ChatMessage {
  MessageRole role = MessageRole::user;
  std::string text;
};

struct ChatRequest {
  std::string system_prompt;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  Provider provider = Provider::scripted;
};

struct TokenUsage {
  std::uint64_t input = 0;
  std::uint64_t output = 0;
};

struct ChatResponse {
  std::string text;
  std::uint64_t provider_latency_ms = 0;
  std::optional<TokenUsage> token_usage;
};

/// Fixed temperatures: pipeline and regression calls run at 0, interactive
/// test chat and published-bot chat at 0.7.
inline constexpr double kPipelineTemperature = 0.0;
inline constexpr double kInteractiveTemperature = 0.7;

enum class GatewayErrorKind {
  configuration,
  permanent,
  timeout,
  protocol,
  fixture_miss,
  transient,
};

std::string_view to_string(GatewayErrorKind k);

class GatewayError : public Error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& message)
      : Error(ErrorCode::provider, message), kind_(kind) {}
  GatewayErrorKind kind() const noexcept { return kind_; }

 private:
  GatewayErrorKind kind_;
};

/// Throws ValidationError unless messages are non-empty, the last message is
/// from the user, temperature is in [0, 2] and max_output_tokens > 0.
void validate(const ChatRequest& request);

/// SHA-256 (lowercase hex) over the canonical JSON rendering of system
/// prompt, message sequence and temperature. Provider and token limit are
/// not part of the key.
std::string fixture_key(const ChatRequest& request);

/// The exact bytes that fixture_key hashes.
std::string fixture_key_material(const ChatRequest& request);

}  // namespace pd::llm
