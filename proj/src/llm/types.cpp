#include "pd/llm/types.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>

namespace pd::llm {

std::string_view to_string(Provider p) {
  switch (p) {
    case Provider::openai: return "openai";
    case Provider::anthropic: return "anthropic";
    case Provider::google: return "google";
    case Provider::scripted: return "scripted";
  }
  return "scripted";
}

std::string_view to_string(MessageRole r) { return r == MessageRole::user ? "user" : "assistant"; }

Provider parse_provider(std::string_view text) {
  if (text == "openai") return Provider::openai;
  if (text == "anthropic") return Provider::anthropic;
  if (text == "google") return Provider::google;
  if (text == "scripted") return Provider::scripted;
  throw ValidationError("unknown provider '" + std::string(text) + "'");
}

std::string_view to_string(GatewayErrorKind k) {
  switch (k) {
    case GatewayErrorKind::configuration: return "configuration";
    case GatewayErrorKind::permanent: return "permanent";
    case GatewayErrorKind::timeout: return "timeout";
    case GatewayErrorKind::protocol: return "protocol";
    case GatewayErrorKind::fixture_miss: return "fixture_miss";
    case GatewayErrorKind::transient: return "transient";
  }
  return "permanent";
}

void validate(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw ValidationError("chat request has no messages");
  }
  if (request.messages.back().role != MessageRole::user) {
    throw ValidationError("last chat message must have the user role");
  }
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
    throw ValidationError(fmt::format("temperature {} outside [0, 2]", request.temperature));
  }
  if (request.max_output_tokens <= 0) {
    throw ValidationError("max_output_tokens must be positive");
  }
}

std::string fixture_key_material(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"text", m.text}});
  }
  const nlohmann::json doc{{"system", request.system_prompt},
                           {"messages", std::move(messages)},
                           {"temperature", fmt::format("{:.2f}", request.temperature)}};
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string fixture_key(const ChatRequest& request) {
  const std::string material = fixture_key_material(request);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest.data(), &len, EVP_sha256(), nullptr) !=
      1) {
    throw InternalError("sha256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex += fmt::format("{:02x}", digest[i]);
  }
  return hex;
}

}  // namespace pd::llm
