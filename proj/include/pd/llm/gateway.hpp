#pragma once

#include "pd/llm/fixtures.hpp"
#include "pd/llm/http_transport.hpp"
#include "pd/llm/types.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace pd::llm {

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Replays registered fixtures. A miss is an error naming the key.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::shared_ptr<FixtureStore> fixtures)
      : fixtures_(std::move(fixtures)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<FixtureStore> fixtures_;
};

/// Answers every request with a function and records the answer as a fixture.
/// Used to author fixture files; never installed by default.
class RecordingBackend final : public ChatBackend {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;
  RecordingBackend(std::shared_ptr<FixtureStore> sink, Responder responder)
      : sink_(std::move(sink)), responder_(std::move(responder)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<FixtureStore> sink_;
  Responder responder_;
};

struct RemoteSettings {
  std::string openai_model = "gpt-4o-mini";
  std::string anthropic_model = "claude-3-5-haiku-latest";
  std::string google_model = "gemini-1.5-flash";
  std::string openai_base_url = "https://api.openai.com";
  std::string anthropic_base_url = "https://api.anthropic.com";
  std::string google_base_url = "https://generativelanguage.googleapis.com";
  std::optional<std::string> openai_api_key;
  std::optional<std::string> anthropic_api_key;
  std::optional<std::string> google_api_key;
  std::chrono::milliseconds deadline{60'000};
  std::chrono::milliseconds backoff_base{500};
  int max_retries = 2;

  /// Keys from OPENAI_API_KEY / ANTHROPIC_API_KEY / GOOGLE_API_KEY, deadline
  /// from PD_PROVIDER_TIMEOUT_SECS, model names from PD_OPENAI_MODEL,
  /// PD_ANTHROPIC_MODEL, PD_GOOGLE_MODEL.
  static RemoteSettings from_env();
};

/// One vendor's native chat API over HTTP, with bounded retries.
class RemoteBackend final : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RemoteBackend(Provider vendor, RemoteSettings settings, std::shared_ptr<HttpTransport> transport,
                Sleeper sleeper = {});
  ChatResponse complete(const ChatRequest& request) override;

  /// Number of HTTP attempts made by the most recent complete() on this thread.
  static int last_attempts();

 private:
  Provider vendor_;
  RemoteSettings settings_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
};

/// Dispatches on ChatRequest::provider. Safe for concurrent use once the
/// backends are installed.
class Gateway {
 public:
  Gateway() = default;

  void set_backend(Provider provider, std::shared_ptr<ChatBackend> backend);

  /// Validates the request, then forwards it to the provider's backend.
  ChatResponse complete(const ChatRequest& request) const;

  /// Scripted backend over `fixtures` plus remote backends from `settings`.
  static Gateway standard(std::shared_ptr<FixtureStore> fixtures, RemoteSettings settings);

 private:
  std::map<Provider, std::shared_ptr<ChatBackend>> backends_;
};

}  // namespace pd::llm
