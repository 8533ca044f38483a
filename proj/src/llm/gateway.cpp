#include "pd/llm/gateway.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

namespace pd::llm {

using nlohmann::json;

namespace {

thread_local int g_last_attempts = 0;

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

struct WireRequest {
  std::string base_url;
  std::string path;
  std::map<std::string, std::string> headers;
  std::string body;
};

WireRequest build_openai(const RemoteSettings& s, const std::string& key, const ChatRequest& r) {
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", r.system_prompt}});
  for (const auto& m : r.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  const json body{{"model", s.openai_model},
                  {"messages", messages},
                  {"temperature", r.temperature},
                  {"max_tokens", r.max_output_tokens}};
  return {s.openai_base_url, "/v1/chat/completions", {{"Authorization", "Bearer " + key}}, body.dump()};
}

WireRequest build_anthropic(const RemoteSettings& s, const std::string& key, const ChatRequest& r) {
  json messages = json::array();
  for (const auto& m : r.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  // Anthropic accepts temperatures in [0, 1].
  const json body{{"model", s.anthropic_model},
                  {"system", r.system_prompt},
                  {"messages", messages},
                  {"temperature", std::min(r.temperature, 1.0)},
                  {"max_tokens", r.max_output_tokens}};
  return {s.anthropic_base_url,
          "/v1/messages",
          {{"x-api-key", key}, {"anthropic-version", "2023-06-01"}},
          body.dump()};
}

WireRequest build_google(const RemoteSettings& s, const std::string& key, const ChatRequest& r) {
  json contents = json::array();
  for (const auto& m : r.messages) {
    contents.push_back({{"role", m.role == MessageRole::user ? "user" : "model"},
                        {"parts", json::array({{{"text", m.text}}})}});
  }
  const json body{
      {"systemInstruction", {{"parts", json::array({{{"text", r.system_prompt}}})}}},
      {"contents", contents},
      {"generationConfig",
       {{"temperature", r.temperature}, {"maxOutputTokens", r.max_output_tokens}}}};
  return {s.google_base_url,
          fmt::format("/v1beta/models/{}:generateContent", s.google_model),
          {{"x-goog-api-key", key}},
          body.dump()};
}

GatewayError protocol_error(Provider vendor, const std::string& what) {
  return GatewayError(GatewayErrorKind::protocol,
                      fmt::format("{} returned a malformed payload: {}", to_string(vendor), what));
}

ChatResponse parse_reply(Provider vendor, const std::string& body) {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw protocol_error(vendor, "not a JSON object");
  }
  ChatResponse out;
  try {
    switch (vendor) {
      case Provider::openai: {
        out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (auto u = doc.find("usage"); u != doc.end()) {
          out.token_usage = TokenUsage{u->value("prompt_tokens", 0ULL), u->value("completion_tokens", 0ULL)};
        }
        break;
      }
      case Provider::anthropic: {
        const auto& content = doc.at("content");
        if (!content.is_array()) throw protocol_error(vendor, "content is not an array");
        for (const auto& block : content) {
          if (block.value("type", "") == "text") out.text += block.at("text").get<std::string>();
        }
        if (auto u = doc.find("usage"); u != doc.end()) {
          out.token_usage = TokenUsage{u->value("input_tokens", 0ULL), u->value("output_tokens", 0ULL)};
        }
        break;
      }
      case Provider::google: {
        const auto& parts = doc.at("candidates").at(0).at("content").at("parts");
        if (!parts.is_array()) throw protocol_error(vendor, "parts is not an array");
        for (const auto& p : parts) {
          if (p.contains("text")) out.text += p.at("text").get<std::string>();
        }
        if (auto u = doc.find("usageMetadata"); u != doc.end()) {
          out.token_usage =
              TokenUsage{u->value("promptTokenCount", 0ULL), u->value("candidatesTokenCount", 0ULL)};
        }
        break;
      }
      case Provider::scripted:
        throw protocol_error(vendor, "not a remote provider");
    }
  } catch (const json::exception& e) {
    throw protocol_error(vendor, e.what());
  }
  return out;
}

}  // namespace

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  const std::string key = fixture_key(request);
  auto hit = fixtures_->lookup(key);
  if (!hit) {
    throw GatewayError(GatewayErrorKind::fixture_miss, "no scripted fixture for key " + key);
  }
  return ChatResponse{std::move(*hit), 0, std::nullopt};
}

ChatResponse RecordingBackend::complete(const ChatRequest& request) {
  std::string text = responder_(request);
  sink_->register_fixture(fixture_key(request), text);
  return ChatResponse{std::move(text), 0, std::nullopt};
}

RemoteSettings RemoteSettings::from_env() {
  RemoteSettings s;
  s.openai_api_key = env("OPENAI_API_KEY");
  s.anthropic_api_key = env("ANTHROPIC_API_KEY");
  s.google_api_key = env("GOOGLE_API_KEY");
  if (auto v = env("PD_PROVIDER_TIMEOUT_SECS")) {
    char* end = nullptr;
    const long secs = std::strtol(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0' || secs <= 0) {
      throw ValidationError("PD_PROVIDER_TIMEOUT_SECS must be a positive integer");
    }
    s.deadline = std::chrono::seconds(secs);
  }
  if (auto v = env("PD_OPENAI_MODEL")) s.openai_model = *v;
  if (auto v = env("PD_ANTHROPIC_MODEL")) s.anthropic_model = *v;
  if (auto v = env("PD_GOOGLE_MODEL")) s.google_model = *v;
  return s;
}

RemoteBackend::RemoteBackend(Provider vendor, RemoteSettings settings,
                             std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : vendor_(vendor),
      settings_(std::move(settings)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

int RemoteBackend::last_attempts() { return g_last_attempts; }

ChatResponse RemoteBackend::complete(const ChatRequest& request) {
  g_last_attempts = 0;
  const std::optional<std::string>* key = nullptr;
  const char* var = "";
  switch (vendor_) {
    case Provider::openai: key = &settings_.openai_api_key; var = "OPENAI_API_KEY"; break;
    case Provider::anthropic: key = &settings_.anthropic_api_key; var = "ANTHROPIC_API_KEY"; break;
    case Provider::google: key = &settings_.google_api_key; var = "GOOGLE_API_KEY"; break;
    case Provider::scripted: throw InternalError("scripted is not a remote provider");
  }
  if (!key->has_value() || (*key)->empty()) {
    throw GatewayError(GatewayErrorKind::configuration,
                       fmt::format("{} is not set; cannot call {}", var, to_string(vendor_)));
  }

  WireRequest wire;
  switch (vendor_) {
    case Provider::openai: wire = build_openai(settings_, **key, request); break;
    case Provider::anthropic: wire = build_anthropic(settings_, **key, request); break;
    default: wire = build_google(settings_, **key, request); break;
  }

  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const auto deadline = started + settings_.deadline;
  std::string last_failure;
  for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (remaining.count() <= 0) {
      throw GatewayError(GatewayErrorKind::timeout,
                         fmt::format("{} call exceeded its {} ms deadline", to_string(vendor_),
                                     settings_.deadline.count()));
    }
    ++g_last_attempts;
    try {
      const HttpResult res =
          transport_->post_json(wire.base_url, wire.path, wire.headers, wire.body, remaining);
      if (res.status >= 200 && res.status < 300) {
        ChatResponse out = parse_reply(vendor_, res.body);
        out.provider_latency_ms = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - started).count());
        return out;
      }
      if (res.status >= 400 && res.status < 500) {
        throw GatewayError(GatewayErrorKind::permanent,
                           fmt::format("{} rejected the request with HTTP {}: {}", to_string(vendor_),
                                       res.status, res.body.substr(0, 500)));
      }
      last_failure = fmt::format("HTTP {}", res.status);
    } catch (const TransportFailure& f) {
      last_failure = f.message;
      if (f.timed_out && clock::now() >= deadline) {
        throw GatewayError(GatewayErrorKind::timeout,
                           fmt::format("{} call timed out: {}", to_string(vendor_), f.message));
      }
    }
    if (attempt == settings_.max_retries) {
      break;
    }
    const auto backoff = settings_.backoff_base * (1 << attempt);
    if (clock::now() + backoff >= deadline) {
      throw GatewayError(GatewayErrorKind::timeout,
                         fmt::format("{} call would exceed its deadline after: {}",
                                     to_string(vendor_), last_failure));
    }
    sleeper_(backoff);
  }
  throw GatewayError(GatewayErrorKind::transient,
                     fmt::format("{} failed after {} attempts: {}", to_string(vendor_),
                                 g_last_attempts, last_failure));
}

void Gateway::set_backend(Provider provider, std::shared_ptr<ChatBackend> backend) {
  backends_[provider] = std::move(backend);
}

ChatResponse Gateway::complete(const ChatRequest& request) const {
  validate(request);
  auto it = backends_.find(request.provider);
  if (it == backends_.end() || !it->second) {
    throw GatewayError(GatewayErrorKind::configuration,
                       fmt::format("no backend configured for {}", to_string(request.provider)));
  }
  return it->second->complete(request);
}

Gateway Gateway::standard(std::shared_ptr<FixtureStore> fixtures, RemoteSettings settings) {
  Gateway g;
  g.set_backend(Provider::scripted, std::make_shared<ScriptedBackend>(std::move(fixtures)));
  auto transport = std::make_shared<HttplibTransport>();
  for (Provider p : {Provider::openai, Provider::anthropic, Provider::google}) {
    g.set_backend(p, std::make_shared<RemoteBackend>(p, settings, transport));
  }
  return g;
}

}  // namespace pd::llm
