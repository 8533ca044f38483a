#include "support.hpp"

#include "pd/llm/http_transport.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <thread>

using namespace pd;
using namespace pd::llm;
using pd::testing::TempDir;

namespace {

ChatRequest simple_request(double temperature = 0.0) {
  ChatRequest r;
  r.system_prompt = "You are a tutor.";
  r.messages = {{MessageRole::user, "What is 2+2?"}};
  r.temperature = temperature;
  return r;
}

// Plays back a list of canned outcomes and records what was sent.
class FakeTransport final : public HttpTransport {
 public:
  struct Outcome {
    int status = 200;
    std::string body;
    bool fail = false;
  };
  std::vector<Outcome> script;
  std::vector<std::string> paths;
  std::vector<std::map<std::string, std::string>> headers;
  std::vector<std::string> bodies;

  HttpResult post_json(const std::string&, const std::string& path,
                       const std::map<std::string, std::string>& h, const std::string& body,
                       std::chrono::milliseconds) override {
    paths.push_back(path);
    headers.push_back(h);
    bodies.push_back(body);
    const Outcome o = script.at(paths.size() - 1);
    if (o.fail) throw TransportFailure{"connection reset", false};
    return {o.status, o.body};
  }
};

RemoteSettings keyed_settings() {
  RemoteSettings s;
  s.openai_api_key = "sk-test";
  s.anthropic_api_key = "ant-test";
  s.google_api_key = "g-test";
  s.backoff_base = std::chrono::milliseconds(500);
  return s;
}

const std::string kOpenAiOk =
    R"({"choices":[{"message":{"role":"assistant","content":"Four."}}],"usage":{"prompt_tokens":5,"completion_tokens":2}})";

}  // namespace

// Expected digests were computed independently with Python:
// hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(',', ':'),
// ensure_ascii=False).encode()).hexdigest()
TEST(FixtureKey, MatchesCanonicalJsonDigest) {
  EXPECT_EQ(fixture_key_material(simple_request()),
            R"({"messages":[{"role":"user","text":"What is 2+2?"}],"system":"You are a tutor.","temperature":"0.00"})");
  EXPECT_EQ(fixture_key(simple_request()),
            "f929b902c9019dd321db314b0a2f5a688b5f4cd3a725900a1e7f25c109c1824e");
  EXPECT_EQ(fixture_key(simple_request(0.7)),
            "5c9e00c11c0d57a04f9fb44a01ffb206851c0715bcbd49da622669ea7f313376");
}

TEST(FixtureKey, EscapesAndUnicodeAreCanonical) {
  ChatRequest r;
  r.system_prompt = "Tutor: café ☕";
  r.messages = {{MessageRole::user, "hi"},
                {MessageRole::assistant, "Hello!\n\"quoted\""},
                {MessageRole::user, "ok"}};
  EXPECT_EQ(fixture_key(r), "78573a5f96d2a3e461e34f74034daeb98626e95eb6533dd8a3f302b7c2cd6259");
}

TEST(FixtureKey, IgnoresProviderAndTokenLimit) {
  auto a = simple_request();
  auto b = simple_request();
  b.provider = Provider::openai;
  b.max_output_tokens = 7;
  EXPECT_EQ(fixture_key(a), fixture_key(b));
}

TEST(Validate, RejectsMalformedRequests) {
  auto r = simple_request();
  r.messages.clear();
  EXPECT_THROW(validate(r), ValidationError);
  r = simple_request();
  r.messages.push_back({MessageRole::assistant, "Four."});
  EXPECT_THROW(validate(r), ValidationError);
  r = simple_request(2.5);
  EXPECT_THROW(validate(r), ValidationError);
  r = simple_request();
  r.max_output_tokens = 0;
  EXPECT_THROW(validate(r), ValidationError);
}

TEST(ScriptedBackend, PlaysBackRegisteredFixtureVerbatim) {
  auto fixtures = std::make_shared<FixtureStore>();
  fixtures->register_fixture(fixture_key(simple_request()), "Four.\n");
  Gateway gw;
  gw.set_backend(Provider::scripted, std::make_shared<ScriptedBackend>(fixtures));
  EXPECT_EQ(gw.complete(simple_request()).text, "Four.\n");
}

TEST(ScriptedBackend, MissNamesTheKey) {
  Gateway gw;
  gw.set_backend(Provider::scripted, std::make_shared<ScriptedBackend>(std::make_shared<FixtureStore>()));
  try {
    gw.complete(simple_request());
    FAIL() << "expected a fixture miss";
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::fixture_miss);
    EXPECT_NE(std::string(e.what()).find(fixture_key(simple_request())), std::string::npos);
  }
}

TEST(FixtureStore, FileLoadingIsAdditiveLastWriteWins) {
  TempDir dir;
  {
    std::ofstream f(dir / "a.jsonl");
    f << R"({"key":"k1","response":"one"})" << "\n\n" << R"({"key":"k2","response":"two"})" << "\n"
      << R"({"key":"k1","response":"uno"})" << "\n";
  }
  FixtureStore store;
  store.register_fixture("k0", "zero");
  EXPECT_EQ(store.load_fixture_file(dir / "a.jsonl"), 3u);
  EXPECT_EQ(store.size(), 3u);
  EXPECT_EQ(store.lookup("k1"), "uno");
  EXPECT_EQ(store.lookup("k0"), "zero");
  EXPECT_FALSE(store.lookup("nope"));

  store.save(dir / "b.jsonl");
  FixtureStore reloaded;
  reloaded.load_fixture_file(dir / "b.jsonl");
  EXPECT_EQ(reloaded.lookup("k1"), "uno");
  EXPECT_EQ(reloaded.size(), 3u);
}

TEST(FixtureStore, MalformedLineLeavesStoreUntouched) {
  TempDir dir;
  {
    std::ofstream f(dir / "bad.jsonl");
    f << R"({"key":"k1","response":"one"})" << "\n" << "{not json\n";
  }
  FixtureStore store;
  try {
    store.load_fixture_file(dir / "bad.jsonl");
    FAIL() << "expected a load error";
  } catch (const FixtureLoadError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(store.size(), 0u);
}

TEST(RemoteBackend, MissingKeyFailsBeforeAnyNetworkCall) {
  auto transport = std::make_shared<FakeTransport>();
  RemoteSettings settings;
  RemoteBackend backend(Provider::anthropic, settings, transport, [](auto) {});
  auto r = simple_request();
  r.provider = Provider::anthropic;
  try {
    backend.complete(r);
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::configuration);
    EXPECT_NE(std::string(e.what()).find("ANTHROPIC_API_KEY"), std::string::npos);
  }
  EXPECT_TRUE(transport->paths.empty());
}

TEST(RemoteBackend, RetriesTransientFailuresWithExponentialBackoff) {
  auto transport = std::make_shared<FakeTransport>();
  transport->script = {{503, "busy"}, {0, "", true}, {200, kOpenAiOk}};
  std::vector<std::chrono::milliseconds> sleeps;
  RemoteBackend backend(Provider::openai, keyed_settings(), transport,
                        [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  const auto out = backend.complete(simple_request());
  EXPECT_EQ(out.text, "Four.");
  EXPECT_EQ(RemoteBackend::last_attempts(), 3);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500),
                                                            std::chrono::milliseconds(1000)}));
  EXPECT_EQ(transport->paths[0], "/v1/chat/completions");
  EXPECT_EQ(transport->headers[0].at("Authorization"), "Bearer sk-test");
}

TEST(RemoteBackend, GivesUpAfterThreeAttempts) {
  auto transport = std::make_shared<FakeTransport>();
  transport->script = {{500, ""}, {502, ""}, {504, ""}, {200, kOpenAiOk}};
  RemoteBackend backend(Provider::openai, keyed_settings(), transport, [](auto) {});
  try {
    backend.complete(simple_request());
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::transient);
  }
  EXPECT_EQ(transport->paths.size(), 3u);
}

TEST(RemoteBackend, ClientErrorsAreNotRetried) {
  auto transport = std::make_shared<FakeTransport>();
  transport->script = {{401, R"({"error":"bad key"})"}, {200, kOpenAiOk}};
  RemoteBackend backend(Provider::openai, keyed_settings(), transport, [](auto) {});
  try {
    backend.complete(simple_request());
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::permanent);
  }
  EXPECT_EQ(transport->paths.size(), 1u);
}

TEST(RemoteBackend, MalformedSuccessIsProtocolError) {
  auto transport = std::make_shared<FakeTransport>();
  transport->script = {{200, R"({"choices":[]})"}};
  RemoteBackend backend(Provider::openai, keyed_settings(), transport, [](auto) {});
  try {
    backend.complete(simple_request());
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::protocol);
  }
}

TEST(RemoteBackend, VendorPayloadShapes) {
  auto transport = std::make_shared<FakeTransport>();
  transport->script = {{200, R"({"content":[{"type":"text","text":"Four."}],"usage":{"input_tokens":3,"output_tokens":1}})"},
                       {200, R"({"candidates":[{"content":{"parts":[{"text":"Four."}]}}]})"}};
  auto settings = keyed_settings();
  RemoteBackend anthropic(Provider::anthropic, settings, transport, [](auto) {});
  RemoteBackend google(Provider::google, settings, transport, [](auto) {});
  EXPECT_EQ(anthropic.complete(simple_request()).text, "Four.");
  EXPECT_EQ(google.complete(simple_request()).text, "Four.");

  const auto a = nlohmann::json::parse(transport->bodies[0]);
  EXPECT_EQ(a.at("system"), "You are a tutor.");
  EXPECT_EQ(transport->paths[0], "/v1/messages");
  EXPECT_EQ(transport->headers[0].at("x-api-key"), "ant-test");
  EXPECT_EQ(transport->paths[1], "/v1beta/models/gemini-1.5-flash:generateContent");
}

TEST(RemoteBackend, TalksToARealHttpServer) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body.at("messages").at(0).at("role"), "system");
    res.set_content(kOpenAiOk, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto settings = keyed_settings();
  settings.openai_base_url = "http://127.0.0.1:" + std::to_string(port);
  settings.backoff_base = std::chrono::milliseconds(1);
  Gateway gw;
  gw.set_backend(Provider::openai,
                 std::make_shared<RemoteBackend>(Provider::openai, settings,
                                                 std::make_shared<HttplibTransport>()));
  auto r = simple_request();
  r.provider = Provider::openai;
  EXPECT_EQ(gw.complete(r).text, "Four.");
  EXPECT_EQ(hits.load(), 2);
  server.stop();
  t.join();
}

TEST(RemoteBackend, UnreachableHostIsTransient) {
  auto settings = keyed_settings();
  settings.openai_base_url = "http://127.0.0.1:1";
  settings.backoff_base = std::chrono::milliseconds(1);
  RemoteBackend backend(Provider::openai, settings, std::make_shared<HttplibTransport>());
  try {
    backend.complete(simple_request());
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::transient);
  }
}
