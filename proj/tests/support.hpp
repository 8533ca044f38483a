#pragma once

#include "pd/demo/seed.hpp"
#include "pd/llm/fixtures.hpp"
#include "pd/llm/gateway.hpp"
#include "pd/pipeline/templates.hpp"
#include "pd/scenario/profiles.hpp"
#include "pd/service/workspace.hpp"
#include "pd/store/store.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>

namespace pd::testing {

namespace fs = std::filesystem;

inline fs::path asset_root() { return PD_TEST_ASSET_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("pd-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline Timestamp epoch_2026() {
  return Timestamp(std::chrono::milliseconds(1'767'225'600'000));  // 2026-01-01T00:00:00Z
}

/// Backend answering with a function; counts calls.
class FunctionBackend final : public llm::ChatBackend {
 public:
  using Fn = std::function<std::string(const llm::ChatRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  llm::ChatResponse complete(const llm::ChatRequest& request) override {
    ++calls;
    return {fn_(request), 0, std::nullopt};
  }
  std::atomic<int> calls{0};

 private:
  Fn fn_;
};

/// A workspace on a temporary store, deterministic clock and ids, and the
/// scripted provider. By default the scripted backend is the demo responder;
/// `use_fixtures()` switches to plain fixture playback.
struct Harness {
  TempDir dir;
  SteppingClock clock{epoch_2026()};
  SequentialIdSource ids;
  pipeline::Templates templates = pipeline::Templates::load(asset_root());
  std::vector<domain::StudentProfile> profiles = scenario::builtin_profiles(asset_root());
  std::shared_ptr<llm::FixtureStore> fixtures = std::make_shared<llm::FixtureStore>();
  llm::Gateway gateway;
  std::unique_ptr<store::Store> store;
  std::unique_ptr<service::Workspace> ws;

  explicit Harness(service::WorkspaceConfig config = default_config()) {
    respond_with([this](const llm::ChatRequest& r) { return demo::demo_responder(templates, r); });
    store = store::Store::open(dir / "store.pdlog", clock);
    ws = std::make_unique<service::Workspace>(*store, gateway, templates, profiles, clock, ids,
                                              std::move(config));
  }

  static service::WorkspaceConfig default_config() {
    service::WorkspaceConfig c;
    c.provider_override = llm::Provider::scripted;
    c.regression_parallelism = 2;
    return c;
  }

  void respond_with(FunctionBackend::Fn fn) {
    backend = std::make_shared<FunctionBackend>(std::move(fn));
    gateway.set_backend(llm::Provider::scripted, backend);
  }
  void use_fixtures() {
    gateway.set_backend(llm::Provider::scripted, std::make_shared<llm::ScriptedBackend>(fixtures));
  }

  domain::Bot demo_bot() {
    return ws->create_bot("Stats Tutor", "a Socratic tutor for introductory statistics", "openai");
  }

  std::shared_ptr<FunctionBackend> backend;
};

}  // namespace pd::testing
