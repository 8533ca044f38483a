#include "cli.hpp"

#include "pd/api/server.hpp"
#include "pd/common/clock.hpp"
#include "pd/demo/seed.hpp"
#include "pd/llm/fixtures.hpp"
#include "pd/llm/gateway.hpp"
#include "pd/scenario/profiles.hpp"
#include "pd/service/share_sessions.hpp"
#include "pd/service/task_runner.hpp"
#include "pd/service/workspace.hpp"
#include "pd/store/store.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <thread>

namespace pd::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string data_dir;
  std::string bind;
  std::string fixtures;
  std::string judge_mode;
  std::string provider;
  std::string asset_dir;
  std::string bot_id;
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

// Flag > environment > default, applied to whatever the flags left empty.
void resolve(Options& o) {
  if (o.data_dir.empty()) o.data_dir = env_or("PD_DATA_DIR", "./data");
  if (o.bind.empty()) o.bind = env_or("PD_BIND_ADDR", "127.0.0.1:8080");
  if (o.fixtures.empty()) o.fixtures = env_or("PD_FIXTURES", (fs::path(o.data_dir) / "fixtures.jsonl").string());
  if (o.judge_mode.empty()) o.judge_mode = env_or("PD_JUDGE_MODE", "llm");
  if (o.provider.empty()) {
    // Without explicit configuration an existing fixture file means an
    // offline setup (e.g. after `pd seed`).
    o.provider = env_or("PD_PROVIDER_DEFAULT", fs::exists(o.fixtures) ? "scripted" : "bot");
  }
  if (o.asset_dir.empty()) o.asset_dir = pipeline::default_asset_root().string();
}

std::optional<llm::Provider> provider_override(const Options& o) {
  if (o.provider == "bot") return std::nullopt;
  return llm::parse_provider(o.provider);
}

/// Everything a command needs to drive a Workspace.
struct Environment {
  SystemClock clock;
  RandomIdSource ids;
  std::unique_ptr<store::Store> store;
  std::shared_ptr<llm::FixtureStore> fixtures = std::make_shared<llm::FixtureStore>();
  llm::Gateway gateway;
  std::unique_ptr<service::Workspace> workspace;

  Environment(const Options& o, service::WorkspaceConfig cfg = {}) {
    fs::create_directories(o.data_dir);
    store = store::Store::open(fs::path(o.data_dir) / store::kLogFileName, clock);
    if (fs::exists(o.fixtures)) fixtures->load_fixture_file(o.fixtures);
    gateway = llm::Gateway::standard(fixtures, llm::RemoteSettings::from_env());
    const fs::path assets = o.asset_dir;
    cfg.judge_mode = scenario::parse_judge_mode(o.judge_mode);
    cfg.provider_override = provider_override(o);
    workspace = std::make_unique<service::Workspace>(*store, gateway, pipeline::Templates::load(assets),
                                                     scenario::builtin_profiles(assets), clock, ids,
                                                     std::move(cfg));
  }
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int cmd_regress(const Options& o, std::ostream& out, std::ostream& err) {
  Environment env(o);
  try {
    env.workspace->get_bot(o.bot_id);
  } catch (const NotFoundError& e) {
    err << e.what() << "\n";
    return kExitUnknownBot;
  }
  const auto outcome = env.workspace->regress(o.bot_id);
  bool all_pass = true;
  for (const auto& v : outcome.report.evaluated_cases) {
    out << v.test_case_id << '\t' << domain::to_string(v.verdict) << '\t' << one_line(v.rationale) << '\n';
    all_pass = all_pass && v.verdict == domain::Verdict::pass;
  }
  return all_pass ? kExitOk : kExitRegression;
}

int cmd_seed(const Options& o, std::ostream& out) {
  fs::create_directories(o.data_dir);
  SystemClock clock;
  auto store = store::Store::open(fs::path(o.data_dir) / store::kLogFileName, clock);
  const auto result = demo::seed(*store, o.asset_dir, o.fixtures, clock);
  out << (result.created ? "created" : "kept existing") << " demo bot " << demo::kBotId << "\n"
      << "wrote " << result.fixtures << " fixtures to " << result.fixture_file.string() << "\n";
  return kExitOk;
}

int cmd_compact(const Options& o, std::ostream& out) {
  SystemClock clock;
  const fs::path file = fs::path(o.data_dir) / store::kLogFileName;
  if (!fs::exists(file)) {
    out << "nothing to compact at " << file.string() << "\n";
    return kExitOk;
  }
  auto store = store::Store::open(file, clock);
  const auto before = fs::file_size(file);
  store->compact();
  out << fmt::format("compacted {}: {} -> {} bytes\n", file.string(), before, fs::file_size(file));
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  // Block the shutdown signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::TaskRunner runner(2);
  service::WorkspaceConfig cfg;
  cfg.schedule = [&runner](std::function<void()> task) { runner.post(std::move(task)); };
  Environment env(o, std::move(cfg));
  if (const auto n = env.workspace->recover_interrupted_runs(); n > 0) {
    spdlog::warn("marked {} interrupted pipeline run(s) as errored", n);
  }
  if (env.store->degraded()) {
    spdlog::warn("store is read-only until `pd compact` runs; see {}", env.store->file().string());
  }
  service::ShareSessions shares(*env.workspace, env.clock, env.ids);
  api::Server server(*env.workspace, shares);
  const auto address = api::BindAddress::parse(o.bind);
  const int port = server.bind(address);
  out << fmt::format("listening on {}:{}", address.host, port) << std::endl;

  std::thread http([&server] { server.listen(); });
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("received signal {}, shutting down", sig);
  server.stop();
  http.join();
  runner.shutdown(std::chrono::seconds(10));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Authoring service for AI tutor chatbots", "pd"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--data-dir", o.data_dir, "Store directory [env PD_DATA_DIR, default ./data]");
  app.add_option("--fixtures", o.fixtures,
                 "Scripted-provider fixture file [env PD_FIXTURES, default <data-dir>/fixtures.jsonl]");
  app.add_option("--judge-mode", o.judge_mode, "exact or llm [env PD_JUDGE_MODE, default llm]");
  app.add_option("--provider", o.provider,
                 "openai, anthropic, google, scripted, or bot (each bot's own choice) "
                 "[env PD_PROVIDER_DEFAULT]");
  app.add_option("--asset-dir", o.asset_dir, "Directory holding templates/ and profiles/ [env PD_ASSET_DIR]");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--bind", o.bind, "host:port [env PD_BIND_ADDR, default 127.0.0.1:8080]");
  app.add_subcommand("seed", "Create the demo bot and its fixtures");
  auto* regress = app.add_subcommand("regress", "Replay a bot's passed test cases");
  regress->add_option("bot_id", o.bot_id, "Bot to check")->required();
  app.add_subcommand("compact", "Rewrite the store log, dropping quarantined data");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    resolve(o);
    if (*serve) return cmd_serve(o, out);
    if (app.got_subcommand("seed")) return cmd_seed(o, out);
    if (*regress) return cmd_regress(o, out, err);
    return cmd_compact(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace pd::cli
