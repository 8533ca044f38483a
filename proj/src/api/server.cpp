#include "pd/api/server.hpp"

#include "pd/domain/json.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <charconv>

namespace pd::api {

using nlohmann::json;
using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message,
                const json& details) {
  json body{{"error", {{"code", to_string(code)}, {"message", message}}}};
  body["error"]["details"] = details.is_null() ? json::object() : details;
  send_json(res, http_status(code), body);
}

// Every handler runs inside this wrapper so no exception reaches httplib.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::internal) spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_error(res, e.code(), e.what(), e.details());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::validation, std::string("malformed request body: ") + e.what(), {});
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_error(res, ErrorCode::internal, e.what(), {});
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

std::string required_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string()) {
    throw ValidationError(fmt::format("field '{}' must be a string", field));
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(fmt::format("field '{}' must be a string", field));
  return it->get<std::string>();
}

const char* phase_of(domain::RunStatus s, const domain::PipelineRun& run) {
  using domain::RunStatus;
  switch (s) {
    case RunStatus::running:
      if (!run.inferred_intent) return "analyzing_intent";
      if (!run.proposed_version) return "rewriting_prompt";
      return "verifying_regressions";
    case RunStatus::awaiting_teacher: return "awaiting_teacher";
    case RunStatus::applied: return "applied";
    case RunStatus::discarded: return "discarded";
    case RunStatus::errored: return "errored";
  }
  return "unknown";
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::state:
    case ErrorCode::busy:
    case ErrorCode::gate_blocked: return 409;
    case ErrorCode::provider: return 502;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

BindAddress BindAddress::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw ValidationError(fmt::format("bind address '{}' is not host:port", text));
  }
  BindAddress a;
  a.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), a.port);
  if (ec != std::errc{} || ptr != port.data() + port.size() || a.port < 0 || a.port > 65535) {
    throw ValidationError(fmt::format("bind address '{}' has an invalid port", text));
  }
  return a;
}

Server::Server(service::Workspace& workspace, service::ShareSessions& shares)
    : workspace_(workspace), shares_(shares), http_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Server::~Server() { stop(); }

int Server::bind(const BindAddress& address) {
  int port = address.port;
  bool ok;
  if (port == 0) {
    port = http_->bind_to_any_port(address.host);
    ok = port > 0;
  } else {
    ok = http_->bind_to_port(address.host, port);
  }
  if (!ok) {
    throw InternalError(fmt::format("cannot bind {}:{}", address.host, address.port));
  }
  return port;
}

void Server::listen() { http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

bool Server::running() const { return http_->is_running(); }

void Server::install_routes() {
  auto& ws = workspace_;
  auto& http = *http_;

  http.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  }));

  // Bots.
  http.Post("/bots", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    std::vector<service::MaterialUpload> materials;
    if (auto it = body.find("materials"); it != body.end()) {
      for (const auto& m : *it) {
        materials.push_back({required_string(m, "filename"), required_string(m, "content")});
      }
    }
    auto bot = ws.create_bot(required_string(body, "title"),
                             optional_string(body, "description").value_or(""),
                             optional_string(body, "model_choice").value_or("openai"), materials);
    send_json(res, 201, bot);
  }));
  http.Get("/bots", guarded([&ws](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, ws.list_bots());
  }));
  http.Get(R"(/bots/([^/]+))", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto bot = ws.get_bot(req.matches[1]);
    json j = bot;
    j["current_prompt"] = ws.get_version(bot.current_version).full_text;
    send_json(res, 200, j);
  }));
  http.Post(R"(/bots/([^/]+)/materials)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              domain::Bot bot;
              if (req.is_multipart_form_data()) {
                if (req.files.empty()) throw ValidationError("no file in upload");
                for (const auto& [field, file] : req.files) {
                  bot = ws.add_material(req.matches[1], {file.filename, file.content});
                }
              } else {
                const json body = body_of(req);
                bot = ws.add_material(req.matches[1], {required_string(body, "filename"),
                                                       required_string(body, "content")});
              }
              send_json(res, 201, bot);
            }));
  http.Post(R"(/bots/([^/]+)/prompt)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              const json body = body_of(req);
              if (auto name = optional_string(body, "template")) {
                send_json(res, 201, ws.apply_template(req.matches[1], *name));
              } else {
                send_json(res, 201, ws.edit_prompt(req.matches[1], required_string(body, "text")));
              }
            }));
  http.Get(R"(/bots/([^/]+)/versions)",
           guarded([&ws](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, ws.version_chain(req.matches[1]));
           }));
  http.Get(R"(/bots/([^/]+)/test-cases)",
           guarded([&ws](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, ws.list_test_cases(req.matches[1]));
           }));
  http.Get(R"(/bots/([^/]+)/runs)",
           guarded([&ws](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, ws.list_runs(req.matches[1]));
           }));
  http.Get(R"(/bots/([^/]+)/gate)",
           guarded([&ws](const httplib::Request& req, httplib::Response& res) {
             const auto g = ws.gate(req.matches[1]);
             send_json(res, 200,
                       {{"allowed", g.allowed},
                        {"reasons", g.reasons},
                        {"offending_case_ids", g.offending_case_ids}});
           }));
  http.Post(R"(/bots/([^/]+)/publish)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              const std::string path = ws.publish(req.matches[1]);
              send_json(res, 200, {{"share_url", path}, {"bot", ws.get_bot(req.matches[1])}});
            }));
  http.Get("/templates", guarded([&ws](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, ws.template_names());
  }));

  // Profiles.
  http.Get("/profiles", guarded([&ws](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, ws.profiles());
  }));
  http.Post("/profiles", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    domain::StudentProfile p;
    p.name = required_string(body, "name");
    p.description = optional_string(body, "description").value_or("");
    p.opening_message = required_string(body, "opening_message");
    if (auto it = body.find("followups"); it != body.end()) {
      p.scripted_followups = it->get<std::vector<std::string>>();
    }
    send_json(res, 201, ws.add_profile(std::move(p)));
  }));

  // Test cases.
  http.Post(R"(/bots/([^/]+)/test-cases)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              const json body = body_of(req);
              auto started = ws.start_test_case(req.matches[1], required_string(body, "profile_id"));
              if (started.error) {
                send_error(res, ErrorCode::provider, *started.error,
                           {{"test_case", started.test_case}});
                return;
              }
              send_json(res, 201, started.test_case);
            }));
  http.Get(R"(/test-cases/([^/]+))",
           guarded([&ws](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, ws.get_test_case(req.matches[1]));
           }));
  http.Post(R"(/test-cases/([^/]+)/turns)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              const json body = body_of(req);
              send_json(res, 200, ws.advance_test_case(req.matches[1], optional_string(body, "message")));
            }));
  http.Post(R"(/test-cases/([^/]+)/mark-pass)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 200, ws.mark_pass(req.matches[1]));
            }));
  http.Post(R"(/test-cases/([^/]+)/abandon)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 200, ws.abandon_test_case(req.matches[1]));
            }));
  http.Post(R"(/test-cases/([^/]+)/refresh)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 200, ws.refresh_test_case(req.matches[1]));
            }));
  http.Post(R"(/test-cases/([^/]+)/corrections)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              const json body = body_of(req);
              auto idx = body.find("turn_index");
              if (idx == body.end() || !idx->is_number_unsigned()) {
                throw ValidationError("field 'turn_index' must be a non-negative integer");
              }
              auto sub = ws.submit_correction(req.matches[1], idx->get<std::size_t>(),
                                              required_string(body, "corrected_text"));
              send_json(res, 202, {{"correction", sub.correction}, {"run_id", sub.run_id}});
            }));

  // Pipeline runs.
  http.Get(R"(/runs/([^/]+))", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto run = ws.get_run(req.matches[1]);
    json j = run;
    j["phase"] = phase_of(run.status, run);
    if (run.proposed_version && run.status == domain::RunStatus::awaiting_teacher) {
      const auto v = ws.get_version(*run.proposed_version);
      j["proposed_prompt"] = v.full_text;
      j["diff"] = v.diff_from_parent;
    }
    send_json(res, 200, j);
  }));
  http.Post(R"(/runs/([^/]+)/decision)",
            guarded([&ws](const httplib::Request& req, httplib::Response& res) {
              const json body = body_of(req);
              const std::string d = required_string(body, "decision");
              service::Decision decision;
              if (d == "apply") decision = service::Decision::apply;
              else if (d == "discard") decision = service::Decision::discard;
              else throw ValidationError("decision must be 'apply' or 'discard'");
              auto out = ws.decide(req.matches[1], decision);
              send_json(res, 200,
                        {{"bot", out.bot},
                         {"run", out.run},
                         {"test_cases", out.cases},
                         {"refresh_errors", out.refresh_errors}});
            }));

  // Published bots.
  http.Get(R"(/share/([^/]+))", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto bot = ws.bot_by_share_token(req.matches[1]);
    send_json(res, 200, {{"title", bot.title}, {"description", bot.description}});
  }));
  http.Post(R"(/share/([^/]+)/messages)",
            guarded([this](const httplib::Request& req, httplib::Response& res) {
              const json body = body_of(req);
              auto reply = shares_.send(req.matches[1], optional_string(body, "session_id"),
                                        required_string(body, "message"));
              send_json(res, 200,
                        {{"session_id", reply.session_id},
                         {"reply", reply.reply},
                         {"new_session", reply.new_session}});
            }));
}

}  // namespace pd::api
