#pragma once

#include "pd/service/share_sessions.hpp"
#include "pd/service/workspace.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace pd::api {

/// host:port, e.g. "127.0.0.1:8080". Throws ValidationError when malformed.
struct BindAddress {
  std::string host;
  int port = 0;
  static BindAddress parse(const std::string& text);
};

/// JSON-over-HTTP front end. Handlers translate requests into Workspace calls
/// and pd::Error into {"error": {code, message, details}}.
class Server {
 public:
  Server(service::Workspace& workspace, service::ShareSessions& shares);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Throws
  /// InternalError when the address cannot be bound.
  int bind(const BindAddress& address);
  /// Serves until stop() is called. Requires a successful bind().
  void listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  service::Workspace& workspace_;
  service::ShareSessions& shares_;
  std::unique_ptr<httplib::Server> http_;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

}  // namespace pd::api
