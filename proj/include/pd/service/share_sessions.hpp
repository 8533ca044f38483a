#pragma once

#include "pd/service/workspace.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace pd::service {

/// Student conversations with published bots. In memory only; a session
/// idle for longer than the expiry is forgotten and replaced transparently.
class ShareSessions {
 public:
  ShareSessions(Workspace& workspace, Clock& clock, IdSource& ids,
                std::chrono::minutes idle_expiry = std::chrono::minutes(30));

  struct Reply {
    std::string session_id;
    std::string reply;
    bool new_session = false;
  };

  /// Throws NotFoundError for an unknown token. An unknown, expired, or
  /// foreign session id starts a new session.
  Reply send(const std::string& token, const std::optional<std::string>& session_id,
             const std::string& message);

  /// Drops expired sessions; returns how many remain.
  std::size_t sweep();

 private:
  struct Session {
    std::mutex mu;
    std::string token;
    std::vector<domain::Turn> transcript;
    Timestamp last_active{};
  };

  Workspace& workspace_;
  Clock& clock_;
  IdSource& ids_;
  std::chrono::minutes idle_expiry_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace pd::service
