#include "pd/service/share_sessions.hpp"

namespace pd::service {

ShareSessions::ShareSessions(Workspace& workspace, Clock& clock, IdSource& ids,
                             std::chrono::minutes idle_expiry)
    : workspace_(workspace), clock_(clock), ids_(ids), idle_expiry_(idle_expiry) {}

ShareSessions::Reply ShareSessions::send(const std::string& token,
                                         const std::optional<std::string>& session_id,
                                         const std::string& message) {
  if (message.empty()) {
    throw ValidationError("message must be non-empty");
  }
  const domain::Bot bot = workspace_.bot_by_share_token(token);
  const Timestamp now = clock_.now();

  Reply out;
  std::shared_ptr<Session> session;
  {
    std::lock_guard g(mu_);
    if (session_id) {
      auto it = sessions_.find(*session_id);
      if (it != sessions_.end() && it->second->token == token &&
          now - it->second->last_active <= idle_expiry_) {
        session = it->second;
        out.session_id = *session_id;
      } else if (it != sessions_.end() && now - it->second->last_active > idle_expiry_) {
        sessions_.erase(it);
      }
    }
    if (!session) {
      session = std::make_shared<Session>();
      session->token = token;
      out.session_id = ids_.new_id("sess");
      out.new_session = true;
      sessions_[out.session_id] = session;
    }
    session->last_active = now;
  }

  std::lock_guard turn(session->mu);
  auto transcript = session->transcript;
  transcript.push_back({domain::Role::student, message, std::nullopt});
  out.reply = workspace_.share_reply(bot, transcript);
  transcript.push_back({domain::Role::bot, out.reply, bot.current_version});
  session->transcript = std::move(transcript);
  session->last_active = clock_.now();
  return out;
}

std::size_t ShareSessions::sweep() {
  const Timestamp now = clock_.now();
  std::lock_guard g(mu_);
  std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_active > idle_expiry_; });
  return sessions_.size();
}

}  // namespace pd::service
