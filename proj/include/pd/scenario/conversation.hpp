#pragma once

#include "pd/domain/types.hpp"
#include "pd/llm/gateway.hpp"

#include <span>
#include <string>
#include <vector>

namespace pd::scenario {

/// student -> user, bot -> assistant.
std::vector<llm::ChatMessage> to_messages(std::span<const domain::Turn> turns);

/// One bot reply to a transcript that ends with a student turn.
std::string bot_reply(const llm::Gateway& gateway, llm::Provider provider,
                      const std::string& system_prompt, std::span<const domain::Turn> transcript,
                      double temperature);

/// Re-generates every bot turn of `transcript` under `system_prompt`, keeping
/// the student turns. A trailing student turn gets a fresh reply too. Bot
/// turns are tagged with `version_id`. Gateway errors propagate.
std::vector<domain::Turn> replay(const llm::Gateway& gateway, llm::Provider provider,
                                 const std::string& system_prompt, const std::string& version_id,
                                 std::span<const domain::Turn> transcript, double temperature);

}  // namespace pd::scenario
