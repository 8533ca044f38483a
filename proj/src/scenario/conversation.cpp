#include "pd/scenario/conversation.hpp"

namespace pd::scenario {

std::vector<llm::ChatMessage> to_messages(std::span<const domain::Turn> turns) {
  std::vector<llm::ChatMessage> out;
  out.reserve(turns.size());
  for (const auto& t : turns) {
    out.push_back({t.role == domain::Role::student ? llm::MessageRole::user
                                                   : llm::MessageRole::assistant,
                   t.text});
  }
  return out;
}

std::string bot_reply(const llm::Gateway& gateway, llm::Provider provider,
                      const std::string& system_prompt, std::span<const domain::Turn> transcript,
                      double temperature) {
  llm::ChatRequest req;
  req.system_prompt = system_prompt;
  req.messages = to_messages(transcript);
  req.temperature = temperature;
  req.provider = provider;
  return gateway.complete(req).text;
}

std::vector<domain::Turn> replay(const llm::Gateway& gateway, llm::Provider provider,
                                 const std::string& system_prompt, const std::string& version_id,
                                 std::span<const domain::Turn> transcript, double temperature) {
  std::vector<domain::Turn> out;
  out.reserve(transcript.size() + 1);
  for (const auto& turn : transcript) {
    if (turn.role != domain::Role::student) {
      continue;
    }
    out.push_back(turn);
    domain::Turn reply;
    reply.role = domain::Role::bot;
    reply.text = bot_reply(gateway, provider, system_prompt, out, temperature);
    reply.produced_by_version = version_id;
    out.push_back(std::move(reply));
  }
  return out;
}

}  // namespace pd::scenario
