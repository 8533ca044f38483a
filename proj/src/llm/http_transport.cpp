#include "pd/llm/http_transport.hpp"

#include <httplib.h>

namespace pd::llm {

HttpResult HttplibTransport::post_json(const std::string& base_url, const std::string& path,
                                       const std::map<std::string, std::string>& headers,
                                       const std::string& body, std::chrono::milliseconds timeout) {
  httplib::Client client(base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers h;
  for (const auto& [k, v] : headers) {
    h.emplace(k, v);
  }
  auto res = client.Post(path, h, body, "application/json");
  if (!res) {
    const auto err = res.error();
    throw TransportFailure{httplib::to_string(err),
                           err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read};
  }
  return HttpResult{res->status, res->body};
}

}  // namespace pd::llm
