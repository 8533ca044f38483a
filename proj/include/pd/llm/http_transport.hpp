#pragma once

#include <chrono>
#include <map>
#include <string>

namespace pd::llm {

struct HttpResult {
  int status = 0;
  std::string body;
};

/// Raised for failures below HTTP (connect refused, reset, read timeout).
struct TransportFailure {
  std::string message;
  bool timed_out = false;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// POST `body` as application/json. Throws TransportFailure.
  virtual HttpResult post_json(const std::string& base_url, const std::string& path,
                               const std::map<std::string, std::string>& headers,
                               const std::string& body, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib client; https when built with OpenSSL.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResult post_json(const std::string& base_url, const std::string& path,
                       const std::map<std::string, std::string>& headers, const std::string& body,
                       std::chrono::milliseconds timeout) override;
};

}  // namespace pd::llm
