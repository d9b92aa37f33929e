#pragma once

// Thin synchronous HTTP client over cpp-httplib, shared by the platform
// source and the HTTP engine adapter.

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>

namespace asrh::http {

struct Response {
  int status = 0;
  std::string body;
};

/// Transport-level failure: no HTTP status was received.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, bool timeout) : std::runtime_error(what), timeout_(timeout) {}
  bool timeout() const noexcept { return timeout_; }

 private:
  bool timeout_;
};

using Params = std::multimap<std::string, std::string>;

/// `url` is "scheme://host[:port][/base/path]"; `params` become the query.
Response get(const std::string& url, const Params& params, std::chrono::milliseconds timeout);

Response post(const std::string& url, const std::string& body, const std::string& content_type,
              std::chrono::milliseconds timeout);

}  // namespace asrh::http
