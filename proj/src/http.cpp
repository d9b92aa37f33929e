#include "http.hpp"

#include <httplib.h>

namespace asrh::http {
namespace {

struct Target {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Target split(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("not an absolute URL: " + url, false);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Client make_client(const std::string& origin, std::chrono::milliseconds timeout) {
  httplib::Client c(origin);
  const auto sec = static_cast<time_t>(timeout.count() / 1000);
  const auto usec = static_cast<time_t>((timeout.count() % 1000) * 1000);
  c.set_connection_timeout(sec, usec);
  c.set_read_timeout(sec, usec);
  c.set_write_timeout(sec, usec);
  c.set_follow_location(true);
  return c;
}

Response finish(const httplib::Result& r, const std::string& url) {
  if (!r) {
    const auto err = r.error();
    const bool timeout = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
    throw TransportError(url + ": " + httplib::to_string(err), timeout);
  }
  return {r->status, r->body};
}

}  // namespace

Response get(const std::string& url, const Params& params, std::chrono::milliseconds timeout) {
  const auto t = split(url);
  auto c = make_client(t.origin, timeout);
  httplib::Params p(params.begin(), params.end());
  return finish(c.Get(t.path, p, httplib::Headers{}), url);
}

Response post(const std::string& url, const std::string& body, const std::string& content_type,
              std::chrono::milliseconds timeout) {
  const auto t = split(url);
  auto c = make_client(t.origin, timeout);
  return finish(c.Post(t.path, body, content_type), url);
}

}  // namespace asrh::http
