#include "http_util.hpp"

#include <httplib.h>

#include <regex>

namespace crashrepro::http {

Reply post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                std::chrono::seconds timeout) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  Reply reply;
  if (!std::regex_match(url, m, url_re)) {
    reply.error = "malformed URL '" + url + "'";
    return reply;
  }
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  try {
    httplib::Client client(base);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      reply.timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                        res.error() == httplib::Error::ConnectionTimeout;
      reply.error = httplib::to_string(res.error());
      return reply;
    }
    reply.status = res->status;
    reply.body = res->body;
    if (res->status < 200 || res->status >= 300) {
      reply.error = "HTTP " + std::to_string(res->status);
      return reply;
    }
    reply.ok = true;
  } catch (const std::exception& e) {
    reply.error = e.what();
  }
  return reply;
}

}  // namespace crashrepro::http
