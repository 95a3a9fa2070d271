#include "ossforge/http.hpp"

#include "httplib.h"

#include "ossforge/util.hpp"

namespace ossforge {

HttpResult http_post_json(const std::string& url, const std::string& bearer_token, const std::string& body,
                          int timeout_seconds) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FatalError("endpoint must include a scheme: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_begin);
  const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

  HttpResult out;
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace ossforge
