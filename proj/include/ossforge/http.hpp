#pragma once

#include <string>

namespace ossforge {

struct HttpResult {
  int status = 0;          // 0 when no response arrived
  std::string body;
  std::string transport_error;  // set when status == 0
};

/// POSTs a JSON body with bearer auth. `url` is scheme://host[:port]/path.
HttpResult http_post_json(const std::string& url, const std::string& bearer_token, const std::string& body,
                          int timeout_seconds);

/// 408, 429 and 5xx are worth retrying.
inline bool is_retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace ossforge
