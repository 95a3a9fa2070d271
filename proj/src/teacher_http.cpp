#include <cstdlib>

#include "ossforge/http.hpp"
#include "ossforge/teacher.hpp"

namespace ossforge {

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const char* token = std::getenv(config_.token_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw AuthError("environment variable " + config_.token_env + " is not set");
  }
  token_ = token;
}

Json HttpChatBackend::request_body(const GenerationRequest& request, const std::string& model) {
  Json body{{"model", model},
            {"messages", Json::array({Json{{"role", "user"}, {"content", request.prompt}}})},
            {"max_tokens", request.max_new_tokens}};
  if (request.decoding.greedy) {
    body["temperature"] = 0.0;
  } else {
    body["temperature"] = request.decoding.temperature;
    body["top_p"] = request.decoding.top_p;
  }
  return body;
}

BackendReply HttpChatBackend::interpret(int http_status, const std::string& body) {
  BackendReply reply;
  reply.http_status = http_status;
  if (http_status == 401 || http_status == 403) {
    reply.status = BackendReply::Status::kAuth;
    reply.message = body.substr(0, 200);
    return reply;
  }
  if (is_retryable_status(http_status)) {
    reply.status = BackendReply::Status::kRetryable;
    reply.message = "HTTP " + std::to_string(http_status);
    return reply;
  }
  if (http_status != 200) {
    reply.status = BackendReply::Status::kPermanent;
    reply.message = "HTTP " + std::to_string(http_status) + ": " + body.substr(0, 200);
    return reply;
  }
  try {
    const Json j = Json::parse(body);
    const Json& choice = j.at("choices").at(0);
    reply.text = choice.at("message").at("content").get<std::string>();
    reply.truncated = choice.value("finish_reason", std::string("stop")) == "length";
    reply.status = BackendReply::Status::kOk;
  } catch (const std::exception& e) {
    reply.status = BackendReply::Status::kPermanent;
    reply.message = std::string("malformed completion body: ") + e.what();
  }
  return reply;
}

BackendReply HttpChatBackend::complete(const GenerationRequest& request) {
  const HttpResult res =
      http_post_json(config_.endpoint, token_, request_body(request, config_.model).dump(), config_.timeout_seconds);
  if (res.status == 0) {
    BackendReply reply;
    reply.status = BackendReply::Status::kRetryable;
    reply.message = "transport: " + res.transport_error;
    return reply;
  }
  return interpret(res.status, res.body);
}

}  // namespace ossforge
