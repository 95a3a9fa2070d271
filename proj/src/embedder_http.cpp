#include <cstdlib>

#include "ossforge/analyze.hpp"
#include "ossforge/http.hpp"

namespace ossforge {

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
  const char* token = std::getenv(config_.token_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw FatalError("environment variable " + config_.token_env + " is not set");
  }
  token_ = token;
  if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<SparseVector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += config_.batch_size) {
    const std::size_t end = std::min(texts.size(), begin + config_.batch_size);
    Json body{{"model", config_.model},
              {"input", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                 texts.begin() + static_cast<std::ptrdiff_t>(end))}};
    if (!config_.instruction.empty()) body["instruction"] = config_.instruction;
    const HttpResult res = http_post_json(config_.endpoint, token_, body.dump(), config_.timeout_seconds);
    if (res.status != 200) {
      throw FatalError("embedding request failed: " +
                       (res.status == 0 ? res.transport_error : "HTTP " + std::to_string(res.status)));
    }
    Json reply;
    try {
      reply = Json::parse(res.body);
    } catch (const Json::parse_error& e) {
      throw FatalError(std::string("embedding response is not JSON: ") + e.what());
    }
    const Json& data = reply.at("data");
    if (data.size() != end - begin) throw FatalError("embedding response size mismatch");
    std::vector<SparseVector> batch(end - begin);
    std::vector<bool> filled(end - begin, false);
    for (std::size_t k = 0; k < data.size(); ++k) {
      const Json& item = data[k];
      // Servers may return items out of order; "index" is authoritative when present.
      const std::size_t slot = item.contains("index") ? item["index"].get<std::size_t>() : k;
      if (slot >= batch.size() || filled[slot]) throw FatalError("embedding response has a bad index");
      filled[slot] = true;
      SparseVector v;
      const auto dense = item.at("embedding").get<std::vector<double>>();
      for (std::size_t i = 0; i < dense.size(); ++i) {
        if (dense[i] == 0.0) continue;
        v.index.push_back(static_cast<std::uint32_t>(i));
        v.value.push_back(dense[i]);
      }
      batch[slot] = l2_normalized(std::move(v));
    }
    for (auto& v : batch) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace ossforge
