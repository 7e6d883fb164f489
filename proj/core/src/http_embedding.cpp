#include <nlohmann/json.hpp>

#include "crashrepro/embedding.hpp"
#include "crashrepro/error.hpp"
#include "http_util.hpp"

namespace crashrepro::rag {

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorKind::ConfigError, "embedding endpoint is empty");
}

std::string HttpEmbeddingProvider::id() const {
  return "http:" + config_.model + ":" + std::to_string(config_.dimension);
}

Vector HttpEmbeddingProvider::raw_embedding(std::string_view input) {
  const nlohmann::json body = {{"model", config_.model}, {"input", std::string(input)}};
  const auto reply = http::post_json(config_.endpoint, body.dump(), config_.api_key, config_.timeout);
  if (!reply.ok)
    throw Error(ErrorKind::ProviderUnavailable, "embedding request failed: " + reply.error);
  try {
    const auto j = nlohmann::json::parse(reply.body);
    const auto& arr = j.contains("data") ? j.at("data").at(0).at("embedding") : j.at("embedding");
    return arr.get<Vector>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ProviderUnavailable, std::string("unexpected embedding response: ") + e.what());
  }
}

}  // namespace crashrepro::rag
