#include <cmath>

#include "crashrepro/llm_gateway.hpp"
#include "http_util.hpp"

namespace crashrepro::llm {

HttpGateway::HttpGateway(LlmConfig config) : config_(std::move(config)) { config_.validate(); }

std::string HttpGateway::complete(const std::string& prompt) {
  if (prompt.empty()) throw Error(ErrorKind::ConfigError, "prompt is empty");
  const nlohmann::json body = {
      {"model", config_.model_name},
      {"temperature", config_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  const auto timeout =
      std::chrono::seconds(static_cast<long>(std::ceil(config_.request_timeout)));
  const std::string payload = body.dump();

  last_attempts_ = 0;
  http::Reply reply;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    ++last_attempts_;
    reply = http::post_json(config_.endpoint, payload, config_.api_key, timeout);
    if (reply.ok) break;
    // Client errors will not improve on retry.
    if (reply.status >= 400 && reply.status < 500) break;
  }
  if (!reply.ok) {
    throw Error(reply.timed_out ? ErrorKind::Timeout : ErrorKind::TransportError,
                "LLM request failed after " + std::to_string(last_attempts_) +
                    " attempt(s): " + reply.error);
  }
  try {
    const auto j = nlohmann::json::parse(reply.body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::TransportError, std::string("unexpected LLM response: ") + e.what());
  }
}

}  // namespace crashrepro::llm
