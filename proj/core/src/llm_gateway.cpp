#include "crashrepro/llm_gateway.hpp"

#include <cstdlib>

#include "crashrepro/text.hpp"
#include "prompt_templates.hpp"

namespace crashrepro::llm {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

struct Attempt {
  std::optional<std::vector<ActionCommand>> commands;
  std::string error;
};

Attempt interpret(const std::string& raw) {
  const auto payload = filter_json_payload(raw);
  if (!payload) return {std::nullopt, "no JSON action array in response"};
  try {
    return {parse_action_sequence(*payload), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace

void LlmConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorKind::ConfigError, "LLM endpoint is not configured");
  if (!(request_timeout > 0)) throw Error(ErrorKind::ConfigError, "request timeout must be positive");
  if (max_retries < 0) throw Error(ErrorKind::ConfigError, "max_retries must be >= 0");
  if (temperature < 0) throw Error(ErrorKind::ConfigError, "temperature must be >= 0");
}

LlmConfig LlmConfig::from_env() {
  LlmConfig c;
  auto endpoint = env(kEnvEndpoint);
  if (!endpoint)
    throw Error(ErrorKind::ConfigError, std::string(kEnvEndpoint) + " is not set (required in live mode)");
  c.endpoint = *endpoint;
  if (auto m = env(kEnvModel)) c.model_name = *m;
  if (auto k = env(kEnvApiKey)) c.api_key = *k;
  try {
    if (auto t = env(kEnvTimeout)) c.request_timeout = std::stod(*t);
    if (auto r = env(kEnvMaxRetries)) c.max_retries = std::stoi(*r);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, "malformed numeric LLM environment setting");
  }
  c.validate();
  return c;
}

ActionRequest request_actions(LlmGateway& gateway, const std::string& prompt, Clock& clock,
                              std::optional<double> deadline) {
  ActionRequest out;
  std::string current = prompt;
  for (int round = 0; round < 2; ++round) {
    if (deadline && clock.now() >= *deadline)
      throw Error(ErrorKind::BudgetExceeded, "time budget exhausted before model call");
    LlmExchange ex;
    ex.prompt = current;
    ex.prompt_fingerprint = text::fingerprint(current);
    const double start = clock.now();
    try {
      ex.raw_response = gateway.complete(current);
    } catch (const Error& e) {
      ex.latency = clock.now() - start;
      ex.error = std::string(to_string(e.kind())) + ": " + e.what();
      out.exchanges.push_back(std::move(ex));
      return out;
    }
    ex.latency = clock.now() - start;
    auto attempt = interpret(ex.raw_response);
    ex.parsed = attempt.commands;
    ex.error = attempt.error;
    out.exchanges.push_back(ex);
    if (attempt.commands) {
      out.commands = std::move(attempt.commands);
      return out;
    }
    current = prompt + templates::kRepairSuffix;
  }
  return out;
}

std::string request_text(LlmGateway& gateway, const std::string& prompt, Clock& clock,
                         std::vector<LlmExchange>& log) {
  LlmExchange ex;
  ex.prompt = prompt;
  ex.prompt_fingerprint = text::fingerprint(prompt);
  const double start = clock.now();
  try {
    ex.raw_response = gateway.complete(prompt);
  } catch (const Error& e) {
    ex.latency = clock.now() - start;
    ex.error = std::string(to_string(e.kind())) + ": " + e.what();
    log.push_back(std::move(ex));
    throw;
  }
  ex.latency = clock.now() - start;
  log.push_back(ex);
  return ex.raw_response;
}

nlohmann::json to_json(const LlmExchange& ex, bool include_prompt) {
  nlohmann::json j;
  j["prompt_fingerprint"] = ex.prompt_fingerprint;
  if (include_prompt) j["prompt"] = ex.prompt;
  j["raw_response"] = ex.raw_response;
  if (ex.parsed) {
    nlohmann::json cmds = nlohmann::json::array();
    for (const auto& c : *ex.parsed) cmds.push_back(crashrepro::to_json(c));
    j["parsed"] = std::move(cmds);
  } else {
    j["parsed"] = nullptr;
  }
  j["latency"] = ex.latency;
  if (!ex.error.empty()) j["error"] = ex.error;
  return j;
}

}  // namespace crashrepro::llm
