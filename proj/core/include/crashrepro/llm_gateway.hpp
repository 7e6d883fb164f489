#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crashrepro/action_command.hpp"
#include "crashrepro/clock.hpp"

namespace crashrepro::llm {

/// Environment variables read by LlmConfig::from_env().
inline constexpr const char* kEnvEndpoint = "CRASHREPRO_LLM_ENDPOINT";
inline constexpr const char* kEnvModel = "CRASHREPRO_LLM_MODEL";
inline constexpr const char* kEnvApiKey = "CRASHREPRO_LLM_API_KEY";
inline constexpr const char* kEnvTimeout = "CRASHREPRO_LLM_TIMEOUT";
inline constexpr const char* kEnvMaxRetries = "CRASHREPRO_LLM_MAX_RETRIES";

struct LlmConfig {
  std::string endpoint;  // OpenAI-compatible chat-completions URL
  std::string model_name = "deepseek-chat";
  std::string api_key;
  double request_timeout = 60.0;  // seconds, > 0
  int max_retries = 2;            // >= 0
  double temperature = 0.0;       // >= 0

  /// Throws ConfigError when the endpoint variable is unset or a value is
  /// out of range.
  static LlmConfig from_env();
  void validate() const;
};

class LlmGateway {
 public:
  virtual ~LlmGateway() = default;
  /// Raw model text for `prompt`. Throws Timeout, TransportError or (mock)
  /// ExhaustedScript.
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Chat-completions client over HTTP with bounded retries.
class HttpGateway final : public LlmGateway {
 public:
  explicit HttpGateway(LlmConfig config);
  std::string complete(const std::string& prompt) override;
  /// Attempts made by the last complete() call.
  int last_attempts() const noexcept { return last_attempts_; }

 private:
  LlmConfig config_;
  int last_attempts_ = 0;
};

/// One scripted reply. Plain entries answer any prompt once, in order;
/// conditional entries answer only prompts containing every `contains`
/// substring (or with the given fingerprint); `repeat` entries are never
/// consumed.
struct MockEntry {
  std::string response;
  std::vector<std::string> contains;
  std::optional<std::string> fingerprint;
  bool repeat = false;
  enum class Failure { None, Transport, Timeout } failure = Failure::None;
};

struct MockOptions {
  /// Charged to `clock` per call so virtual-time runs account model latency.
  double simulated_latency = 0.5;
  std::shared_ptr<Clock> clock;
  /// Real sleep per call; lets wall-clock tests stall realistically.
  std::chrono::milliseconds real_delay{0};
};

/// Deterministic scripted gateway. The first matching unconsumed entry wins;
/// when nothing matches, throws ExhaustedScript.
class MockGateway final : public LlmGateway {
 public:
  explicit MockGateway(std::vector<MockEntry> entries, MockOptions options = {});

  /// Line-delimited script: each non-blank, non-'#' line is either a JSON
  /// string (plain entry) or an object {response, contains, fingerprint,
  /// repeat, error: "transport"|"timeout"}.
  static std::vector<MockEntry> parse_script(std::string_view jsonl);
  static MockGateway from_file(const std::string& path, MockOptions options = {});

  std::string complete(const std::string& prompt) override;
  std::size_t calls() const noexcept { return calls_; }
  void reset();

 private:
  std::vector<MockEntry> entries_;
  std::vector<bool> consumed_;
  MockOptions options_;
  std::size_t calls_ = 0;
};

struct LlmExchange {
  std::string prompt;
  std::string prompt_fingerprint;
  std::string raw_response;
  std::optional<std::vector<ActionCommand>> parsed;
  double latency = 0.0;  // seconds
  std::string error;     // transport or filter failure detail; empty on success
};

struct ActionRequest {
  std::vector<LlmExchange> exchanges;
  /// Present iff some exchange produced a usable action array.
  std::optional<std::vector<ActionCommand>> commands;
};

/// Sends `prompt`, filters the reply down to a JSON action array and parses
/// it. When that fails the prompt is re-sent once with a repair instruction.
/// Transport failures end the request without commands. Throws
/// BudgetExceeded when `deadline` (clock seconds) has already passed.
ActionRequest request_actions(LlmGateway& gateway, const std::string& prompt, Clock& clock,
                              std::optional<double> deadline = std::nullopt);

/// Plain-text request (summaries). Records one exchange; rethrows gateway
/// errors after recording them.
std::string request_text(LlmGateway& gateway, const std::string& prompt, Clock& clock,
                         std::vector<LlmExchange>& log);

nlohmann::json to_json(const LlmExchange& exchange, bool include_prompt = false);

}  // namespace crashrepro::llm
