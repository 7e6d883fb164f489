#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashrepro/clock.hpp"
#include "crashrepro/device.hpp"
#include "crashrepro/llm_gateway.hpp"
#include "crashrepro/s2r.hpp"
#include "crashrepro/utg.hpp"

namespace crashrepro::replay {

enum class Outcome { Reproduced, BudgetExhausted, NoActionableOutput, DeviceFailure };
std::string_view to_string(Outcome o) noexcept;
std::optional<Outcome> parse_outcome(std::string_view s);

enum class StuckReason { NoMatchRepeated, StateRevisitedWithoutProgress, LlmNoActionableOutput };
std::string_view to_string(StuckReason r) noexcept;

struct StuckSignal {
  StuckReason reason;
  std::string state;

  friend bool operator==(const StuckSignal&, const StuckSignal&) = default;
};

/// One loop event: an executed command with its status, or a model turn
/// that produced nothing executable (no command, no status).
struct HistoryEntry {
  std::string state_id;  // screen the event happened on
  std::optional<ActionCommand> command;
  std::optional<device::ExecStatus> status;

  bool no_output() const noexcept { return !command; }
};

struct StuckThresholds {
  std::size_t no_match_repeats = 2;
  std::size_t revisits = 3;
  std::size_t no_output_repeats = 2;
};

/// Checks the rules against the newest entry only, so a condition fires once
/// when it first becomes true:
///   (a) the same NoMatch (state, feature) seen `no_match_repeats` times;
///   (b) a screen arrived at `revisits` times since the last first-time screen;
///   (c) `no_output_repeats` empty model turns on the same screen.
std::optional<StuckSignal> detect_stuck(const std::vector<HistoryEntry>& history,
                                        const StuckThresholds& thresholds = {});

/// Tier 1 (no knowledge): task, bug report, S2R entities, current screen,
/// output format. Tier 2 adds the app knowledge section after the screen.
/// Feedback lines, when given, go in their own section before the output
/// format.
std::string build_replay_prompt(const std::string& report, const s2r::S2RScript& script,
                                const std::string& encoded_ui, const std::vector<utg::Knowledge>& knowledge = {},
                                const std::vector<std::string>& feedback = {});
std::string render_knowledge(const utg::Knowledge& k);

/// Execution feedback for the model. Empty for crashes: the run is over.
std::string render_feedback(const ActionCommand& cmd, const device::ExecStatus& status,
                            const std::string& previous_state_id);

struct IterationRecord {
  std::size_t iteration = 0;
  double started_at = 0.0;
  std::string state_id;
  std::string activity;
  int tier = 1;
  std::vector<llm::LlmExchange> exchanges;
  std::vector<ActionCommand> commands;
  std::vector<device::ExecStatus> statuses;
  std::vector<std::string> feedback;
  std::optional<StuckSignal> stuck;
  /// Set when this iteration triggered exploration.
  std::optional<nlohmann::json> exploration;
  std::vector<llm::LlmExchange> summary_exchanges;
};

struct ReplayResult {
  Outcome outcome = Outcome::BudgetExhausted;
  std::optional<device::CrashInfo> crash;
  double elapsed = 0.0;
  double llm_time = 0.0;
  std::size_t steps_executed = 0;
  std::string detail;
  std::vector<HistoryEntry> history;
  std::vector<IterationRecord> trace;
};

struct ReplayOptions {
  double budget = 300.0;  // seconds
  bool escalation = true;
  utg::ExploreOptions explore;
  StuckThresholds stuck;
  std::size_t feedback_window = 5;
  /// Time source for the budget and latency accounting; wall clock if null.
  std::shared_ptr<Clock> clock;
  /// Previously explored knowledge, looked up by origin state id before
  /// exploring and offered every new result.
  std::function<std::optional<utg::Knowledge>(const std::string& state_id)> knowledge_lookup;
  std::function<void(const utg::UtgGraph&, const utg::Knowledge&)> knowledge_store;
};

/// Feedback loop: observe, prompt, execute, repeat until a crash is seen, the
/// budget runs out, the model stops producing actions, or the device fails.
/// When stuck, the stuck page is explored once and the resulting knowledge
/// is included in every later prompt.
ReplayResult run(const std::string& report, const s2r::S2RScript& script, device::Device& device,
                 llm::LlmGateway& gateway, const ReplayOptions& options = {});

nlohmann::json to_json(const IterationRecord& r);
/// Run log: one JSON line per iteration followed by a summary line.
std::string trace_jsonl(const ReplayResult& result);
nlohmann::json summary_json(const ReplayResult& result);

}  // namespace crashrepro::replay
