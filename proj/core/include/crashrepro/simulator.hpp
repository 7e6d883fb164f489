#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashrepro/clock.hpp"
#include "crashrepro/device.hpp"

namespace crashrepro::sim {

/// What a command must look like to fire a transition or crash rule.
/// `element` is an element id of the source state; `field` names an editable
/// element (by id) whose current value must equal `required_text` or fully
/// match `required_pattern` (ECMAScript). For set_text the field defaults to
/// the target element and the value checked is the one being typed.
struct Trigger {
  Verb verb = Verb::Click;
  std::optional<std::string> element;
  std::optional<std::string> direction;
  std::optional<std::string> field;
  std::optional<std::string> required_text;
  std::optional<std::string> required_pattern;
};

struct Transition {
  std::string from;
  Trigger trigger;
  std::string to;
};

struct CrashRule {
  std::string state;
  Trigger trigger;
  device::CrashInfo crash;
};

struct StateSpec {
  std::string activity;
  std::vector<device::UiElement> elements;
};

struct SimAppSpec {
  std::string app_id;
  std::string initial_state;
  std::map<std::string, StateSpec> states;
  std::vector<Transition> transitions;
  std::vector<CrashRule> crash_rules;
  /// Starting value of every editable element, keyed by element id.
  std::map<std::string, std::string> initial_fields;
};

class SpecInvalid : public Error {
 public:
  explicit SpecInvalid(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Validates everything and reports all violations at once, each prefixed
/// with its location (e.g. "transitions[2].to").
SimAppSpec parse_spec(const nlohmann::json& j);
SimAppSpec load_spec(const std::string& path);
nlohmann::json to_json(const SimAppSpec& spec);

/// State names reachable from the initial state over declared transitions.
std::set<std::string> reachable_states(const SimAppSpec& spec);

struct SimSession {
  std::shared_ptr<const SimAppSpec> spec;
  std::string current;
  std::map<std::string, std::string> field_values;
  std::optional<device::CrashInfo> crashed;
  std::vector<ActionCommand> action_log;

  explicit SimSession(std::shared_ptr<const SimAppSpec> spec);
  /// Rendered screen for the current state, editable text filled in.
  device::UiState observe() const;
};

/// Crash rules first, then transitions. Unmatched commands return ok=false
/// and leave the session as it was. Restart resets state and fields. Every
/// command, failed or not, is appended to action_log. Throws AlreadyCrashed
/// once a crash rule has fired (restart is still allowed).
device::ExecStatus step(SimSession& session, const ActionCommand& cmd);

/// In-process Device over a SimSession. Each command charges
/// `command_cost` seconds to the clock when one is given.
class SimDevice final : public device::Device {
 public:
  explicit SimDevice(std::shared_ptr<const SimAppSpec> spec, std::shared_ptr<Clock> clock = nullptr,
                     double command_cost = 0.2);

  device::UiState capture_state() override;
  device::ExecStatus execute(const ActionCommand& cmd) override;
  device::UiState restart_app() override;
  std::size_t commands_issued() const override { return session_.action_log.size(); }

  const SimSession& session() const noexcept { return session_; }
  const std::string& current_state_name() const noexcept { return session_.current; }

 private:
  SimSession session_;
  std::shared_ptr<Clock> clock_;
  double command_cost_;
};

}  // namespace crashrepro::sim
