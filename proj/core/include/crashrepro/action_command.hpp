#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashrepro/error.hpp"

namespace crashrepro {

/// Device-level verbs understood by every backend.
enum class Verb { Click, LongClick, DoubleClick, SetText, Scroll, Swipe, Rotate, Back, Restart };

std::string_view to_string(Verb v) noexcept;
/// Canonical names plus the fixed alias table: tap -> click, input -> set_text,
/// long tap -> long_click, double tap -> double_click (separators ignored).
std::optional<Verb> parse_verb(std::string_view name);
bool requires_feature(Verb v) noexcept;

/// One executable device action in the model's JSON protocol.
struct ActionCommand {
  Verb action = Verb::Click;
  std::optional<std::string> feature;
  std::optional<std::string> input_text;
  std::optional<std::string> direction;  // up/down/left/right, landscape/portrait for rotate
  std::optional<int> duration_ms;

  friend bool operator==(const ActionCommand&, const ActionCommand&) = default;
};

/// Throws Error(MalformedCommand) when a verb's required fields are missing.
void validate(const ActionCommand& cmd);
nlohmann::json to_json(const ActionCommand& cmd);
/// Short human form, e.g. `click "OK"` or `set_text "URL" <- "abc"`.
std::string describe(const ActionCommand& cmd);

class MalformedCommand : public Error {
 public:
  MalformedCommand(std::size_t index, std::string reason)
      : Error(ErrorKind::MalformedCommand,
              "command " + std::to_string(index) + ": " + reason),
        index_(index),
        reason_(std::move(reason)) {}

  std::size_t index() const noexcept { return index_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t index_;
  std::string reason_;
};

/// Scans free text for bracketed JSON arrays whose elements are all objects
/// with an "action" key. Qualifying arrays are concatenated in textual order
/// and returned as one compact array; absent when none qualify.
std::optional<std::string> filter_json_payload(std::string_view text);

/// Maps a JSON array onto commands, normalizing verb and key aliases
/// (target_direction -> direction). Unknown keys are ignored. Throws
/// MalformedCommand for the first invalid element.
std::vector<ActionCommand> parse_action_sequence(std::string_view json_text);

}  // namespace crashrepro
