#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace crashrepro::s2r {

enum class ActionType {
  Tap,
  Input,
  Scroll,
  Swipe,
  Rotate,
  Delete,
  DoubleTap,
  LongTap,
  Restart,
  Back,
};

inline constexpr ActionType kAllActions[] = {
    ActionType::Tap,    ActionType::Input,  ActionType::Scroll,    ActionType::Swipe,
    ActionType::Rotate, ActionType::Delete, ActionType::DoubleTap, ActionType::LongTap,
    ActionType::Restart, ActionType::Back,
};

/// The seven actions every labeled corpus uses; swipe, restart and back are
/// extensions offered to the model.
bool is_standard(ActionType a) noexcept;
/// Bracket-notation name: "Tap", "Double-tap", "Long-tap", ...
std::string_view display_name(ActionType a) noexcept;
/// Serialized token: "tap", "double_tap", "long_tap", ...
std::string_view token(ActionType a) noexcept;
/// Case-insensitive; accepts "Long Tap", "long-tap", "long_tap", "LongTap".
std::optional<ActionType> parse_action(std::string_view name);

enum class Direction { Up, Down, Left, Right, Landscape, Portrait };

std::string_view token(Direction d) noexcept;
std::optional<Direction> parse_direction(std::string_view name);
/// Whether `d` is a legal direction for action `a` (scroll/swipe take the four
/// screen directions, rotate takes an orientation, nothing else takes one).
bool accepts_direction(ActionType a, Direction d) noexcept;

struct S2REntity {
  ActionType action = ActionType::Tap;
  std::optional<std::string> component;
  std::optional<std::string> value;
  std::optional<Direction> direction;
  /// Input with no value in the report: the replay prompt asks the model to
  /// make one up.
  bool generate_on_replay = false;

  friend bool operator==(const S2REntity&, const S2REntity&) = default;
};

/// Throws Error(InvariantViolation) describing the first broken rule.
void validate(const S2REntity& e);
bool is_valid(const S2REntity& e) noexcept;

struct S2RStep {
  S2REntity entity;
  /// 1-based index of the report sentence this step came from, when known.
  std::optional<int> sentence_index;

  friend bool operator==(const S2RStep&, const S2RStep&) = default;
};

struct S2RScript {
  std::vector<S2RStep> steps;
  std::string source_report;

  friend bool operator==(const S2RScript&, const S2RScript&) = default;
};

std::string format_entity(const S2REntity& e);

struct ParseError {
  std::size_t line_index = 0;  // 0-based line within the parsed text
  std::string line;
  std::string reason;
};

struct NotationParse {
  std::vector<S2REntity> entities;
  /// Source line of each entity, parallel to `entities`.
  std::vector<std::size_t> entity_lines;
  std::vector<ParseError> errors;
};

/// Parses one entity per line. Lines may carry a list marker ("1.", "2)",
/// "-"). Blank lines are skipped; every other line either yields an entity or
/// a ParseError.
NotationParse parse_entity_notation(std::string_view text);

struct ExampleSentence {
  std::string sentence;
  std::vector<S2REntity> labels;
};

std::string build_extraction_prompt(const std::vector<std::string>& report_sentences,
                                    const std::vector<ExampleSentence>& examples);

/// Drops prose lines (no bracket group), then parses the rest. A prose line
/// naming "Sentence N" sets the sentence index of the entities that follow.
/// Throws Error(NoEntitiesFound) when nothing parses. Lines that carry
/// brackets but fail to parse go to `errors` when given.
S2RScript parse_extraction_response(std::string_view text, std::string source_report = {},
                                    std::vector<ParseError>* errors = nullptr);

/// Script rendered as numbered bracket notation, one step per line.
std::string format_script(const S2RScript& script);

// JSON label schema shared with the corpus file.
nlohmann::json entity_to_json(const S2REntity& e);
S2REntity entity_from_json(const nlohmann::json& j);
nlohmann::json script_to_json(const S2RScript& s);
S2RScript script_from_json(const nlohmann::json& j);

}  // namespace crashrepro::s2r
