#include "crashrepro/action_command.hpp"

#include <cctype>

#include "crashrepro/text.hpp"

namespace crashrepro {

namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (char c : text::trim(s)) {
    if (c == ' ' || c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool is_screen_direction(const std::string& d) {
  return d == "up" || d == "down" || d == "left" || d == "right";
}

// Finds the index one past the ']' closing the '[' at `open`, honoring JSON
// string literals. npos when unbalanced.
std::size_t match_bracket(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

bool qualifies(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) return false;
  for (const auto& el : j)
    if (!el.is_object() || !el.contains("action")) return false;
  return true;
}

std::optional<std::string> string_field(const nlohmann::json& obj, std::size_t index,
                                        std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    if (!obj.contains(key) || obj[key].is_null()) continue;
    const auto& v = obj[key];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw MalformedCommand(index, std::string("field '") + key + "' must be a string");
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Verb v) noexcept {
  switch (v) {
    case Verb::Click: return "click";
    case Verb::LongClick: return "long_click";
    case Verb::DoubleClick: return "double_click";
    case Verb::SetText: return "set_text";
    case Verb::Scroll: return "scroll";
    case Verb::Swipe: return "swipe";
    case Verb::Rotate: return "rotate";
    case Verb::Back: return "back";
    case Verb::Restart: return "restart";
  }
  return "?";
}

std::optional<Verb> parse_verb(std::string_view name) {
  const std::string key = squash(name);
  if (key == "click" || key == "tap") return Verb::Click;
  if (key == "longclick" || key == "longtap") return Verb::LongClick;
  if (key == "doubleclick" || key == "doubletap") return Verb::DoubleClick;
  if (key == "settext" || key == "input") return Verb::SetText;
  if (key == "scroll") return Verb::Scroll;
  if (key == "swipe") return Verb::Swipe;
  if (key == "rotate") return Verb::Rotate;
  if (key == "back") return Verb::Back;
  if (key == "restart") return Verb::Restart;
  return std::nullopt;
}

bool requires_feature(Verb v) noexcept {
  return v == Verb::Click || v == Verb::LongClick || v == Verb::DoubleClick || v == Verb::SetText;
}

void validate(const ActionCommand& cmd) {
  const std::string verb(to_string(cmd.action));
  if (requires_feature(cmd.action) && (!cmd.feature || text::trim(*cmd.feature).empty()))
    throw MalformedCommand(0, verb + " requires feature");
  if (cmd.action == Verb::SetText && !cmd.input_text)
    throw MalformedCommand(0, "missing input_text");
  if (cmd.action == Verb::Scroll || cmd.action == Verb::Swipe) {
    if (!cmd.direction) throw MalformedCommand(0, verb + " requires direction");
    if (!is_screen_direction(*cmd.direction))
      throw MalformedCommand(0, "invalid direction '" + *cmd.direction + "'");
  }
  if (cmd.action == Verb::Rotate && cmd.direction && *cmd.direction != "landscape" &&
      *cmd.direction != "portrait")
    throw MalformedCommand(0, "invalid orientation '" + *cmd.direction + "'");
  if (cmd.duration_ms && *cmd.duration_ms < 0) throw MalformedCommand(0, "negative duration");
}

nlohmann::json to_json(const ActionCommand& cmd) {
  nlohmann::json j;
  j["action"] = std::string(to_string(cmd.action));
  if (cmd.feature) j["feature"] = *cmd.feature;
  if (cmd.input_text) j["input_text"] = *cmd.input_text;
  if (cmd.direction) j["direction"] = *cmd.direction;
  if (cmd.duration_ms) j["duration"] = *cmd.duration_ms;
  return j;
}

std::string describe(const ActionCommand& cmd) {
  std::string out(to_string(cmd.action));
  if (cmd.feature) out += " \"" + *cmd.feature + "\"";
  if (cmd.input_text) out += " <- \"" + *cmd.input_text + "\"";
  if (cmd.direction) out += " " + *cmd.direction;
  return out;
}

std::optional<std::string> filter_json_payload(std::string_view input) {
  nlohmann::json merged = nlohmann::json::array();
  std::size_t pos = 0;
  while ((pos = input.find('[', pos)) != std::string_view::npos) {
    const std::size_t end = match_bracket(input, pos);
    if (end == std::string_view::npos) {
      ++pos;
      continue;
    }
    auto parsed = nlohmann::json::parse(input.substr(pos, end - pos), nullptr, false);
    if (!parsed.is_discarded() && qualifies(parsed)) {
      for (auto& el : parsed) merged.push_back(std::move(el));
      pos = end;
    } else {
      ++pos;
    }
  }
  if (merged.empty()) return std::nullopt;
  return merged.dump();
}

std::vector<ActionCommand> parse_action_sequence(std::string_view json_text) {
  auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_array())
    throw Error(ErrorKind::FormatError, "action sequence is not a JSON array");
  std::vector<ActionCommand> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& obj = j[i];
    if (!obj.is_object()) throw MalformedCommand(i, "element is not an object");
    const auto verb_name = string_field(obj, i, {"action"});
    if (!verb_name) throw MalformedCommand(i, "missing action");
    const auto verb = parse_verb(*verb_name);
    if (!verb) throw MalformedCommand(i, "unknown action '" + *verb_name + "'");

    ActionCommand cmd;
    cmd.action = *verb;
    cmd.feature = string_field(obj, i, {"feature"});
    cmd.input_text = string_field(obj, i, {"input_text"});
    if (auto d = string_field(obj, i, {"direction", "target_direction"})) cmd.direction = text::to_lower(*d);
    if (obj.contains("duration") && obj["duration"].is_number())
      cmd.duration_ms = obj["duration"].get<int>();
    try {
      validate(cmd);
    } catch (const MalformedCommand& e) {
      throw MalformedCommand(i, e.reason());
    }
    out.push_back(std::move(cmd));
  }
  return out;
}

}  // namespace crashrepro
