#include "crashrepro/s2r.hpp"

#include <cctype>
#include <regex>
#include <sstream>

#include "crashrepro/error.hpp"
#include "crashrepro/text.hpp"
#include "prompt_templates.hpp"

namespace crashrepro::s2r {

namespace {

bool requires_component(ActionType a) {
  switch (a) {
    case ActionType::Tap:
    case ActionType::DoubleTap:
    case ActionType::LongTap:
    case ActionType::Input:
    case ActionType::Delete:
      return true;
    default:
      return false;
  }
}

bool takes_direction(ActionType a) {
  return a == ActionType::Scroll || a == ActionType::Swipe || a == ActionType::Rotate;
}

bool takes_value(ActionType a) { return a == ActionType::Input || a == ActionType::Delete; }

void check_field(const std::optional<std::string>& field, const char* name) {
  if (!field) return;
  const std::string& f = *field;
  if (f.empty() || text::trim(f).size() != f.size())
    throw Error(ErrorKind::InvariantViolation, std::string(name) + " must be non-empty and trimmed");
  if (f.find_first_of("[]\n\r") != std::string::npos)
    throw Error(ErrorKind::InvariantViolation,
                std::string(name) + " must not contain brackets or line breaks");
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

// Collapses separators so "Long Tap", "long-tap", "long_tap" and "LongTap"
// compare equal.
std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '-' || c == '_' || c == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

const std::regex& list_marker() {
  static const std::regex re(R"(^\s*(?:\d+\s*[.)]|[-*])\s*)");
  return re;
}

}  // namespace

bool is_standard(ActionType a) noexcept {
  return !(a == ActionType::Swipe || a == ActionType::Restart || a == ActionType::Back);
}

std::string_view display_name(ActionType a) noexcept {
  switch (a) {
    case ActionType::Tap: return "Tap";
    case ActionType::Input: return "Input";
    case ActionType::Scroll: return "Scroll";
    case ActionType::Swipe: return "Swipe";
    case ActionType::Rotate: return "Rotate";
    case ActionType::Delete: return "Delete";
    case ActionType::DoubleTap: return "Double-tap";
    case ActionType::LongTap: return "Long-tap";
    case ActionType::Restart: return "Restart";
    case ActionType::Back: return "Back";
  }
  return "?";
}

std::string_view token(ActionType a) noexcept {
  switch (a) {
    case ActionType::Tap: return "tap";
    case ActionType::Input: return "input";
    case ActionType::Scroll: return "scroll";
    case ActionType::Swipe: return "swipe";
    case ActionType::Rotate: return "rotate";
    case ActionType::Delete: return "delete";
    case ActionType::DoubleTap: return "double_tap";
    case ActionType::LongTap: return "long_tap";
    case ActionType::Restart: return "restart";
    case ActionType::Back: return "back";
  }
  return "?";
}

std::optional<ActionType> parse_action(std::string_view name) {
  const std::string key = squash(text::trim(name));
  for (ActionType a : kAllActions) {
    if (key == squash(token(a))) return a;
  }
  return std::nullopt;
}

std::string_view token(Direction d) noexcept {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Left: return "left";
    case Direction::Right: return "right";
    case Direction::Landscape: return "landscape";
    case Direction::Portrait: return "portrait";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view name) {
  const std::string key = text::normalize_phrase(name);
  for (Direction d : {Direction::Up, Direction::Down, Direction::Left, Direction::Right,
                      Direction::Landscape, Direction::Portrait}) {
    if (key == token(d)) return d;
  }
  return std::nullopt;
}

bool accepts_direction(ActionType a, Direction d) noexcept {
  const bool orientation = d == Direction::Landscape || d == Direction::Portrait;
  if (a == ActionType::Rotate) return orientation;
  if (a == ActionType::Scroll || a == ActionType::Swipe) return !orientation;
  return false;
}

void validate(const S2REntity& e) {
  check_field(e.component, "component");
  check_field(e.value, "value");
  const std::string name(display_name(e.action));

  if (requires_component(e.action) && !e.component)
    throw Error(ErrorKind::InvariantViolation, name + " requires a component");
  if (!takes_value(e.action) && e.value)
    throw Error(ErrorKind::InvariantViolation, name + " takes no value");
  if (e.direction) {
    if (!takes_direction(e.action) || !accepts_direction(e.action, *e.direction))
      throw Error(ErrorKind::InvariantViolation,
                  name + " does not accept direction " + std::string(token(*e.direction)));
  }
  if (e.generate_on_replay && e.action != ActionType::Input)
    throw Error(ErrorKind::InvariantViolation, "only Input may defer its value to replay");
  if (e.action == ActionType::Input) {
    if (!e.value && !e.generate_on_replay)
      throw Error(ErrorKind::InvariantViolation, "Input without a value must be generate_on_replay");
    if (e.value && e.generate_on_replay)
      throw Error(ErrorKind::InvariantViolation, "Input with a value cannot be generate_on_replay");
  }
  if ((e.action == ActionType::Restart || e.action == ActionType::Back) &&
      (e.component || e.value || e.direction))
    throw Error(ErrorKind::InvariantViolation, name + " carries no fields");
  // "[Scroll] [down]" reads as a direction, so a lone component may not spell one.
  if (takes_direction(e.action) && e.component && !e.direction) {
    if (auto d = parse_direction(*e.component); d && accepts_direction(e.action, *d))
      throw Error(ErrorKind::InvariantViolation,
                  name + " component '" + *e.component + "' is ambiguous with a direction");
  }
}

bool is_valid(const S2REntity& e) noexcept {
  try {
    validate(e);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string format_entity(const S2REntity& e) {
  validate(e);
  std::string out = "[" + std::string(display_name(e.action)) + "]";
  if (e.component) out += " [" + *e.component + "]";
  if (e.value) out += " [" + *e.value + "]";
  if (e.direction) out += " [" + capitalize(token(*e.direction)) + "]";
  return out;
}

namespace {

// Parses one line that is known to contain a bracket group. Returns the
// entity or throws a message through `reason`.
std::optional<S2REntity> parse_line(std::string_view raw, std::string& reason) {
  std::string line = std::regex_replace(std::string(raw), list_marker(), "",
                                        std::regex_constants::format_first_only);
  const std::size_t first = line.find('[');
  if (first == std::string::npos) {
    reason = "no bracket group";
    return std::nullopt;
  }

  std::vector<std::string> groups;
  std::size_t pos = first;
  while (pos < line.size()) {
    if (line[pos] != '[') {
      // Only separators may sit between groups; anything after the last
      // group without brackets is trailing prose and ignored.
      std::string_view rest = text::trim(std::string_view(line).substr(pos));
      if (rest.find('[') == std::string_view::npos && rest.find(']') == std::string_view::npos)
        break;
      const std::size_t next = line.find('[', pos);
      std::string_view between =
          text::trim(std::string_view(line).substr(pos, next == std::string::npos ? line.size() - pos : next - pos));
      if (!between.empty() && between != "," && between != ";") {
        reason = "unexpected text '" + std::string(between) + "' between bracket groups";
        return std::nullopt;
      }
      if (next == std::string::npos) break;
      pos = next;
      continue;
    }
    const std::size_t close = line.find(']', pos + 1);
    if (close == std::string::npos) {
      reason = "unclosed '['";
      return std::nullopt;
    }
    std::string inner(text::trim(std::string_view(line).substr(pos + 1, close - pos - 1)));
    if (inner.find('[') != std::string::npos) {
      reason = "nested '['";
      return std::nullopt;
    }
    if (inner.empty()) {
      reason = "empty bracket group";
      return std::nullopt;
    }
    groups.push_back(std::move(inner));
    pos = close + 1;
  }

  const auto action = parse_action(groups.front());
  if (!action) {
    reason = "unknown action '" + groups.front() + "'";
    return std::nullopt;
  }
  S2REntity e;
  e.action = *action;
  const std::size_t args = groups.size() - 1;
  auto too_many = [&] {
    reason = std::string(display_name(e.action)) + " has too many fields (" + std::to_string(args) + ")";
  };

  switch (e.action) {
    case ActionType::Tap:
    case ActionType::DoubleTap:
    case ActionType::LongTap:
      if (args != 1) {
        reason = std::string(display_name(e.action)) + " expects exactly one component";
        return std::nullopt;
      }
      e.component = groups[1];
      break;
    case ActionType::Input:
    case ActionType::Delete:
      if (args == 0 || args > 2) {
        reason = std::string(display_name(e.action)) + " expects a component and an optional value";
        return std::nullopt;
      }
      e.component = groups[1];
      if (args == 2)
        e.value = groups[2];
      else if (e.action == ActionType::Input)
        e.generate_on_replay = true;
      break;
    case ActionType::Scroll:
    case ActionType::Swipe:
    case ActionType::Rotate:
      if (args == 1) {
        auto d = parse_direction(groups[1]);
        if (d && accepts_direction(e.action, *d))
          e.direction = d;
        else
          e.component = groups[1];
      } else if (args == 2) {
        auto d = parse_direction(groups[2]);
        if (!d || !accepts_direction(e.action, *d)) {
          reason = "invalid direction '" + groups[2] + "' for " + std::string(display_name(e.action));
          return std::nullopt;
        }
        e.component = groups[1];
        e.direction = d;
      } else if (args > 2) {
        too_many();
        return std::nullopt;
      }
      break;
    case ActionType::Restart:
    case ActionType::Back:
      if (args != 0) {
        reason = std::string(display_name(e.action)) + " takes no fields";
        return std::nullopt;
      }
      break;
  }
  try {
    validate(e);
  } catch (const Error& err) {
    reason = err.what();
    return std::nullopt;
  }
  return e;
}

bool has_bracket_group(std::string_view line) {
  const std::size_t open = line.find('[');
  return open != std::string_view::npos && line.find(']', open) != std::string_view::npos;
}

}  // namespace

NotationParse parse_entity_notation(std::string_view input) {
  NotationParse out;
  const auto lines = text::split_lines(input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    std::string reason;
    if (auto e = parse_line(lines[i], reason)) {
      out.entities.push_back(std::move(*e));
      out.entity_lines.push_back(i);
    } else {
      out.errors.push_back({i, lines[i], reason});
    }
  }
  return out;
}

std::string build_extraction_prompt(const std::vector<std::string>& report_sentences,
                                    const std::vector<ExampleSentence>& examples) {
  std::ostringstream out;
  out << templates::kAvailableActionsHeader << '\n' << templates::kAvailableActions << "\n\n";
  out << templates::kActionPrimitiveHeader << '\n' << templates::kActionPrimitives << "\n\n";
  if (!examples.empty()) {
    out << templates::kRetrievalHeader << '\n' << templates::kRetrievalIntro << '\n';
    for (const auto& ex : examples) {
      out << "The sentence is \"" << ex.sentence << "\", the extracted S2R "
          << (ex.labels.size() == 1 ? "entity is:" : "entities are:") << '\n';
      for (std::size_t i = 0; i < ex.labels.size(); ++i)
        out << (i + 1) << ". " << format_entity(ex.labels[i]) << '\n';
    }
    out << '\n';
  }
  out << templates::kReportHeader << '\n' << templates::kReportIntro << '\n';
  for (std::size_t i = 0; i < report_sentences.size(); ++i)
    out << (i + 1) << ". " << report_sentences[i] << '\n';
  out << templates::kReportOutputFormat << '\n';
  return out.str();
}

S2RScript parse_extraction_response(std::string_view response, std::string source_report,
                                    std::vector<ParseError>* errors) {
  static const std::regex sentence_marker(R"(sentence\s*#?\s*(\d+))", std::regex::icase);
  S2RScript script;
  script.source_report = std::move(source_report);
  std::optional<int> sentence;
  const auto lines = text::split_lines(response);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (!has_bracket_group(line)) {
      std::smatch m;
      if (std::regex_search(line, m, sentence_marker)) sentence = std::stoi(m[1].str());
      continue;
    }
    std::string reason;
    if (auto e = parse_line(line, reason)) {
      script.steps.push_back({std::move(*e), sentence});
    } else if (errors) {
      errors->push_back({i, line, reason});
    }
  }
  if (script.steps.empty())
    throw Error(ErrorKind::NoEntitiesFound, "no S2R entities found in model response");
  return script;
}

std::string format_script(const S2RScript& script) {
  std::string out;
  for (std::size_t i = 0; i < script.steps.size(); ++i)
    out += std::to_string(i + 1) + ". " + format_entity(script.steps[i].entity) + "\n";
  return out;
}

nlohmann::json entity_to_json(const S2REntity& e) {
  nlohmann::json j;
  j["action"] = std::string(token(e.action));
  if (e.component) j["component"] = *e.component;
  if (e.value) j["value"] = *e.value;
  if (e.direction) j["direction"] = std::string(token(*e.direction));
  if (e.generate_on_replay) j["generate_on_replay"] = true;
  return j;
}

S2REntity entity_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("action") || !j["action"].is_string())
    throw Error(ErrorKind::FormatError, "label must be an object with a string 'action'");
  S2REntity e;
  const auto action = parse_action(j["action"].get<std::string>());
  if (!action)
    throw Error(ErrorKind::FormatError, "unknown action '" + j["action"].get<std::string>() + "'");
  e.action = *action;
  auto str = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw Error(ErrorKind::FormatError, std::string(key) + " must be a string");
    return j[key].get<std::string>();
  };
  e.component = str("component");
  e.value = str("value");
  if (auto d = str("direction")) {
    e.direction = parse_direction(*d);
    if (!e.direction) throw Error(ErrorKind::FormatError, "unknown direction '" + *d + "'");
  }
  e.generate_on_replay = j.value("generate_on_replay", false) ||
                         (e.action == ActionType::Input && !e.value);
  validate(e);
  return e;
}

nlohmann::json script_to_json(const S2RScript& s) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : s.steps) {
    nlohmann::json j = entity_to_json(step.entity);
    if (step.sentence_index) j["sentence_index"] = *step.sentence_index;
    steps.push_back(std::move(j));
  }
  return {{"source_report", s.source_report}, {"steps", std::move(steps)}};
}

S2RScript script_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array())
    throw Error(ErrorKind::FormatError, "script must be an object with a 'steps' array");
  S2RScript s;
  s.source_report = j.value("source_report", std::string{});
  for (const auto& step : j["steps"]) {
    S2RStep st{entity_from_json(step), std::nullopt};
    if (step.contains("sentence_index")) st.sentence_index = step["sentence_index"].get<int>();
    s.steps.push_back(std::move(st));
  }
  return s;
}

}  // namespace crashrepro::s2r
