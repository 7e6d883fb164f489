#include "crashrepro/simulator.hpp"

#include <deque>
#include <functional>
#include <regex>
#include <tuple>

#include "crashrepro/text.hpp"

namespace crashrepro::sim {

namespace {

using device::UiElement;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

template <typename T>
std::optional<T> opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

void walk(const std::vector<UiElement>& elements, const std::function<void(const UiElement&)>& fn) {
  for (const auto& e : elements) {
    fn(e);
    walk(e.children, fn);
  }
}

const UiElement* find_element(const StateSpec& state, const std::string& id) {
  const UiElement* hit = nullptr;
  walk(state.elements, [&](const UiElement& e) {
    if (hit == nullptr && e.element_id == id) hit = &e;
  });
  return hit;
}

class Validator {
 public:
  void fail(const std::string& where, const std::string& what) { errors.push_back(where + ": " + what); }
  std::vector<std::string> errors;
};

Trigger parse_trigger(const nlohmann::json& j, const std::string& where, Validator& v) {
  Trigger t;
  const auto verb_name = opt<std::string>(j, "verb");
  if (!verb_name) {
    v.fail(where + ".verb", "missing");
  } else if (auto verb = parse_verb(*verb_name)) {
    t.verb = *verb;
  } else {
    v.fail(where + ".verb", "unknown verb '" + *verb_name + "'");
  }
  t.element = opt<std::string>(j, "element");
  t.direction = opt<std::string>(j, "direction");
  t.field = opt<std::string>(j, "field");
  t.required_text = opt<std::string>(j, "required_text");
  t.required_pattern = opt<std::string>(j, "required_pattern");
  if (t.required_pattern) {
    try {
      std::regex re(*t.required_pattern);
    } catch (const std::regex_error&) {
      v.fail(where + ".required_pattern", "invalid regular expression");
    }
  }
  if ((t.required_text || t.required_pattern) && !t.field && t.verb != Verb::SetText)
    v.fail(where, "a value condition needs 'field' unless the verb is set_text");
  return t;
}

void check_trigger_target(const SimAppSpec& spec, const std::string& state, const Trigger& t,
                          const std::string& where, Validator& v) {
  const auto it = spec.states.find(state);
  if (it == spec.states.end()) return;
  if (t.element) {
    const UiElement* e = find_element(it->second, *t.element);
    if (e == nullptr) v.fail(where + ".element", "'" + *t.element + "' is not an element of state '" + state + "'");
    else if (t.verb == Verb::SetText && !e->editable) v.fail(where + ".element", "'" + *t.element + "' is not editable");
  } else if (t.verb == Verb::SetText) {
    v.fail(where + ".element", "set_text needs an element");
  }
  if (t.field && !spec.initial_fields.count(*t.field))
    v.fail(where + ".field", "'" + *t.field + "' is not an editable element");
}

auto trigger_key(const std::string& state, const Trigger& t) {
  return std::make_tuple(state, static_cast<int>(t.verb), t.element, t.direction, t.field, t.required_text,
                         t.required_pattern);
}

}  // namespace

SpecInvalid::SpecInvalid(std::vector<std::string> violations)
    : Error(ErrorKind::SpecInvalid, "invalid simulator spec: " + join(violations)),
      violations_(std::move(violations)) {}

SimAppSpec parse_spec(const nlohmann::json& j) {
  Validator v;
  SimAppSpec spec;
  if (!j.is_object()) throw SpecInvalid({"document: expected an object"});
  try {
    spec.app_id = j.value("app_id", std::string());
    spec.initial_state = j.value("initial_state", std::string());
    if (spec.app_id.empty()) v.fail("app_id", "missing");

    const auto states = j.value("states", nlohmann::json::object());
    if (!states.is_object() || states.empty()) v.fail("states", "no states defined");
    for (const auto& [name, body] : states.items()) {
      const std::string where = "states." + name;
      StateSpec st;
      st.activity = body.value("activity", std::string());
      if (st.activity.empty()) v.fail(where + ".activity", "missing");
      for (const auto& e : body.value("elements", nlohmann::json::array())) st.elements.push_back(device::element_from_json(e));
      std::set<std::string> ids;
      walk(st.elements, [&](const UiElement& e) {
        if (e.element_id.empty()) v.fail(where, "element without id");
        if (!ids.insert(e.element_id).second) v.fail(where, "duplicate element id '" + e.element_id + "'");
        if (!e.bounds.well_formed()) v.fail(where + "." + e.element_id, "bounds must be non-negative and ordered");
        if (e.editable) spec.initial_fields.emplace(e.element_id, e.text.value_or(""));
      });
      spec.states.emplace(name, std::move(st));
    }
    if (spec.initial_state.empty()) v.fail("initial_state", "missing");
    else if (!spec.states.count(spec.initial_state)) v.fail("initial_state", "unknown state '" + spec.initial_state + "'");

    std::set<decltype(trigger_key("", Trigger{}))> seen;
    const auto transitions = j.value("transitions", nlohmann::json::array());
    for (std::size_t i = 0; i < transitions.size(); ++i) {
      const std::string where = "transitions[" + std::to_string(i) + "]";
      Transition t;
      t.from = transitions[i].value("from", std::string());
      t.to = transitions[i].value("to", std::string());
      t.trigger = parse_trigger(transitions[i], where, v);
      if (!spec.states.count(t.from)) v.fail(where + ".from", "unknown state '" + t.from + "'");
      if (!spec.states.count(t.to)) v.fail(where + ".to", "unknown state '" + t.to + "'");
      check_trigger_target(spec, t.from, t.trigger, where, v);
      if (!seen.insert(trigger_key(t.from, t.trigger)).second) v.fail(where, "ambiguous trigger");
      spec.transitions.push_back(std::move(t));
    }

    seen.clear();
    const auto rules = j.value("crash_rules", nlohmann::json::array());
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string where = "crash_rules[" + std::to_string(i) + "]";
      CrashRule r;
      r.state = rules[i].value("state", std::string());
      r.trigger = parse_trigger(rules[i], where, v);
      const auto crash = rules[i].value("crash", nlohmann::json::object());
      r.crash.exception_type = crash.value("exception_type", std::string());
      r.crash.message = crash.value("message", std::string());
      if (!spec.states.count(r.state)) v.fail(where + ".state", "unknown state '" + r.state + "'");
      else r.crash.raised_in_activity = crash.value("activity", spec.states.at(r.state).activity);
      if (r.crash.exception_type.empty()) v.fail(where + ".crash.exception_type", "missing");
      check_trigger_target(spec, r.state, r.trigger, where, v);
      if (!seen.insert(trigger_key(r.state, r.trigger)).second) v.fail(where, "ambiguous trigger");
      spec.crash_rules.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    v.fail("document", e.what());
  } catch (const Error& e) {
    v.fail("document", e.what());
  }
  if (!v.errors.empty()) throw SpecInvalid(std::move(v.errors));
  return spec;
}

SimAppSpec load_spec(const std::string& path) {
  const std::string body = text::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecInvalid({path + ": " + e.what()});
  }
  try {
    return parse_spec(j);
  } catch (const SpecInvalid& e) {
    std::vector<std::string> located;
    for (const auto& msg : e.violations()) located.push_back(path + ": " + msg);
    throw SpecInvalid(std::move(located));
  }
}

namespace {

nlohmann::json trigger_json(const Trigger& t) {
  nlohmann::json j = {{"verb", std::string(to_string(t.verb))}};
  if (t.element) j["element"] = *t.element;
  if (t.direction) j["direction"] = *t.direction;
  if (t.field) j["field"] = *t.field;
  if (t.required_text) j["required_text"] = *t.required_text;
  if (t.required_pattern) j["required_pattern"] = *t.required_pattern;
  return j;
}

}  // namespace

nlohmann::json to_json(const SimAppSpec& spec) {
  nlohmann::json j = {{"app_id", spec.app_id}, {"initial_state", spec.initial_state}};
  j["states"] = nlohmann::json::object();
  for (const auto& [name, st] : spec.states) {
    auto elements = nlohmann::json::array();
    for (const auto& e : st.elements) elements.push_back(device::to_json(e));
    j["states"][name] = {{"activity", st.activity}, {"elements", elements}};
  }
  j["transitions"] = nlohmann::json::array();
  for (const auto& t : spec.transitions) {
    auto tj = trigger_json(t.trigger);
    tj["from"] = t.from;
    tj["to"] = t.to;
    j["transitions"].push_back(tj);
  }
  j["crash_rules"] = nlohmann::json::array();
  for (const auto& r : spec.crash_rules) {
    auto rj = trigger_json(r.trigger);
    rj["state"] = r.state;
    rj["crash"] = {{"exception_type", r.crash.exception_type},
                   {"message", r.crash.message},
                   {"activity", r.crash.raised_in_activity}};
    j["crash_rules"].push_back(rj);
  }
  return j;
}

std::set<std::string> reachable_states(const SimAppSpec& spec) {
  std::set<std::string> seen{spec.initial_state};
  std::deque<std::string> queue{spec.initial_state};
  while (!queue.empty()) {
    const std::string s = queue.front();
    queue.pop_front();
    for (const auto& t : spec.transitions)
      if (t.from == s && seen.insert(t.to).second) queue.push_back(t.to);
  }
  return seen;
}

SimSession::SimSession(std::shared_ptr<const SimAppSpec> s)
    : spec(std::move(s)), current(spec->initial_state), field_values(spec->initial_fields) {}

device::UiState SimSession::observe() const {
  const StateSpec& st = spec->states.at(current);
  UiElement root;
  root.element_id = "window";
  root.class_name = "android.widget.FrameLayout";
  root.children = st.elements;
  std::function<void(std::vector<UiElement>&)> fill = [&](std::vector<UiElement>& elements) {
    for (auto& e : elements) {
      if (e.editable) {
        const auto it = field_values.find(e.element_id);
        if (it != field_values.end()) e.text = it->second;
      }
      fill(e.children);
    }
  };
  fill(root.children);
  root.bounds = {0, 0, 1080, 1920};
  return device::make_state(st.activity, std::move(root));
}

namespace {

bool condition_holds(const Trigger& t, const SimSession& s, const ActionCommand& cmd,
                     const std::optional<std::string>& target) {
  if (!t.required_text && !t.required_pattern) return true;
  std::optional<std::string> value;
  const auto field = t.field ? t.field : (cmd.action == Verb::SetText ? target : std::nullopt);
  if (!field) return false;
  if (cmd.action == Verb::SetText && target == field) {
    value = cmd.input_text;
  } else if (auto it = s.field_values.find(*field); it != s.field_values.end()) {
    value = it->second;
  }
  if (!value) return false;
  if (t.required_text && *value != *t.required_text) return false;
  if (t.required_pattern && !std::regex_match(*value, std::regex(*t.required_pattern))) return false;
  return true;
}

bool trigger_matches(const Trigger& t, const SimSession& s, const ActionCommand& cmd,
                     const std::optional<std::string>& target) {
  if (t.verb != cmd.action) return false;
  if (t.element && t.element != target) return false;
  if (t.direction && t.direction != cmd.direction) return false;
  return condition_holds(t, s, cmd, target);
}

device::ExecStatus status_for(const SimSession& s, bool ok, std::string detail,
                              device::Failure failure = device::Failure::None) {
  device::ExecStatus st;
  st.ok = ok;
  st.detail = std::move(detail);
  st.new_state = s.observe();
  st.failure = failure;
  return st;
}

}  // namespace

device::ExecStatus step(SimSession& session, const ActionCommand& cmd) {
  if (session.crashed && cmd.action != Verb::Restart)
    throw Error(ErrorKind::AlreadyCrashed, "app has crashed: " + session.crashed->exception_type);
  session.action_log.push_back(cmd);

  if (cmd.action == Verb::Restart) {
    session.current = session.spec->initial_state;
    session.field_values = session.spec->initial_fields;
    session.crashed.reset();
    return status_for(session, true, "app restarted");
  }

  try {
    validate(cmd);
  } catch (const MalformedCommand& e) {
    return status_for(session, false, e.reason(), device::Failure::Invalid);
  }

  std::optional<std::string> target;
  const UiElement* target_element = nullptr;
  if (cmd.feature && !text::trim(*cmd.feature).empty()) {
    const device::UiState here = session.observe();
    try {
      target_element = &device::resolve_feature(here, *cmd.feature);
      target = target_element->element_id;
    } catch (const device::NoMatch& e) {
      auto st = status_for(session, false, e.what(), device::Failure::NoMatch);
      st.missed_tiers = e.tiers();
      return st;
    }
    if (cmd.action == Verb::SetText && !target_element->editable)
      return status_for(session, false, "element \"" + *cmd.feature + "\" is not editable",
                        device::Failure::NoEffect);
  }

  for (const auto& rule : session.spec->crash_rules) {
    if (rule.state == session.current && trigger_matches(rule.trigger, session, cmd, target)) {
      if (cmd.action == Verb::SetText) session.field_values[*target] = *cmd.input_text;
      auto st = status_for(session, true, "app crashed: " + rule.crash.exception_type);
      session.crashed = rule.crash;
      st.crash = rule.crash;
      return st;
    }
  }

  for (const auto& t : session.spec->transitions) {
    if (t.from == session.current && trigger_matches(t.trigger, session, cmd, target)) {
      if (cmd.action == Verb::SetText) session.field_values[*target] = *cmd.input_text;
      session.current = t.to;
      return status_for(session, true, "executed " + describe(cmd));
    }
  }

  if (cmd.action == Verb::SetText) {
    session.field_values[*target] = *cmd.input_text;
    return status_for(session, true, "executed " + describe(cmd));
  }
  return status_for(session, false, describe(cmd) + " had no effect on this screen", device::Failure::NoEffect);
}

SimDevice::SimDevice(std::shared_ptr<const SimAppSpec> spec, std::shared_ptr<Clock> clock, double command_cost)
    : session_(std::move(spec)), clock_(std::move(clock)), command_cost_(command_cost) {}

device::UiState SimDevice::capture_state() { return session_.observe(); }

device::ExecStatus SimDevice::execute(const ActionCommand& cmd) {
  if (clock_) clock_->advance(command_cost_);
  return step(session_, cmd);
}

device::UiState SimDevice::restart_app() {
  ActionCommand restart;
  restart.action = Verb::Restart;
  return execute(restart).new_state;
}

}  // namespace crashrepro::sim
