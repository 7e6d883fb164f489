#include "crashrepro/device.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <tuple>

#include "crashrepro/text.hpp"

namespace crashrepro::device {

namespace {

const std::string& or_empty(const std::optional<std::string>& s) {
  static const std::string empty;
  return s ? *s : empty;
}

bool canonical_less(const UiElement* a, const UiElement* b) {
  return std::forward_as_tuple(a->bounds.top, a->bounds.left, a->bounds.bottom, a->bounds.right,
                               a->class_name, or_empty(a->text), or_empty(a->content_desc),
                               or_empty(a->resource_id), a->element_id) <
         std::forward_as_tuple(b->bounds.top, b->bounds.left, b->bounds.bottom, b->bounds.right,
                               b->class_name, or_empty(b->text), or_empty(b->content_desc),
                               or_empty(b->resource_id), b->element_id);
}

std::vector<const UiElement*> sorted_children(const UiElement& e) {
  std::vector<const UiElement*> kids;
  kids.reserve(e.children.size());
  for (const auto& c : e.children) kids.push_back(&c);
  std::sort(kids.begin(), kids.end(), canonical_less);
  return kids;
}

void skeleton(const UiElement& e, int depth, std::string& out) {
  out += std::to_string(depth);
  out += '|';
  out += e.class_name;
  out += '|';
  if (!e.editable) out += or_empty(e.text);
  out += '|';
  out += or_empty(e.content_desc);
  out += '|';
  out += or_empty(e.resource_id);
  out += '\n';
  for (const UiElement* c : sorted_children(e)) skeleton(*c, depth + 1, out);
}

void collect(const UiElement& e, std::vector<const UiElement*>& out) {
  for (const UiElement* c : sorted_children(e)) {
    out.push_back(c);
    collect(*c, out);
  }
}

std::string short_class(const std::string& cls) {
  const auto dot = cls.rfind('.');
  return dot == std::string::npos ? cls : cls.substr(dot + 1);
}

std::string short_id(const std::string& rid) {
  const auto slash = rid.rfind('/');
  return slash == std::string::npos ? rid : rid.substr(slash + 1);
}

std::string quote_value(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

bool rid_matches(const std::optional<std::string>& rid, std::string_view feature) {
  if (!rid || feature.empty()) return false;
  if (*rid == feature) return true;
  const std::string suffix = "/" + std::string(feature);
  return rid->size() > suffix.size() && rid->compare(rid->size() - suffix.size(), suffix.size(), suffix) == 0;
}

using Predicate = std::function<bool(const UiElement&)>;

struct Tier {
  const char* name;
  Predicate match;
};

std::vector<Tier> cascade(std::string_view feature) {
  const std::string f(feature);
  const std::string lf = text::to_lower(feature);
  return {
      {"exact text", [f](const UiElement& e) { return e.text && *e.text == f; }},
      {"exact content description", [f](const UiElement& e) { return e.content_desc && *e.content_desc == f; }},
      {"resource id", [f](const UiElement& e) { return rid_matches(e.resource_id, f); }},
      {"case-insensitive text", [lf](const UiElement& e) { return e.text && text::to_lower(*e.text) == lf; }},
      {"case-insensitive substring",
       [lf](const UiElement& e) {
         return (e.text && text::to_lower(*e.text).find(lf) != std::string::npos) ||
                (e.content_desc && text::to_lower(*e.content_desc).find(lf) != std::string::npos);
       }},
  };
}

const UiElement* topmost(const std::vector<const UiElement*>& candidates) {
  const UiElement* best = nullptr;
  for (const UiElement* e : candidates) {
    if (best == nullptr || std::tie(e->bounds.top, e->bounds.left) < std::tie(best->bounds.top, best->bounds.left))
      best = e;
  }
  return best;
}

const UiElement* by_id(const std::vector<const UiElement*>& all, std::string_view feature) {
  if (feature.size() < 2 || feature.front() != '@') return nullptr;
  const auto id = feature.substr(1);
  for (const UiElement* e : all)
    if (e->element_id == id) return e;
  return nullptr;
}

}  // namespace

bool is_interactable(const UiElement& e) noexcept {
  return e.clickable || e.long_clickable || e.editable || e.scrollable;
}

std::string compute_state_id(std::string_view activity_name, const UiElement& root) {
  std::string s(activity_name);
  s += '\n';
  skeleton(root, 0, s);
  return text::fingerprint(s);
}

UiState make_state(std::string activity_name, UiElement root) {
  UiState s;
  s.state_id = compute_state_id(activity_name, root);
  s.activity_name = std::move(activity_name);
  s.root = std::move(root);
  return s;
}

std::vector<const UiElement*> canonical_elements(const UiState& state) {
  std::vector<const UiElement*> out;
  collect(state.root, out);
  return out;
}

std::string encode_state_text(const UiState& state) {
  std::ostringstream out;
  out << "Activity: " << state.activity_name << " (state " << state.state_id << ")\n";
  std::size_t index = 0;
  std::function<void(const UiElement&, int)> walk = [&](const UiElement& parent, int depth) {
    for (const UiElement* e : sorted_children(parent)) {
      out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << '[' << index++ << "] "
          << short_class(e->class_name);
      if (e->text) out << " text=" << quote_value(*e->text);
      if (e->content_desc) out << " desc=" << quote_value(*e->content_desc);
      if (e->resource_id) out << " id=" << quote_value(short_id(*e->resource_id));
      std::vector<const char*> flags;
      if (e->clickable) flags.push_back("clickable");
      if (e->long_clickable) flags.push_back("long-clickable");
      if (e->editable) flags.push_back("editable");
      if (e->scrollable) flags.push_back("scrollable");
      if (!flags.empty()) {
        out << " {";
        for (std::size_t i = 0; i < flags.size(); ++i) out << (i ? ", " : "") << flags[i];
        out << '}';
      }
      out << '\n';
      walk(*e, depth + 1);
    }
  };
  walk(state.root, 0);
  return out.str();
}

std::string_view to_string(Failure f) noexcept {
  switch (f) {
    case Failure::None: return "none";
    case Failure::NoMatch: return "no_match";
    case Failure::NoEffect: return "no_effect";
    case Failure::Invalid: return "invalid";
  }
  return "?";
}

NoMatch::NoMatch(std::string feature, std::vector<std::string> tiers)
    : Error(ErrorKind::NoMatch, "no element matches \"" + feature + "\""),
      feature_(std::move(feature)),
      tiers_(std::move(tiers)) {}

const UiElement& resolve_feature(const UiState& state, std::string_view feature) {
  const auto all = canonical_elements(state);
  if (const UiElement* e = by_id(all, feature)) return *e;
  std::vector<std::string> misses;
  if (!text::trim(feature).empty()) {
    for (const auto& tier : cascade(feature)) {
      std::vector<const UiElement*> hits;
      for (const UiElement* e : all)
        if (tier.match(*e)) hits.push_back(e);
      if (!hits.empty()) return *topmost(hits);
      misses.push_back(std::string(tier.name) + ": no match");
    }
  } else {
    misses.push_back("empty feature");
  }
  throw NoMatch(std::string(feature), std::move(misses));
}

bool contains_exact(const UiState& state, std::string_view feature) {
  const auto all = canonical_elements(state);
  if (by_id(all, feature)) return true;
  const auto tiers = cascade(feature);
  for (std::size_t t = 0; t < 3; ++t)
    for (const UiElement* e : all)
      if (tiers[t].match(*e)) return true;
  return false;
}

std::string feature_for(const UiState& state, const UiElement& element) {
  auto resolves_here = [&](const std::string& f) {
    try {
      return &resolve_feature(state, f) == &element ||
             resolve_feature(state, f).element_id == element.element_id;
    } catch (const NoMatch&) {
      return false;
    }
  };
  if (element.text && !element.editable && !element.text->empty() && resolves_here(*element.text))
    return *element.text;
  if (element.content_desc && !element.content_desc->empty() && resolves_here(*element.content_desc))
    return *element.content_desc;
  if (element.resource_id && !element.resource_id->empty()) {
    const std::string rid = short_id(*element.resource_id);
    if (resolves_here(rid)) return rid;
  }
  if (element.text && !element.text->empty() && resolves_here(*element.text)) return *element.text;
  return "@" + element.element_id;
}

nlohmann::json to_json(const UiElement& e) {
  nlohmann::json j;
  j["id"] = e.element_id;
  j["class"] = e.class_name;
  if (e.text) j["text"] = *e.text;
  if (e.content_desc) j["content_desc"] = *e.content_desc;
  if (e.resource_id) j["resource_id"] = *e.resource_id;
  j["bounds"] = {e.bounds.left, e.bounds.top, e.bounds.right, e.bounds.bottom};
  if (e.clickable) j["clickable"] = true;
  if (e.long_clickable) j["long_clickable"] = true;
  if (e.editable) j["editable"] = true;
  if (e.scrollable) j["scrollable"] = true;
  if (!e.children.empty()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : e.children) j["children"].push_back(to_json(c));
  }
  return j;
}

UiElement element_from_json(const nlohmann::json& j) {
  UiElement e;
  e.element_id = j.at("id").get<std::string>();
  e.class_name = j.value("class", std::string("android.view.View"));
  if (j.contains("text")) e.text = j["text"].get<std::string>();
  if (j.contains("content_desc")) e.content_desc = j["content_desc"].get<std::string>();
  if (j.contains("resource_id")) e.resource_id = j["resource_id"].get<std::string>();
  if (j.contains("bounds")) {
    const auto b = j["bounds"].get<std::vector<int>>();
    if (b.size() != 4) throw Error(ErrorKind::FormatError, "bounds must have 4 integers");
    e.bounds = {b[0], b[1], b[2], b[3]};
  }
  e.clickable = j.value("clickable", false);
  e.long_clickable = j.value("long_clickable", false);
  e.editable = j.value("editable", false);
  e.scrollable = j.value("scrollable", false);
  for (const auto& c : j.value("children", nlohmann::json::array())) e.children.push_back(element_from_json(c));
  return e;
}

nlohmann::json to_json(const UiState& s) {
  return {{"state_id", s.state_id}, {"activity", s.activity_name}, {"root", to_json(s.root)}};
}

UiState state_from_json(const nlohmann::json& j) {
  UiState s = make_state(j.at("activity").get<std::string>(), element_from_json(j.at("root")));
  if (j.contains("state_id") && j["state_id"].get<std::string>() != s.state_id)
    throw Error(ErrorKind::FormatError, "stored state_id does not match its content");
  return s;
}

nlohmann::json to_json(const CrashInfo& c) {
  return {{"exception_type", c.exception_type},
          {"message", c.message},
          {"raised_in_activity", c.raised_in_activity}};
}

nlohmann::json to_json(const ExecStatus& s) {
  nlohmann::json j = {{"ok", s.ok},
                      {"detail", s.detail},
                      {"failure", std::string(to_string(s.failure))},
                      {"state_id", s.new_state.state_id},
                      {"activity", s.new_state.activity_name}};
  if (s.crash) j["crash"] = to_json(*s.crash);
  return j;
}

}  // namespace crashrepro::device
