#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "crashrepro/simulator.hpp"
#include "crashrepro/utg.hpp"

namespace testing {

/// (from state, probed element id, to state) over spec state names.
using NamedEdge = std::tuple<std::string, std::string, std::string>;

struct ExpectedGraph {
  std::set<std::string> nodes;
  std::set<NamedEdge> edges;
};

namespace detail {

inline void collect(const crashrepro::device::UiElement& e, std::vector<const crashrepro::device::UiElement*>& out) {
  out.push_back(&e);
  for (const auto& c : e.children) collect(c, out);
}

inline bool trigger_fires(const crashrepro::sim::Trigger& t, crashrepro::Verb verb, const std::string& element,
                          const std::optional<std::string>& direction,
                          const std::map<std::string, std::string>& fields) {
  if (t.verb != verb) return false;
  if (t.element && *t.element != element) return false;
  if (t.direction && t.direction != direction) return false;
  if (t.required_text || t.required_pattern) {
    const std::string field = t.field.value_or(element);
    const auto it = fields.find(field);
    const std::string value = it == fields.end() ? "" : it->second;
    if (t.required_text && value != *t.required_text) return false;
    if (t.required_pattern && !std::regex_match(value, std::regex(*t.required_pattern))) return false;
  }
  return true;
}

}  // namespace detail

/// What probing should find when exploring `depth` levels from `origin`,
/// read straight off the declared transitions. Each probe starts from the
/// app's initial field values; set_text probes type `placeholder`.
inline ExpectedGraph expected_exploration(const crashrepro::sim::SimAppSpec& spec, const std::string& origin,
                                          int depth, const std::string& placeholder = "test") {
  using crashrepro::Verb;
  ExpectedGraph g;
  g.nodes.insert(origin);
  std::vector<std::string> level{origin};
  for (int d = 0; d < depth; ++d) {
    std::vector<std::string> next;
    for (const auto& name : level) {
      std::vector<const crashrepro::device::UiElement*> elems;
      for (const auto& e : spec.states.at(name).elements) detail::collect(e, elems);
      for (const auto* e : elems) {
        if (!crashrepro::device::is_interactable(*e)) continue;
        Verb verb = e->editable ? Verb::SetText
                    : e->clickable ? Verb::Click
                    : e->long_clickable ? Verb::LongClick
                                        : Verb::Scroll;
        std::optional<std::string> dir;
        if (verb == Verb::Scroll) dir = "down";
        auto fields = spec.initial_fields;
        if (verb == Verb::SetText) fields[e->element_id] = placeholder;

        bool crashed = false;
        for (const auto& r : spec.crash_rules)
          if (r.state == name && detail::trigger_fires(r.trigger, verb, e->element_id, dir, fields)) crashed = true;
        if (crashed) continue;
        std::optional<std::string> to;
        for (const auto& t : spec.transitions) {
          if (t.from == name && detail::trigger_fires(t.trigger, verb, e->element_id, dir, fields)) {
            to = t.to;
            break;
          }
        }
        if (!to && verb == Verb::SetText) to = name;
        if (!to) continue;
        g.edges.insert({name, e->element_id, *to});
        if (g.nodes.insert(*to).second) next.push_back(*to);
      }
    }
    level = std::move(next);
  }
  return g;
}

/// State id the simulator renders for a spec state.
inline std::string state_id_of(const std::shared_ptr<const crashrepro::sim::SimAppSpec>& spec, const std::string& name) {
  crashrepro::sim::SimSession s(spec);
  s.current = name;
  return s.observe().state_id;
}

/// Explored graph translated back to spec names for comparison.
inline ExpectedGraph named(const crashrepro::utg::UtgGraph& g,
                           const std::shared_ptr<const crashrepro::sim::SimAppSpec>& spec) {
  std::map<std::string, std::string> name_of;
  for (const auto& [name, _] : spec->states) name_of[state_id_of(spec, name)] = name;
  ExpectedGraph out;
  for (const auto& [sid, _] : g.nodes) out.nodes.insert(name_of.count(sid) ? name_of.at(sid) : "?" + sid);
  for (const auto& e : g.edges) {
    const auto& from = g.nodes.at(e.from);
    const std::string element = crashrepro::device::resolve_feature(from, *e.action.feature).element_id;
    out.edges.insert({name_of.at(e.from), element, name_of.at(e.to)});
  }
  return out;
}

/// Random graph over labelled single-element states. Node k carries label
/// "L<k % labels>"; edges are drawn with probability `p`.
inline crashrepro::utg::UtgGraph random_graph(std::mt19937& rng, std::size_t n, std::size_t labels, double p) {
  using namespace crashrepro;
  utg::UtgGraph g;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < n; ++k) {
    device::UiElement root;
    root.element_id = "root";
    root.class_name = "Frame";
    device::UiElement label;
    label.element_id = "e";
    label.class_name = "Button";
    label.text = "L" + std::to_string(k % labels);
    label.clickable = true;
    label.bounds = {0, 0, 10, 10};
    root.children.push_back(label);
    auto s = device::make_state("A" + std::to_string(k), root);
    ids.push_back(s.state_id);
    g.nodes.emplace(s.state_id, s);
  }
  g.origin = ids[0];
  std::bernoulli_distribution edge(p);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && edge(rng)) {
        ActionCommand c;
        c.action = Verb::Click;
        c.feature = "L" + std::to_string(b % labels);
        g.edges.push_back({ids[a], c, ids[b]});
      }
  return g;
}

/// Distances by repeated relaxation, no queue.
inline std::map<std::string, std::size_t> relaxed_distances(const crashrepro::utg::UtgGraph& g) {
  std::map<std::string, std::size_t> d{{g.origin, 0}};
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& e : g.edges) {
      auto from = d.find(e.from);
      if (from == d.end()) continue;
      auto to = d.find(e.to);
      if (to == d.end() || to->second > from->second + 1) {
        d[e.to] = from->second + 1;
        changed = true;
      }
    }
  }
  return d;
}

/// Closest node showing `label`, ties by state id; empty when none.
inline std::string closest_by_scan(const crashrepro::utg::UtgGraph& g, const std::string& label) {
  const auto d = relaxed_distances(g);
  std::string best;
  std::size_t best_d = 0;
  for (const auto& [sid, dist] : d) {
    const auto& kids = g.nodes.at(sid).root.children;
    const bool has = std::any_of(kids.begin(), kids.end(), [&](const auto& c) { return c.text == label; });
    if (!has) continue;
    if (best.empty() || dist < best_d || (dist == best_d && sid < best)) {
      best = sid;
      best_d = dist;
    }
  }
  return best;
}

}  // namespace testing
