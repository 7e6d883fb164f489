#include "crashrepro/utg.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>

#include "prompt_templates.hpp"

namespace crashrepro::utg {

namespace {

using device::UiElement;
using device::UiState;

class Explorer {
 public:
  Explorer(device::Device& dev, const UiState& origin, const ExploreOptions& opts)
      : dev_(dev), opts_(opts), start_(dev.commands_issued()), current_(origin.state_id) {
    g_.origin = origin.state_id;
    g_.nodes.emplace(origin.state_id, origin);
    g_.paths[origin.state_id] = {};
  }

  UtgGraph run() {
    std::vector<std::string> level{g_.origin};
    for (int d = 0; d < opts_.depth && !level.empty() && !g_.budget_exhausted; ++d) {
      std::vector<std::string> next;
      for (const auto& sid : level) {
        if (!probe_page(sid, next)) break;
      }
      level = std::move(next);
    }
    if (current_ != g_.origin || dirty_) restore(g_.origin);
    g_.commands_used = used();
    return std::move(g_);
  }

 private:
  std::size_t used() const { return dev_.commands_issued() - start_; }

  std::size_t restore_cost(const std::string& sid) const {
    return 1 + opts_.origin_path.size() + g_.paths.at(sid).size();
  }

  bool restore(const std::string& sid) {
    UiState s = dev_.restart_app();
    std::vector<ActionCommand> path = opts_.origin_path;
    const auto& rest = g_.paths.at(sid);
    path.insert(path.end(), rest.begin(), rest.end());
    for (const auto& cmd : path) {
      const auto st = dev_.execute(cmd);
      s = st.new_state;
      if (!st.ok || st.crash) break;
    }
    current_ = s.state_id;
    dirty_ = false;
    return current_ == sid;
  }

  // False once the budget is exhausted.
  bool probe_page(const std::string& sid, std::vector<std::string>& next) {
    const UiState page = g_.nodes.at(sid);
    std::vector<const UiElement*> targets;
    for (const UiElement* e : device::canonical_elements(page))
      if (device::is_interactable(*e)) targets.push_back(e);
    if (opts_.seed) {
      std::mt19937 rng(*opts_.seed);
      std::shuffle(targets.begin(), targets.end(), rng);
    }
    const std::size_t return_cost = 1 + opts_.origin_path.size();
    for (const UiElement* e : targets) {
      const ActionCommand cmd = probe_command(page, *e, opts_.placeholder);
      const bool must_restore = current_ != sid || dirty_;
      const std::size_t needed = (must_restore ? restore_cost(sid) : 0) + 1 + return_cost;
      if (used() + needed > opts_.action_budget) {
        g_.budget_exhausted = true;
        return false;
      }
      if (must_restore && !restore(sid)) return true;  // page no longer reachable this way

      const auto st = dev_.execute(cmd);
      dirty_ = cmd.action == Verb::SetText;
      if (st.crash) {
        g_.crashes.push_back({sid, cmd, *st.crash});
        current_.clear();
        continue;
      }
      current_ = st.new_state.state_id;
      if (!st.ok) continue;
      const std::string& to = st.new_state.state_id;
      if (!g_.nodes.count(to)) {
        g_.nodes.emplace(to, st.new_state);
        auto path = g_.paths.at(sid);
        path.push_back(cmd);
        g_.paths[to] = std::move(path);
        next.push_back(to);
      }
      Edge edge{sid, cmd, to};
      if (std::find(g_.edges.begin(), g_.edges.end(), edge) == g_.edges.end()) g_.edges.push_back(std::move(edge));
    }
    return true;
  }

  device::Device& dev_;
  const ExploreOptions& opts_;
  std::size_t start_;
  std::string current_;
  bool dirty_ = false;
  UtgGraph g_;
};

struct BfsTree {
  std::vector<std::string> order;
  std::map<std::string, std::size_t> distance;
  std::map<std::string, const Edge*> parent;
};

BfsTree bfs(const UtgGraph& g) {
  BfsTree t;
  if (!g.nodes.count(g.origin)) return t;
  std::vector<std::string> level{g.origin};
  t.distance[g.origin] = 0;
  std::size_t d = 0;
  while (!level.empty()) {
    std::sort(level.begin(), level.end());
    t.order.insert(t.order.end(), level.begin(), level.end());
    std::vector<std::string> next;
    for (const auto& s : level) {
      for (const auto& e : g.edges) {
        if (e.from != s || t.distance.count(e.to)) continue;
        t.distance[e.to] = d + 1;
        t.parent[e.to] = &e;
        next.push_back(e.to);
      }
    }
    level = std::move(next);
    ++d;
  }
  return t;
}

nlohmann::json command_json(const ActionCommand& c) { return to_json(c); }

ActionCommand command_from(const nlohmann::json& j) {
  auto cmds = parse_action_sequence(nlohmann::json::array({j}).dump());
  return cmds.front();
}

std::vector<llm::LlmExchange>& sink(std::vector<llm::LlmExchange>* log, std::vector<llm::LlmExchange>& local) {
  return log ? *log : local;
}

}  // namespace

ActionCommand probe_command(const UiState& state, const UiElement& element, const std::string& placeholder) {
  ActionCommand cmd;
  cmd.feature = device::feature_for(state, element);
  if (element.editable) {
    cmd.action = Verb::SetText;
    cmd.input_text = placeholder;
  } else if (element.clickable) {
    cmd.action = Verb::Click;
  } else if (element.long_clickable) {
    cmd.action = Verb::LongClick;
  } else {
    cmd.action = Verb::Scroll;
    cmd.direction = "down";
  }
  return cmd;
}

UtgGraph explore(device::Device& device, const UiState& origin, const ExploreOptions& options) {
  if (options.depth < 1) throw Error(ErrorKind::ConfigError, "exploration depth must be positive");
  if (options.action_budget < 1) throw Error(ErrorKind::ConfigError, "exploration action budget must be positive");
  return Explorer(device, origin, options).run();
}

std::map<std::string, std::size_t> bfs_distances(const UtgGraph& g) { return bfs(g).distance; }

std::vector<std::string> bfs_order(const UtgGraph& g) { return bfs(g).order; }

std::string closest_state_for_element(const UtgGraph& g, const std::string& feature) {
  const auto dist = bfs_distances(g);
  std::optional<std::pair<std::size_t, std::string>> best;
  for (const auto& [sid, state] : g.nodes) {
    const auto it = dist.find(sid);
    if (it == dist.end() || !device::contains_exact(state, feature)) continue;
    std::pair<std::size_t, std::string> key{it->second, sid};
    if (!best || key < *best) best = key;
  }
  if (!best) throw Error(ErrorKind::ElementAbsent, "no explored state contains \"" + feature + "\"");
  return best->second;
}

std::string element_summary_prompt(const UiState& from, const std::string& feature, const UiState& reached,
                                   bool changed) {
  std::ostringstream out;
  out << templates::kElementSummaryIntro << "\n\n";
  out << "Element: \"" << feature << "\" on screen " << from.activity_name << " (state " << from.state_id << ").\n\n";
  if (changed) out << "Screen reached after interacting with the element:\n";
  else out << "Interacting with the element did not change the screen:\n";
  out << device::encode_state_text(reached) << '\n';
  out << templates::kElementSummaryAsk << '\n';
  return out.str();
}

std::string state_summary_prompt(const UiState& state) {
  std::ostringstream out;
  out << templates::kStateSummaryIntro << "\n\n" << device::encode_state_text(state) << '\n'
      << templates::kStateSummaryAsk << '\n';
  return out.str();
}

FunctionalityTable synthesize_functionality(const UtgGraph& g, llm::LlmGateway& gateway, Clock& clock,
                                            std::vector<llm::LlmExchange>* log) {
  if (!g.nodes.count(g.origin)) throw Error(ErrorKind::InvariantViolation, "graph has no origin node");
  std::vector<llm::LlmExchange> local;
  const BfsTree tree = bfs(g);
  const UiState& origin = g.nodes.at(g.origin);
  FunctionalityTable table;
  table.origin = g.origin;
  table.origin_activity = origin.activity_name;
  for (const UiElement* e : device::canonical_elements(origin)) {
    if (!device::is_interactable(*e)) continue;
    FunctionalityEntry entry;
    entry.feature = device::feature_for(origin, *e);
    const std::string at = closest_state_for_element(g, entry.feature);

    std::vector<const Edge*> chain;
    for (std::string s = at; tree.parent.count(s); s = tree.parent.at(s)->from) chain.push_back(tree.parent.at(s));
    std::reverse(chain.begin(), chain.end());
    entry.ui_states.push_back(g.origin);
    for (const Edge* edge : chain) {
      entry.ui_elements.push_back(edge->action.feature.value_or(""));
      entry.ui_states.push_back(edge->to);
    }

    const Edge* own = nullptr;
    for (const auto& edge : g.edges)
      if (edge.from == at && edge.action.feature == entry.feature) {
        own = &edge;
        break;
      }
    const UiState& here = g.nodes.at(at);
    const bool changed = own != nullptr && own->to != at;
    if (own != nullptr) {
      entry.ui_elements.push_back(entry.feature);
      entry.ui_states.push_back(own->to);
    }
    const UiState& reached = changed ? g.nodes.at(own->to) : here;
    try {
      entry.synthesized_functionality =
          llm::request_text(gateway, element_summary_prompt(here, entry.feature, reached, changed), clock,
                            sink(log, local));
    } catch (const Error& err) {
      entry.available = false;
      entry.error = err.what();
    }
    table.entries.push_back(std::move(entry));
  }
  return table;
}

UiFunctionTable synthesize_ui_functions(const UtgGraph& g, llm::LlmGateway& gateway, Clock& clock,
                                        std::vector<llm::LlmExchange>* log) {
  if (g.nodes.empty()) throw Error(ErrorKind::InvariantViolation, "graph has no nodes");
  std::vector<llm::LlmExchange> local;
  UiFunctionTable table;
  for (const auto& sid : bfs_order(g)) {
    const UiState& s = g.nodes.at(sid);
    UiFunctionEntry entry{sid, s.activity_name, {}, true, {}};
    try {
      entry.description = llm::request_text(gateway, state_summary_prompt(s), clock, sink(log, local));
    } catch (const Error& err) {
      entry.available = false;
      entry.error = err.what();
    }
    table.entries.push_back(std::move(entry));
  }
  return table;
}

nlohmann::json to_json(const UtgGraph& g) {
  nlohmann::json j = {{"origin", g.origin},
                      {"budget_exhausted", g.budget_exhausted},
                      {"commands_used", g.commands_used}};
  j["nodes"] = nlohmann::json::array();
  for (const auto& [sid, state] : g.nodes) {
    auto path = nlohmann::json::array();
    for (const auto& c : g.paths.at(sid)) path.push_back(command_json(c));
    j["nodes"].push_back({{"state", device::to_json(state)}, {"path", path}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) j["edges"].push_back({{"from", e.from}, {"action", command_json(e.action)}, {"to", e.to}});
  j["crashes"] = nlohmann::json::array();
  for (const auto& c : g.crashes)
    j["crashes"].push_back({{"from", c.from}, {"action", command_json(c.action)}, {"crash", device::to_json(c.crash)}});
  return j;
}

UtgGraph graph_from_json(const nlohmann::json& j) {
  try {
    UtgGraph g;
    g.origin = j.at("origin").get<std::string>();
    g.budget_exhausted = j.value("budget_exhausted", false);
    g.commands_used = j.value("commands_used", std::size_t{0});
    for (const auto& n : j.at("nodes")) {
      UiState s = device::state_from_json(n.at("state"));
      std::vector<ActionCommand> path;
      for (const auto& c : n.value("path", nlohmann::json::array())) path.push_back(command_from(c));
      g.paths[s.state_id] = std::move(path);
      g.nodes.emplace(s.state_id, std::move(s));
    }
    for (const auto& e : j.at("edges")) {
      Edge edge{e.at("from").get<std::string>(), command_from(e.at("action")), e.at("to").get<std::string>()};
      if (!g.nodes.count(edge.from) || !g.nodes.count(edge.to))
        throw Error(ErrorKind::FormatError, "edge endpoint missing from node set");
      g.edges.push_back(std::move(edge));
    }
    for (const auto& c : j.value("crashes", nlohmann::json::array())) {
      const auto& cj = c.at("crash");
      g.crashes.push_back({c.at("from").get<std::string>(), command_from(c.at("action")),
                           {cj.at("exception_type").get<std::string>(), cj.value("message", std::string()),
                            cj.value("raised_in_activity", std::string())}});
    }
    if (!g.nodes.count(g.origin)) throw Error(ErrorKind::FormatError, "origin missing from node set");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("graph document: ") + e.what());
  }
}

nlohmann::json to_json(const Knowledge& k) {
  nlohmann::json f = {{"origin", k.functionality.origin},
                      {"origin_activity", k.functionality.origin_activity},
                      {"entries", nlohmann::json::array()}};
  for (const auto& e : k.functionality.entries) {
    nlohmann::json ej = {{"feature", e.feature},
                         {"synthesized_functionality", e.synthesized_functionality},
                         {"ui_states", e.ui_states},
                         {"ui_elements", e.ui_elements},
                         {"available", e.available}};
    if (!e.error.empty()) ej["error"] = e.error;
    f["entries"].push_back(ej);
  }
  auto u = nlohmann::json::array();
  for (const auto& e : k.ui_functions.entries) {
    nlohmann::json ej = {{"state_id", e.state_id}, {"activity", e.activity}, {"description", e.description},
                         {"available", e.available}};
    if (!e.error.empty()) ej["error"] = e.error;
    u.push_back(ej);
  }
  return {{"functionality", f}, {"ui_functions", u}};
}

Knowledge knowledge_from_json(const nlohmann::json& j) {
  try {
    Knowledge k;
    const auto& f = j.at("functionality");
    k.functionality.origin = f.at("origin").get<std::string>();
    k.functionality.origin_activity = f.value("origin_activity", std::string());
    for (const auto& e : f.at("entries")) {
      k.functionality.entries.push_back({e.at("feature").get<std::string>(),
                                         e.value("synthesized_functionality", std::string()),
                                         e.value("ui_states", std::vector<std::string>{}),
                                         e.value("ui_elements", std::vector<std::string>{}),
                                         e.value("available", true), e.value("error", std::string())});
    }
    for (const auto& e : j.at("ui_functions")) {
      k.ui_functions.entries.push_back({e.at("state_id").get<std::string>(), e.value("activity", std::string()),
                                        e.value("description", std::string()), e.value("available", true),
                                        e.value("error", std::string())});
    }
    return k;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("knowledge document: ") + e.what());
  }
}

std::string cache_key(const std::string& app_id, const std::string& origin_state_id) {
  return app_id + "-" + origin_state_id + ".json";
}

}  // namespace crashrepro::utg
