#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashrepro/clock.hpp"
#include "crashrepro/device.hpp"
#include "crashrepro/llm_gateway.hpp"

namespace crashrepro::utg {

struct Edge {
  std::string from;
  ActionCommand action;
  std::string to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct ProbeCrash {
  std::string from;
  ActionCommand action;
  device::CrashInfo crash;
};

/// UI transition graph rooted at the page exploration started from.
struct UtgGraph {
  std::string origin;
  std::map<std::string, device::UiState> nodes;
  std::vector<Edge> edges;
  /// Commands from that reached each node from the origin.
  std::map<std::string, std::vector<ActionCommand>> paths;
  std::vector<ProbeCrash> crashes;
  bool budget_exhausted = false;
  std::size_t commands_used = 0;
};

struct ExploreOptions {
  int depth = 1;
  std::size_t action_budget = 200;
  /// Typed into editable fields while probing.
  std::string placeholder = "test";
  /// Commands that lead from a fresh app start to the origin page; replayed
  /// after each restart to get back there.
  std::vector<ActionCommand> origin_path;
  /// When set, probe order within a page is shuffled with this seed.
  std::optional<unsigned> seed;
};

/// The command used to probe an element: editable -> set_text(placeholder),
/// clickable -> click, long-clickable -> long_click, scrollable -> scroll down.
ActionCommand probe_command(const device::UiState& state, const device::UiElement& element,
                            const std::string& placeholder);

/// Triggers every interactable element of the origin page, and of pages found
/// below it up to `depth`, recording each successful (state, action, state)
/// step. Before a probe the device is put back on the probed page through
/// restart and the recorded path when it is not already there. Stops, with
/// budget_exhausted set, before exceeding the action budget. Leaves the
/// device on the origin page.
UtgGraph explore(device::Device& device, const device::UiState& origin, const ExploreOptions& options = {});

/// Shortest-path distance of each node from the origin.
std::map<std::string, std::size_t> bfs_distances(const UtgGraph& g);
/// The node containing `feature` (exact tiers or "@id") closest to the
/// origin; ties go to the smaller state id. Throws ElementAbsent.
std::string closest_state_for_element(const UtgGraph& g, const std::string& feature);

struct FunctionalityEntry {
  std::string feature;
  std::string synthesized_functionality;
  std::vector<std::string> ui_states;
  std::vector<std::string> ui_elements;
  bool available = true;
  std::string error;
};

struct FunctionalityTable {
  std::string origin;
  std::string origin_activity;
  std::vector<FunctionalityEntry> entries;
};

struct UiFunctionEntry {
  std::string state_id;
  std::string activity;
  std::string description;
  bool available = true;
  std::string error;
};

struct UiFunctionTable {
  std::vector<UiFunctionEntry> entries;  // BFS order from the origin
};

struct Knowledge {
  FunctionalityTable functionality;
  UiFunctionTable ui_functions;
};

/// One summary request per interactable element of the origin page, in
/// screen order. A failing request marks only its own entry unavailable.
FunctionalityTable synthesize_functionality(const UtgGraph& g, llm::LlmGateway& gateway, Clock& clock,
                                            std::vector<llm::LlmExchange>* log = nullptr);
UiFunctionTable synthesize_ui_functions(const UtgGraph& g, llm::LlmGateway& gateway, Clock& clock,
                                        std::vector<llm::LlmExchange>* log = nullptr);
/// Nodes in BFS order from the origin, ties by state id.
std::vector<std::string> bfs_order(const UtgGraph& g);

std::string element_summary_prompt(const device::UiState& from, const std::string& feature,
                                   const device::UiState& reached, bool changed);
std::string state_summary_prompt(const device::UiState& state);

nlohmann::json to_json(const UtgGraph& g);
UtgGraph graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Knowledge& k);
Knowledge knowledge_from_json(const nlohmann::json& j);
/// Cache file name for an exploration: "<app_id>-<origin state id>.json".
std::string cache_key(const std::string& app_id, const std::string& origin_state_id);

}  // namespace crashrepro::utg
