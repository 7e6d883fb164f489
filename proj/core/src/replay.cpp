#include "crashrepro/replay.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "crashrepro/text.hpp"
#include "prompt_templates.hpp"

namespace crashrepro::replay {

namespace {

double ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::optional<StuckSignal> no_match_rule(const std::vector<HistoryEntry>& h, std::size_t limit) {
  const auto& last = h.back();
  if (!last.status || last.status->failure != device::Failure::NoMatch || !last.command->feature) return std::nullopt;
  std::size_t seen = 0;
  for (const auto& e : h) {
    if (e.status && e.status->failure == device::Failure::NoMatch && e.state_id == last.state_id &&
        e.command->feature == last.command->feature)
      ++seen;
  }
  if (seen >= limit) return StuckSignal{StuckReason::NoMatchRepeated, last.state_id};
  return std::nullopt;
}

std::optional<StuckSignal> revisit_rule(const std::vector<HistoryEntry>& h, std::size_t limit) {
  std::set<std::string> known;
  std::map<std::string, std::size_t> since_discovery;
  std::string last;
  std::optional<StuckSignal> signal;
  auto visit = [&](const std::string& s, bool newest) {
    if (known.insert(s).second) since_discovery.clear();
    const std::size_t count = ++since_discovery[s];
    if (newest && count >= limit) signal = StuckSignal{StuckReason::StateRevisitedWithoutProgress, s};
  };
  for (std::size_t i = 0; i < h.size(); ++i) {
    const bool newest = i + 1 == h.size();
    if (h[i].state_id != last) {
      last = h[i].state_id;
      visit(last, newest);
    }
    if (h[i].status && h[i].status->new_state.state_id != last) {
      last = h[i].status->new_state.state_id;
      visit(last, newest);
    }
  }
  return signal;
}

std::optional<StuckSignal> no_output_rule(const std::vector<HistoryEntry>& h, std::size_t limit) {
  const auto& last = h.back();
  if (!last.no_output()) return std::nullopt;
  std::size_t seen = 0;
  for (const auto& e : h)
    if (e.no_output() && e.state_id == last.state_id) ++seen;
  if (seen >= limit) return StuckSignal{StuckReason::LlmNoActionableOutput, last.state_id};
  return std::nullopt;
}

double total_latency(const std::vector<llm::LlmExchange>& exchanges) {
  double t = 0;
  for (const auto& e : exchanges) t += e.latency;
  return t;
}

nlohmann::json exploration_json(const utg::UtgGraph* g, const utg::Knowledge& k, bool cached) {
  nlohmann::json j = {{"origin", k.functionality.origin}, {"cached", cached}};
  if (g != nullptr) {
    j["nodes"] = g->nodes.size();
    j["edges"] = g->edges.size();
    j["commands_used"] = g->commands_used;
    j["budget_exhausted"] = g->budget_exhausted;
    j["probe_crashes"] = g->crashes.size();
  }
  j["knowledge"] = utg::to_json(k);
  return j;
}

}  // namespace

std::string_view to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::Reproduced: return "reproduced";
    case Outcome::BudgetExhausted: return "budget_exhausted";
    case Outcome::NoActionableOutput: return "no_actionable_output";
    case Outcome::DeviceFailure: return "device_failure";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  for (Outcome o : {Outcome::Reproduced, Outcome::BudgetExhausted, Outcome::NoActionableOutput, Outcome::DeviceFailure})
    if (to_string(o) == s) return o;
  return std::nullopt;
}

std::string_view to_string(StuckReason r) noexcept {
  switch (r) {
    case StuckReason::NoMatchRepeated: return "no_match_repeated";
    case StuckReason::StateRevisitedWithoutProgress: return "state_revisited_without_progress";
    case StuckReason::LlmNoActionableOutput: return "llm_no_actionable_output";
  }
  return "?";
}

std::optional<StuckSignal> detect_stuck(const std::vector<HistoryEntry>& history, const StuckThresholds& t) {
  if (history.empty()) return std::nullopt;
  if (auto s = no_match_rule(history, t.no_match_repeats)) return s;
  if (auto s = no_output_rule(history, t.no_output_repeats)) return s;
  return revisit_rule(history, t.revisits);
}

std::string render_knowledge(const utg::Knowledge& k) {
  std::ostringstream out;
  const auto& f = k.functionality;
  out << "Functionality of the elements on " << f.origin_activity << " (state " << f.origin << "):\n";
  std::size_t n = 0;
  for (const auto& e : f.entries) {
    out << ++n << ". \"" << e.feature << "\": ";
    if (!e.available) {
      out << "(summary unavailable)";
    } else {
      out << text::trim(e.synthesized_functionality);
    }
    if (!e.ui_elements.empty()) {
      out << " Path: " << join(e.ui_states, " -> ") << " via ";
      std::vector<std::string> quoted;
      for (const auto& el : e.ui_elements) quoted.push_back("\"" + el + "\"");
      out << join(quoted, ", ") << '.';
    }
    out << '\n';
  }
  out << "UI function table:\n";
  for (const auto& u : k.ui_functions.entries) {
    out << "- " << u.state_id << " (" << u.activity << "): "
        << (u.available ? std::string(text::trim(u.description)) : "(description unavailable)") << '\n';
  }
  return out.str();
}

std::string build_replay_prompt(const std::string& report, const s2r::S2RScript& script,
                                const std::string& encoded_ui, const std::vector<utg::Knowledge>& knowledge,
                                const std::vector<std::string>& feedback) {
  bool generate = false;
  for (const auto& step : script.steps) generate = generate || step.entity.generate_on_replay;

  std::ostringstream out;
  out << templates::kReplayTaskHeader << '\n' << templates::kReplayTask << '\n';
  if (generate) out << templates::kReplayGenerateInput << '\n';
  out << '\n' << templates::kReplayReportHeader << '\n' << text::trim(report) << "\n\n";
  out << templates::kReplayEntitiesHeader << '\n' << s2r::format_script(script);
  if (script.steps.empty()) out << "(none extracted)\n";
  out << '\n' << templates::kReplayScreenHeader << '\n' << encoded_ui;
  if (!encoded_ui.empty() && encoded_ui.back() != '\n') out << '\n';
  if (!knowledge.empty()) {
    out << '\n' << templates::kReplayKnowledgeHeader << '\n';
    for (const auto& k : knowledge) out << render_knowledge(k);
  }
  if (!feedback.empty()) {
    out << '\n' << templates::kReplayHistoryHeader << '\n';
    for (const auto& line : feedback) out << "- " << line << '\n';
  }
  out << '\n' << templates::kReplayOutputHeader << '\n' << templates::kReplayOutput << '\n';
  return out.str();
}

std::string render_feedback(const ActionCommand& cmd, const device::ExecStatus& status,
                            const std::string& previous_state_id) {
  if (status.crash) return {};
  std::string out = "Action " + describe(cmd);
  const bool changed = status.new_state.state_id != previous_state_id;
  if (status.ok) {
    out += " executed successfully.";
  } else if (status.failure == device::Failure::NoMatch) {
    out += " failed: no element matches \"" + cmd.feature.value_or("") + "\" on the current screen.";
    if (!status.missed_tiers.empty()) out += " Tried " + join(status.missed_tiers, "; ") + ".";
  } else {
    out += " failed: " + status.detail + ".";
  }
  if (changed)
    out += " The screen changed to " + status.new_state.activity_name + " (state " + status.new_state.state_id + ").";
  else
    out += " The screen did not change.";
  return out;
}

ReplayResult run(const std::string& report, const s2r::S2RScript& script, device::Device& device,
                 llm::LlmGateway& gateway, const ReplayOptions& options) {
  std::shared_ptr<Clock> clock = options.clock ? options.clock : std::make_shared<SteadyClock>();
  const double start = clock->now();
  const double deadline = start + options.budget;
  ReplayResult result;

  auto finish = [&](Outcome o, std::string detail) {
    result.outcome = o;
    result.detail = std::move(detail);
    result.elapsed = clock->now() - start;
    return result;
  };

  device::UiState state;
  try {
    state = device.capture_state();
  } catch (const Error& e) {
    return finish(Outcome::DeviceFailure, e.what());
  }

  std::vector<utg::Knowledge> knowledge;
  std::set<std::string> explored;
  std::deque<std::string> feedback;
  std::vector<ActionCommand> path;
  std::size_t no_output_run = 0;

  auto remember = [&](std::string line) {
    if (line.empty()) return;
    feedback.push_back(std::move(line));
    while (feedback.size() > options.feedback_window) feedback.pop_front();
  };

  for (std::size_t iteration = 1;; ++iteration) {
    if (clock->now() >= deadline) return finish(Outcome::BudgetExhausted, "time budget spent");

    IterationRecord rec;
    rec.iteration = iteration;
    rec.started_at = clock->now() - start;
    rec.state_id = state.state_id;
    rec.activity = state.activity_name;
    rec.tier = knowledge.empty() ? 1 : 2;
    const std::string prompt =
        build_replay_prompt(report, script, device::encode_state_text(state), knowledge,
                            std::vector<std::string>(feedback.begin(), feedback.end()));

    llm::ActionRequest request;
    try {
      request = llm::request_actions(gateway, prompt, *clock, deadline);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BudgetExceeded) return finish(Outcome::BudgetExhausted, "time budget spent");
      throw;
    }
    rec.exchanges = request.exchanges;
    result.llm_time += total_latency(request.exchanges);

    std::optional<StuckSignal> signal;
    auto close = [&](Outcome o, std::string detail) {
      rec.stuck = signal;
      result.trace.push_back(rec);
      return finish(o, std::move(detail));
    };

    if (!request.commands) {
      ++no_output_run;
      result.history.push_back({state.state_id, std::nullopt, std::nullopt});
      const std::string line = "Your previous answer contained no usable JSON action array.";
      rec.feedback.push_back(line);
      remember(line);
      signal = detect_stuck(result.history, options.stuck);
    } else {
      no_output_run = 0;
      for (const auto& cmd : *request.commands) {
        if (clock->now() >= deadline) return close(Outcome::BudgetExhausted, "time budget spent");
        device::ExecStatus status;
        try {
          status = device.execute(cmd);
        } catch (const Error& e) {
          return close(Outcome::DeviceFailure, e.what());
        }
        ++result.steps_executed;
        rec.commands.push_back(cmd);
        rec.statuses.push_back(status);
        result.history.push_back({state.state_id, cmd, status});
        if (status.crash) {
          result.crash = status.crash;
          return close(Outcome::Reproduced, "crash observed: " + status.crash->exception_type);
        }
        const std::string line = render_feedback(cmd, status, state.state_id);
        rec.feedback.push_back(line);
        remember(line);
        if (cmd.action == Verb::Restart) path.clear();
        else if (status.ok) path.push_back(cmd);
        state = status.new_state;
        if (auto s = detect_stuck(result.history, options.stuck)) signal = s;
        if (!status.ok) break;
      }
    }
    rec.stuck = signal;

    if (signal && options.escalation && signal->state == state.state_id && !explored.count(state.state_id)) {
      explored.insert(state.state_id);
      std::optional<utg::Knowledge> k;
      if (options.knowledge_lookup) k = options.knowledge_lookup(state.state_id);
      if (k) {
        rec.exploration = exploration_json(nullptr, *k, true);
      } else {
        utg::ExploreOptions eo = options.explore;
        eo.origin_path = path;
        try {
          const utg::UtgGraph g = utg::explore(device, state, eo);
          utg::Knowledge fresh;
          fresh.functionality = utg::synthesize_functionality(g, gateway, *clock, &rec.summary_exchanges);
          fresh.ui_functions = utg::synthesize_ui_functions(g, gateway, *clock, &rec.summary_exchanges);
          result.llm_time += total_latency(rec.summary_exchanges);
          rec.exploration = exploration_json(&g, fresh, false);
          if (options.knowledge_store) options.knowledge_store(g, fresh);
          k = std::move(fresh);
          state = device.capture_state();
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::DeviceUnavailable) return close(Outcome::DeviceFailure, e.what());
          throw;
        }
      }
      knowledge.push_back(std::move(*k));
      no_output_run = 0;
    }
    result.trace.push_back(std::move(rec));

    if (no_output_run >= options.stuck.no_output_repeats)
      return finish(Outcome::NoActionableOutput, "the model produced no executable actions");
  }
}

nlohmann::json to_json(const IterationRecord& r) {
  nlohmann::json j = {{"iteration", r.iteration},
                      {"started_at", ms(r.started_at)},
                      {"state_id", r.state_id},
                      {"activity", r.activity},
                      {"tier", r.tier}};
  auto exchange_list = [](const std::vector<llm::LlmExchange>& xs) {
    auto arr = nlohmann::json::array();
    for (const auto& x : xs) {
      auto xj = llm::to_json(x);
      xj["latency"] = ms(x.latency);
      arr.push_back(xj);
    }
    return arr;
  };
  j["exchanges"] = exchange_list(r.exchanges);
  j["commands"] = nlohmann::json::array();
  for (const auto& c : r.commands) j["commands"].push_back(to_json(c));
  j["statuses"] = nlohmann::json::array();
  for (const auto& s : r.statuses) j["statuses"].push_back(device::to_json(s));
  j["feedback"] = r.feedback;
  if (r.stuck) j["stuck"] = {{"reason", std::string(to_string(r.stuck->reason))}, {"state", r.stuck->state}};
  if (r.exploration) {
    j["exploration"] = *r.exploration;
    j["exploration"]["exchanges"] = exchange_list(r.summary_exchanges);
  }
  return j;
}

nlohmann::json summary_json(const ReplayResult& r) {
  nlohmann::json j = {{"outcome", std::string(to_string(r.outcome))},
                      {"detail", r.detail},
                      {"elapsed", ms(r.elapsed)},
                      {"llm_time", ms(r.llm_time)},
                      {"steps_executed", r.steps_executed},
                      {"iterations", r.trace.size()}};
  j["crash"] = r.crash ? device::to_json(*r.crash) : nlohmann::json();
  return j;
}

std::string trace_jsonl(const ReplayResult& result) {
  std::string out;
  for (const auto& rec : result.trace) out += to_json(rec).dump() + '\n';
  out += nlohmann::json{{"summary", summary_json(result)}}.dump() + '\n';
  return out;
}

}  // namespace crashrepro::replay
