#include "crashrepro/evaluator.hpp"

#include <cstdio>
#include <sstream>
#include <tuple>

#include "crashrepro/text.hpp"

namespace crashrepro::eval {

namespace {

using Key = std::pair<std::string, std::string>;

std::string norm(const std::optional<std::string>& s) { return s ? text::normalize_phrase(*s) : std::string(); }

Key key_of(const s2r::S2RStep& s) { return {std::string(s2r::token(s.entity.action)), norm(s.entity.component)}; }

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;  // (gold, predicted)

Pairs lcs(const std::vector<Key>& g, const std::vector<Key>& p) {
  const std::size_t n = g.size(), m = p.size();
  std::vector<std::vector<std::size_t>> dp(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      dp[i][j] = g[i] == p[j] ? dp[i + 1][j + 1] + 1 : std::max(dp[i + 1][j], dp[i][j + 1]);
  Pairs out;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (g[i] == p[j]) {
      out.emplace_back(i++, j++);
    } else if (dp[i + 1][j] >= dp[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

bool crosses(const std::pair<std::size_t, std::size_t>& a, const std::pair<std::size_t, std::size_t>& b) {
  return (a.first < b.first) != (a.second < b.second);
}

std::string percent(const Dimension& d) {
  const auto acc = d.accuracy();
  if (!acc) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *acc * 100.0);
  return buf;
}

std::string seconds(const std::optional<double>& s) {
  if (!s) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", *s);
  return buf;
}

nlohmann::json dim_json(const Dimension& d) {
  const auto acc = d.accuracy();
  return {{"matched", d.matched}, {"total", d.total}, {"accuracy", acc ? nlohmann::json(*acc) : nlohmann::json()}};
}

Dimension dim_from(const nlohmann::json& j) { return {j.at("matched").get<std::size_t>(), j.at("total").get<std::size_t>()}; }

nlohmann::json score_json(const ExtractionScore& s) {
  return {{"step", dim_json(s.step)},
          {"action", dim_json(s.action)},
          {"component", dim_json(s.component)},
          {"input", dim_json(s.input)},
          {"direction", dim_json(s.direction)}};
}

ExtractionScore score_from(const nlohmann::json& j) {
  return {dim_from(j.at("step")), dim_from(j.at("action")), dim_from(j.at("component")), dim_from(j.at("input")),
          dim_from(j.at("direction"))};
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

std::optional<double> Dimension::accuracy() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(matched) / static_cast<double>(total);
}

ExtractionScore score_extraction(const s2r::S2RScript& predicted, const s2r::S2RScript& gold) {
  std::vector<Key> gk, pk;
  for (const auto& s : gold.steps) gk.push_back(key_of(s));
  for (const auto& s : predicted.steps) pk.push_back(key_of(s));

  const Pairs aligned = lcs(gk, pk);
  std::vector<bool> g_used(gk.size(), false), p_used(pk.size(), false);
  for (const auto& [g, p] : aligned) g_used[g] = p_used[p] = true;

  Pairs misplaced;
  for (std::size_t g = 0; g < gk.size(); ++g) {
    if (g_used[g]) continue;
    for (std::size_t p = 0; p < pk.size(); ++p) {
      if (!p_used[p] && pk[p] == gk[g]) {
        misplaced.emplace_back(g, p);
        g_used[g] = p_used[p] = true;
        break;
      }
    }
  }

  ExtractionScore score;
  score.step.total = gold.steps.size();
  for (const auto& pair : aligned) {
    bool ok = true;
    for (const auto& m : misplaced) ok = ok && !crosses(pair, m);
    const auto& gs = gold.steps[pair.first].sentence_index;
    const auto& ps = predicted.steps[pair.second].sentence_index;
    if (gs && ps && *gs != *ps) ok = false;
    if (ok) ++score.step.matched;
  }

  Pairs counterparts = aligned;
  counterparts.insert(counterparts.end(), misplaced.begin(), misplaced.end());
  std::vector<std::size_t> g_rest, p_rest;
  for (std::size_t g = 0; g < gk.size(); ++g)
    if (!g_used[g]) g_rest.push_back(g);
  for (std::size_t p = 0; p < pk.size(); ++p)
    if (!p_used[p]) p_rest.push_back(p);
  for (std::size_t i = 0; i < std::min(g_rest.size(), p_rest.size()); ++i) counterparts.emplace_back(g_rest[i], p_rest[i]);

  std::vector<const s2r::S2REntity*> match(gold.steps.size(), nullptr);
  for (const auto& [g, p] : counterparts) match[g] = &predicted.steps[p].entity;

  for (std::size_t g = 0; g < gold.steps.size(); ++g) {
    const auto& ge = gold.steps[g].entity;
    const s2r::S2REntity* pe = match[g];
    ++score.action.total;
    if (pe && pe->action == ge.action) ++score.action.matched;
    if (ge.component) {
      ++score.component.total;
      if (pe && pe->component && norm(pe->component) == norm(ge.component)) ++score.component.matched;
    }
    if (ge.value) {
      ++score.input.total;
      if (pe && pe->value && norm(pe->value) == norm(ge.value)) ++score.input.matched;
    }
    if (ge.direction) {
      ++score.direction.total;
      if (pe && pe->direction == ge.direction) ++score.direction.matched;
    }
  }
  return score;
}

ExtractionScore combine(const std::vector<ExtractionScore>& scores) {
  ExtractionScore total;
  auto add = [](Dimension& a, const Dimension& b) {
    a.matched += b.matched;
    a.total += b.total;
  };
  for (const auto& s : scores) {
    add(total.step, s.step);
    add(total.action, s.action);
    add(total.component, s.component);
    add(total.input, s.input);
    add(total.direction, s.direction);
  }
  return total;
}

std::string format_accuracy_row(const ExtractionScore& s) {
  return percent(s.step) + " " + percent(s.action) + " " + percent(s.component) + " " + percent(s.input) + " " +
         percent(s.direction);
}

RunSummary summarize(const std::string& name, const replay::ReplayResult& r) {
  return {name, r.outcome, r.elapsed, r.llm_time, r.steps_executed};
}

ReplayAggregate aggregate_replays(const std::vector<RunSummary>& runs) {
  ReplayAggregate a;
  a.attempted = runs.size();
  double time = 0, llm = 0;
  for (const auto& r : runs) {
    if (r.outcome != replay::Outcome::Reproduced) continue;
    ++a.nsr;
    time += r.elapsed;
    llm += r.llm_time;
  }
  if (a.nsr > 0) {
    a.avg_time = time / static_cast<double>(a.nsr);
    a.avg_llm_time = llm / static_cast<double>(a.nsr);
  }
  return a;
}

ReplayAggregate aggregate_replays(const std::vector<replay::ReplayResult>& results) {
  std::vector<RunSummary> runs;
  for (const auto& r : results) runs.push_back(summarize("", r));
  return aggregate_replays(runs);
}

std::string emit_report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "S2R extraction accuracy\n";
  out << "Report: Step Action Component Input Direction\n";
  std::vector<ExtractionScore> all;
  for (const auto& row : report.extraction) {
    out << row.name << ": " << format_accuracy_row(row.score) << '\n';
    all.push_back(row.score);
  }
  if (!report.extraction.empty()) out << "Overall: " << format_accuracy_row(combine(all)) << '\n';

  out << "\nReplay\n";
  out << "Scenario: Outcome Time LLM-Time Steps\n";
  for (const auto& r : report.runs) {
    out << r.name << ": " << replay::to_string(r.outcome) << ' ' << seconds(r.elapsed) << ' ' << seconds(r.llm_time)
        << ' ' << r.steps_executed << '\n';
  }
  out << "NSR Attempted Average-Time Average-LLM-Time\n";
  if (!report.runs.empty()) {
    const auto a = aggregate_replays(report.runs);
    out << a.nsr << ' ' << a.attempted << ' ' << seconds(a.avg_time) << ' ' << seconds(a.avg_llm_time) << '\n';
  }
  return out.str();
}

nlohmann::json emit_report_json(const EvalReport& report) {
  nlohmann::json j;
  j["extraction"] = nlohmann::json::array();
  std::vector<ExtractionScore> all;
  for (const auto& row : report.extraction) {
    j["extraction"].push_back({{"name", row.name}, {"score", score_json(row.score)}});
    all.push_back(row.score);
  }
  j["overall"] = score_json(combine(all));
  j["runs"] = nlohmann::json::array();
  for (const auto& r : report.runs) {
    j["runs"].push_back({{"name", r.name},
                         {"outcome", std::string(replay::to_string(r.outcome))},
                         {"elapsed", r.elapsed},
                         {"llm_time", r.llm_time},
                         {"steps_executed", r.steps_executed}});
  }
  const auto a = aggregate_replays(report.runs);
  j["aggregate"] = {{"nsr", a.nsr},
                    {"attempted", a.attempted},
                    {"avg_time", opt_json(a.avg_time)},
                    {"avg_llm_time", opt_json(a.avg_llm_time)}};
  j["meta"] = report.meta;
  return j;
}

EvalReport parse_report_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    for (const auto& row : j.at("extraction")) r.extraction.push_back({row.at("name").get<std::string>(), score_from(row.at("score"))});
    for (const auto& run : j.at("runs")) {
      const auto outcome = replay::parse_outcome(run.at("outcome").get<std::string>());
      if (!outcome) throw Error(ErrorKind::FormatError, "unknown outcome in report");
      r.runs.push_back({run.at("name").get<std::string>(), *outcome, run.at("elapsed").get<double>(),
                        run.at("llm_time").get<double>(), run.at("steps_executed").get<std::size_t>()});
    }
    r.meta = j.value("meta", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("report document: ") + e.what());
  }
}

}  // namespace crashrepro::eval
