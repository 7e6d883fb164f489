#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashrepro/replay.hpp"
#include "crashrepro/s2r.hpp"

namespace crashrepro::eval {

struct Dimension {
  std::size_t matched = 0;
  std::size_t total = 0;

  /// Absent when the gold script never has this field.
  std::optional<double> accuracy() const;
  friend bool operator==(const Dimension&, const Dimension&) = default;
};

struct ExtractionScore {
  Dimension step, action, component, input, direction;

  friend bool operator==(const ExtractionScore&, const ExtractionScore&) = default;
};

/// Gold steps are the denominators throughout. Steps are aligned by a
/// longest common subsequence over (action, normalized component). Gold and
/// predicted leftovers with equal keys are paired as misplaced. A gold step
/// counts for `step` when it is aligned, no misplaced pair crosses its
/// alignment, and (when both sides record one) it comes from the same
/// sentence. Entity fields are compared on aligned pairs, then misplaced
/// pairs, then remaining leftovers zipped in order. Components and values
/// compare case-insensitively after whitespace collapse.
ExtractionScore score_extraction(const s2r::S2RScript& predicted, const s2r::S2RScript& gold);
/// Sums the counts (micro average).
ExtractionScore combine(const std::vector<ExtractionScore>& scores);

/// "%.2f%%" per dimension, "n/a" when absent, single spaces between, in the
/// order Step Action Component Input Direction.
std::string format_accuracy_row(const ExtractionScore& score);

struct RunSummary {
  std::string name;
  replay::Outcome outcome = replay::Outcome::BudgetExhausted;
  double elapsed = 0.0;
  double llm_time = 0.0;
  std::size_t steps_executed = 0;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

RunSummary summarize(const std::string& name, const replay::ReplayResult& r);

struct ReplayAggregate {
  std::size_t nsr = 0;
  std::size_t attempted = 0;
  /// Means over reproduced runs only.
  std::optional<double> avg_time;
  std::optional<double> avg_llm_time;

  friend bool operator==(const ReplayAggregate&, const ReplayAggregate&) = default;
};

ReplayAggregate aggregate_replays(const std::vector<RunSummary>& runs);
ReplayAggregate aggregate_replays(const std::vector<replay::ReplayResult>& results);

struct ExtractionRow {
  std::string name;
  ExtractionScore score;

  friend bool operator==(const ExtractionRow&, const ExtractionRow&) = default;
};

struct EvalReport {
  std::vector<ExtractionRow> extraction;
  std::vector<RunSummary> runs;
  /// Free-form provenance: config fingerprint, input hashes.
  nlohmann::json meta = nlohmann::json::object();

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

std::string emit_report_text(const EvalReport& report);
nlohmann::json emit_report_json(const EvalReport& report);
EvalReport parse_report_json(const nlohmann::json& j);

}  // namespace crashrepro::eval
