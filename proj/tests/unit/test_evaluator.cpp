#include <doctest.h>

#include <filesystem>

#include "crashrepro/evaluator.hpp"
#include "crashrepro/text.hpp"
#include "support.hpp"

using namespace crashrepro;
using namespace crashrepro::eval;
using s2r::ActionType;

namespace {

s2r::S2RStep step(ActionType a, std::optional<std::string> c = {}, std::optional<std::string> v = {},
                  std::optional<int> sentence = {}) {
  s2r::S2RStep s;
  s.entity.action = a;
  s.entity.component = std::move(c);
  s.entity.value = std::move(v);
  s.entity.generate_on_replay = a == ActionType::Input && !s.entity.value;
  s.sentence_index = sentence;
  return s;
}

s2r::S2RScript script(std::vector<s2r::S2RStep> steps) { return {std::move(steps), ""}; }

s2r::S2RScript load_gold(const std::string& file) {
  return s2r::script_from_json(nlohmann::json::parse(text::read_file(testing::data_path("gold/" + file))));
}

}  // namespace

TEST_CASE("gold against itself scores one") {
  for (const auto& entry : std::filesystem::directory_iterator(testing::data_path("gold"))) {
    const auto g = s2r::script_from_json(nlohmann::json::parse(text::read_file(entry.path().string())));
    const auto s = score_extraction(g, g);
    CAPTURE(entry.path().string());
    for (const Dimension* d : {&s.step, &s.action, &s.component, &s.input, &s.direction}) {
      if (d->total == 0) CHECK_FALSE(d->accuracy().has_value());
      else CHECK(*d->accuracy() == 1.0);
    }
  }
}

TEST_CASE("partial credit on the category search example") {
  // Gold has three steps; the prediction finds the first two and drops the
  // typed value. Hand count: step 2/3, action 2/3, component 2/3, input 0/1.
  const auto s = score_extraction(load_gold("category_search.predicted.json"), load_gold("category_search.json"));
  CHECK(s.step == Dimension{2, 3});
  CHECK(s.action == Dimension{2, 3});
  CHECK(s.component == Dimension{2, 3});
  CHECK(s.input == Dimension{0, 1});
  CHECK(s.direction == Dimension{0, 0});
  CHECK(format_accuracy_row(s) == "66.67% 66.67% 66.67% 0.00% n/a");
}

TEST_CASE("swapped steps lose step credit only") {
  const auto gold = script({step(ActionType::Tap, "Settings"), step(ActionType::Tap, "About")});
  const auto pred = script({step(ActionType::Tap, "About"), step(ActionType::Tap, "Settings")});
  const auto s = score_extraction(pred, gold);
  CHECK(s.step == Dimension{0, 2});
  CHECK(s.action == Dimension{2, 2});
  CHECK(s.component == Dimension{2, 2});
}

TEST_CASE("matching is case and space insensitive") {
  const auto gold = script({step(ActionType::Input, "Search  Term", "Abc")});
  const auto pred = script({step(ActionType::Input, "search term", "abc")});
  const auto s = score_extraction(pred, gold);
  CHECK(s.step == Dimension{1, 1});
  CHECK(s.input == Dimension{1, 1});
}

TEST_CASE("sentence indices must agree when both are known") {
  const auto gold = script({step(ActionType::Tap, "OK", {}, 2)});
  CHECK(score_extraction(script({step(ActionType::Tap, "OK", {}, 3)}), gold).step == Dimension{0, 1});
  CHECK(score_extraction(script({step(ActionType::Tap, "OK")}), gold).step == Dimension{1, 1});
}

TEST_CASE("leftovers are compared field by field") {
  const auto gold = script({step(ActionType::Tap, "Settings"), step(ActionType::Rotate)});
  const auto pred = script({step(ActionType::Tap, "Preferences"), step(ActionType::Rotate)});
  const auto s = score_extraction(pred, gold);
  CHECK(s.step == Dimension{1, 2});
  CHECK(s.action == Dimension{2, 2});
  CHECK(s.component == Dimension{0, 1});
}

TEST_CASE("empty prediction") {
  const auto s = score_extraction(script({}), load_gold("librenews.json"));
  CHECK(s.step == Dimension{0, 4});
  CHECK(s.action == Dimension{0, 4});
}

TEST_CASE("row formatting") {
  ExtractionScore s;
  s.step = {8785, 10000};
  s.action = {6949, 10000};
  s.component = {3387, 10000};
  s.input = {7093, 10000};
  s.direction = {8291, 10000};
  CHECK(format_accuracy_row(s) == "87.85% 69.49% 33.87% 70.93% 82.91%");
  CHECK(format_accuracy_row(ExtractionScore{}) == "n/a n/a n/a n/a n/a");
  const auto both = combine({s, s});
  CHECK(both.step == Dimension{17570, 20000});
}

TEST_CASE("replay aggregate") {
  std::vector<RunSummary> runs{{"a", replay::Outcome::Reproduced, 2.0, 1.0, 3},
                               {"b", replay::Outcome::BudgetExhausted, 10.0, 5.0, 9},
                               {"c", replay::Outcome::Reproduced, 4.0, 2.0, 5}};
  const auto agg = aggregate_replays(runs);
  CHECK(agg.nsr == 2);
  CHECK(agg.attempted == 3);
  CHECK(*agg.avg_time == doctest::Approx(3.0));
  CHECK(*agg.avg_llm_time == doctest::Approx(1.5));
  const auto none = aggregate_replays(std::vector<RunSummary>{});
  CHECK(none.nsr == 0);
  CHECK_FALSE(none.avg_time.has_value());
}

TEST_CASE("report text and json") {
  EvalReport r;
  r.extraction.push_back({"one", score_extraction(load_gold("librenews.json"), load_gold("librenews.json"))});
  r.runs.push_back({"one", replay::Outcome::Reproduced, 1.6, 1.0, 3});
  r.meta = {{"config", "abc"}};
  const std::string txt = emit_report_text(r);
  CHECK(txt.rfind("S2R extraction accuracy\n", 0) == 0);
  CHECK(txt.find("one: 100.00% 100.00% 100.00% 100.00% n/a") != std::string::npos);
  CHECK(txt.find("Overall: 100.00%") != std::string::npos);
  CHECK(parse_report_json(emit_report_json(r)) == r);

  const std::string empty = emit_report_text(EvalReport{});
  CHECK(empty.find("Report: Step Action Component Input Direction") != std::string::npos);
  CHECK(empty.find("NSR Attempted Average-Time Average-LLM-Time") != std::string::npos);
}
