#include <doctest.h>

#include <random>

#include "crashrepro/error.hpp"
#include "crashrepro/s2r.hpp"
#include "generators.hpp"

using namespace crashrepro;
using namespace crashrepro::s2r;

namespace {

S2REntity ent(ActionType a, std::optional<std::string> c = {}, std::optional<std::string> v = {},
              std::optional<Direction> d = {}) {
  S2REntity e;
  e.action = a;
  e.component = std::move(c);
  e.value = std::move(v);
  e.direction = d;
  e.generate_on_replay = a == ActionType::Input && !e.value;
  return e;
}

}  // namespace

TEST_CASE("format_entity renders bracket notation") {
  CHECK(format_entity(ent(ActionType::Tap, "search")) == "[Tap] [search]");
  CHECK(format_entity(ent(ActionType::Input, "search term", "A")) == "[Input] [search term] [A]");
  CHECK(format_entity(ent(ActionType::Rotate)) == "[Rotate]");
  CHECK(format_entity(ent(ActionType::Rotate, {}, {}, Direction::Landscape)) == "[Rotate] [Landscape]");
  CHECK(format_entity(ent(ActionType::Scroll, "list", {}, Direction::Down)) == "[Scroll] [list] [Down]");
  CHECK(format_entity(ent(ActionType::LongTap, "category A")) == "[Long-tap] [category A]");
}

TEST_CASE("validate rejects broken entities") {
  CHECK_THROWS_AS(validate(ent(ActionType::Tap)), Error);
  CHECK_FALSE(is_valid(ent(ActionType::Tap, "a", "b")));
  CHECK_FALSE(is_valid(ent(ActionType::Tap, " padded")));
  CHECK_FALSE(is_valid(ent(ActionType::Tap, "a]b")));
  CHECK_FALSE(is_valid(ent(ActionType::Rotate, {}, {}, Direction::Up)));
  CHECK_FALSE(is_valid(ent(ActionType::Scroll, {}, {}, Direction::Portrait)));
  CHECK_FALSE(is_valid(ent(ActionType::Back, "x")));
  CHECK_FALSE(is_valid(ent(ActionType::Scroll, "down")));
  S2REntity input = ent(ActionType::Input, "field", "v");
  input.generate_on_replay = true;
  CHECK_FALSE(is_valid(input));
  try {
    format_entity(ent(ActionType::Tap));
    FAIL("expected InvariantViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvariantViolation);
  }
}

TEST_CASE("action names accept common spellings") {
  for (const char* s : {"Long Tap", "long-tap", "long_tap", "LongTap", "LONG TAP"})
    CHECK(parse_action(s) == ActionType::LongTap);
  CHECK(parse_action("Double-tap") == ActionType::DoubleTap);
  CHECK_FALSE(parse_action("hover").has_value());
  CHECK(parse_direction(" Down ") == Direction::Down);
}

TEST_CASE("parse_entity_notation on the multi-step example") {
  const auto p = parse_entity_notation("1. [Tap] [search icon]\n2. [Input] [search term] [A]\n3. [Long Tap] [category A]");
  REQUIRE(p.errors.empty());
  REQUIRE(p.entities.size() == 3);
  CHECK(p.entities[0] == ent(ActionType::Tap, "search icon"));
  CHECK(p.entities[1] == ent(ActionType::Input, "search term", "A"));
  CHECK(p.entities[2] == ent(ActionType::LongTap, "category A"));
  CHECK(parse_entity_notation("").entities.empty());
}

TEST_CASE("parse_entity_notation reports bad lines") {
  const auto p = parse_entity_notation("[Tap] [a]\n[Fly] [b]\n[Tap] [a] [b]\n[Tap] [unclosed\n\n[Back]");
  CHECK(p.entities.size() == 2);
  REQUIRE(p.errors.size() == 3);
  CHECK(p.errors[0].line_index == 1);
  CHECK(p.errors[0].reason.find("unknown action") != std::string::npos);
  CHECK(p.entity_lines == std::vector<std::size_t>{0, 5});
}

TEST_CASE("round trip over random entities") {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    const S2REntity e = testing::random_entity(rng);
    const auto p = parse_entity_notation(format_entity(e));
    REQUIRE_MESSAGE(p.entities.size() == 1, format_entity(e));
    CHECK(p.entities.front() == e);
    CHECK(entity_from_json(entity_to_json(e)) == e);
  }
}

TEST_CASE("parse_extraction_response strips prose") {
  const auto s = parse_extraction_response("The entities are:\n1. [Tap] [playlist]");
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0].entity == ent(ActionType::Tap, "playlist"));

  const auto two = parse_extraction_response("[Input] [Secret field] [test]\n[Input] [other required fields]");
  REQUIRE(two.steps.size() == 2);
  CHECK(two.steps[0].entity == ent(ActionType::Input, "Secret field", "test"));
  CHECK(two.steps[1].entity.generate_on_replay);
  CHECK_FALSE(two.steps[1].entity.value.has_value());

  try {
    parse_extraction_response("no actions here");
    FAIL("expected NoEntitiesFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoEntitiesFound);
  }
}

TEST_CASE("sentence markers attach indices") {
  std::vector<ParseError> errors;
  const auto s = parse_extraction_response(
      "Sentence 1:\n1. [Tap] [Settings]\nSentence 3: here\n2. [Tap] [About]\n3. [Jump] [x]", "r", &errors);
  REQUIRE(s.steps.size() == 2);
  CHECK(s.steps[0].sentence_index == 1);
  CHECK(s.steps[1].sentence_index == 3);
  CHECK(s.source_report == "r");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].line_index == 4);
}

TEST_CASE("script json and numbered rendering") {
  S2RScript s;
  s.source_report = "report";
  s.steps.push_back({ent(ActionType::Tap, "Settings"), 1});
  s.steps.push_back({ent(ActionType::Back), std::nullopt});
  CHECK(script_from_json(script_to_json(s)) == s);
  CHECK(format_script(s) == "1. [Tap] [Settings]\n2. [Back]\n");
}

TEST_CASE("extraction prompt layout") {
  ExampleSentence ex{"Click on the add to option and select playlist.",
                     {ent(ActionType::Tap, "add to"), ent(ActionType::Tap, "playlist")}};
  const std::string with = build_extraction_prompt({"Long hold on any video."}, {ex});
  const auto a = with.find("Available_Actions");
  const auto b = with.find("Action_Primitive");
  const auto c = with.find("Retrieval_Prompt");
  const auto d = with.find("Current_Bug_Report");
  REQUIRE(a != std::string::npos);
  CHECK(a < b);
  CHECK(b < c);
  CHECK(c < d);
  CHECK(with.find("the extracted S2R entities are:\n1. [Tap] [add to]\n2. [Tap] [playlist]") != std::string::npos);

  const std::string without = build_extraction_prompt({"Rotate your phone."}, {});
  CHECK(without.find("Retrieval_Prompt") == std::string::npos);
  CHECK(without.find("1. Rotate your phone.") != std::string::npos);
}
