#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crashrepro/action_command.hpp"
#include "crashrepro/clock.hpp"
#include "crashrepro/error.hpp"
#include "crashrepro/llm_gateway.hpp"
#include "llm_outputs.hpp"
#include "support.hpp"

using namespace crashrepro;
using namespace crashrepro::llm;

namespace {

ActionCommand click(std::string f) {
  ActionCommand c;
  c.action = Verb::Click;
  c.feature = std::move(f);
  return c;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::FormatError;
}

}  // namespace

TEST_CASE("verb aliases") {
  CHECK(parse_verb("tap") == Verb::Click);
  CHECK(parse_verb("input") == Verb::SetText);
  CHECK(parse_verb("Long Tap") == Verb::LongClick);
  CHECK(parse_verb("double-tap") == Verb::DoubleClick);
  CHECK(parse_verb("set_text") == Verb::SetText);
  CHECK_FALSE(parse_verb("launch").has_value());
}

TEST_CASE("filter_json_payload on free-form answers") {
  for (std::size_t i : {0u, 1u, 2u, 4u}) CHECK_FALSE(filter_json_payload(testing::kUnstructuredOutputs[i]).has_value());

  const auto p = filter_json_payload(testing::kUnstructuredOutputs[3]);
  REQUIRE(p.has_value());
  // Oracle: parse each bracketed segment on its own and concatenate.
  nlohmann::json expected = nlohmann::json::array();
  for (const char* seg : {R"([{"action": "click", "feature": "Licenses"}])",
                          R"([{"action": "scroll", "target_direction": "down"}])", R"([{"action": "back"}])"})
    for (auto& e : nlohmann::json::parse(seg)) expected.push_back(e);
  CHECK(nlohmann::json::parse(*p) == expected);

  const auto cmds = parse_action_sequence(*p);
  REQUIRE(cmds.size() == 3);
  CHECK(cmds[0] == click("Licenses"));
  CHECK(cmds[1].action == Verb::Scroll);
  CHECK(cmds[1].direction == "down");
  CHECK(cmds[2].action == Verb::Back);
}

TEST_CASE("filter ignores arrays of non-actions") {
  CHECK_FALSE(filter_json_payload("[1, 2, 3] and [\"a\"]").has_value());
  CHECK_FALSE(filter_json_payload("[{\"name\": \"x\"}]").has_value());
  CHECK_FALSE(filter_json_payload("[{\"action\": \"click\"").has_value());
  const auto p = filter_json_payload("Answer: ```json\n[{\"action\": \"back\"}]\n```");
  REQUIRE(p.has_value());
  CHECK(*p == R"([{"action":"back"}])");
}

TEST_CASE("structured payloads") {
  const auto single = parse_action_sequence(*filter_json_payload(testing::kSingleActionPayload));
  CHECK(single == std::vector<ActionCommand>{click("REFRESH")});

  const auto seq = parse_action_sequence(testing::kActionSequencePayload);
  REQUIRE(seq.size() == 2);
  CHECK(seq[0].action == Verb::SetText);
  CHECK(seq[0].feature == "https://librenews.io/api");
  CHECK(seq[0].input_text == "xxyyzz");
  CHECK(seq[1] == click("OK"));

  CHECK(parse_action_sequence("[]").empty());
}

TEST_CASE("malformed commands name their index") {
  try {
    parse_action_sequence(R"([{"action":"set_text","feature":"URL"}])");
    FAIL("expected MalformedCommand");
  } catch (const MalformedCommand& e) {
    CHECK(e.index() == 0);
    CHECK(e.reason().find("input_text") != std::string::npos);
  }
  try {
    parse_action_sequence(R"([{"action":"back"},{"action":"fly"}])");
    FAIL("expected MalformedCommand");
  } catch (const MalformedCommand& e) {
    CHECK(e.index() == 1);
  }
  CHECK(kind_of([] { parse_action_sequence(R"([{"action":"click"}])"); }) == ErrorKind::MalformedCommand);
  // A non-array violates the precondition rather than any one command.
  CHECK(kind_of([] { parse_action_sequence("{}"); }) == ErrorKind::FormatError);
}

TEST_CASE("command json round trip through the parser") {
  ActionCommand c;
  c.action = Verb::Scroll;
  c.feature = "list";
  c.direction = "up";
  const auto back = parse_action_sequence("[" + to_json(c).dump() + "]");
  CHECK(back.front() == c);
  CHECK(describe(click("OK")) == "click \"OK\"");
}

TEST_CASE("mock gateway contract") {
  MockGateway one({testing::reply("X")});
  CHECK(one.complete("anything") == "X");

  MockGateway two({testing::reply("a"), testing::reply("b")});
  two.complete("p");
  two.complete("p");
  CHECK(kind_of([&] { two.complete("p"); }) == ErrorKind::ExhaustedScript);
  CHECK(two.calls() == 3);
  two.reset();
  CHECK(two.complete("p") == "a");
}

TEST_CASE("mock conditional and repeat entries") {
  const auto entries = MockGateway::parse_script(R"(# comment
{"response": "about", "contains": ["About"], "repeat": true}
"first"
{"error": "timeout"}
)");
  REQUIRE(entries.size() == 3);
  MockGateway g(entries);
  CHECK(g.complete("plain") == "first");
  CHECK(g.complete("About page") == "about");
  CHECK(g.complete("About again") == "about");
  CHECK(kind_of([&] { g.complete("plain"); }) == ErrorKind::Timeout);
  CHECK(kind_of([] { MockGateway::parse_script("{\"error\": \"boom\"}"); }) == ErrorKind::FormatError);
  CHECK(kind_of([] { MockGateway::parse_script("not json"); }) == ErrorKind::FormatError);
}

TEST_CASE("mock charges virtual latency") {
  auto clock = std::make_shared<VirtualClock>();
  MockGateway g({testing::reply("[]")}, {0.5, clock, {}});
  g.complete("x");
  CHECK(clock->now() == doctest::Approx(0.5));
}

TEST_CASE("request_actions repairs once") {
  VirtualClock clock;
  MockGateway g({testing::reply("I would tap OK."), testing::reply(R"([{"action":"click","feature":"OK"}])")});
  const auto r = request_actions(g, "prompt", clock);
  REQUIRE(r.commands.has_value());
  CHECK(*r.commands == std::vector<ActionCommand>{click("OK")});
  REQUIRE(r.exchanges.size() == 2);
  CHECK(r.exchanges[1].prompt.find("Answer again with ONLY a JSON array") != std::string::npos);
  CHECK_FALSE(r.exchanges[0].error.empty());

  MockGateway prose({testing::reply("no"), testing::reply("still no")});
  const auto none = request_actions(prose, "prompt", clock);
  CHECK_FALSE(none.commands.has_value());
  CHECK(none.exchanges.size() == 2);

  MockGateway broken({testing::failing(llm::MockEntry::Failure::Transport)});
  const auto failed = request_actions(broken, "prompt", clock);
  CHECK_FALSE(failed.commands.has_value());
  REQUIRE(failed.exchanges.size() == 1);
  CHECK(failed.exchanges[0].error.rfind("TransportError", 0) == 0);

  VirtualClock late(10);
  CHECK(kind_of([&] { request_actions(g, "p", late, 5.0); }) == ErrorKind::BudgetExceeded);
}

TEST_CASE("config validation") {
  LlmConfig c;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::ConfigError);
  c.endpoint = "http://localhost/v1/chat/completions";
  c.validate();
  c.max_retries = -1;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::ConfigError);
}

TEST_CASE("unreachable endpoint exhausts retries") {
  LlmConfig c;
  c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  c.max_retries = 2;
  c.request_timeout = 2;
  HttpGateway g(c);
  CHECK(kind_of([&] { g.complete("hello"); }) == ErrorKind::TransportError);
  CHECK(g.last_attempts() == 3);
}

TEST_CASE("http gateway speaks chat completions") {
  httplib::Server server;
  nlohmann::json seen;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    seen = nlohmann::json::parse(req.body);
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "[]"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LlmConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  c.model_name = "m";
  HttpGateway g(c);
  CHECK(g.complete("hello") == "[]");
  CHECK(g.last_attempts() == 2);
  CHECK(seen["model"] == "m");
  CHECK(seen["messages"][0]["content"] == "hello");
  server.stop();
  t.join();
}
