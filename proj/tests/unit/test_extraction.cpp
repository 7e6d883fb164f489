#include <doctest.h>

#include <set>

#include "crashrepro/error.hpp"
#include "crashrepro/extraction.hpp"
#include "crashrepro/text.hpp"
#include "golden.hpp"
#include "support.hpp"

using namespace crashrepro;

namespace {

struct Fixture {
  rag::HashedTrigramProvider provider;
  rag::RagIndex index = rag::RagIndex::build(rag::load_corpus(testing::data_path("corpus.jsonl")), provider);
  std::string report = text::read_file(testing::data_path("reports/librenews.txt"));
};

}  // namespace

TEST_CASE("extraction on the url report") {
  Fixture f;
  auto gw = llm::MockGateway::from_file(testing::data_path("mock/librenews_extract.jsonl"));
  VirtualClock clock;
  const auto run = extract_s2r(f.report, f.index, f.provider, gw, clock);
  CHECK(run.sentences.size() == 4);
  CHECK_FALSE(run.hits.empty());
  CHECK(run.hits.size() <= run.sentences.size());
  testing::check_golden("extraction_prompt.txt", run.prompt);

  const auto gold = s2r::script_from_json(nlohmann::json::parse(text::read_file(testing::data_path("gold/librenews.json"))));
  REQUIRE(run.script.steps.size() == gold.steps.size());
  for (std::size_t i = 0; i < gold.steps.size(); ++i) CHECK(run.script.steps[i] == gold.steps[i]);
  CHECK(run.parse_errors.empty());
  CHECK(gw.calls() == 1);
}

TEST_CASE("extraction retrieves distinct examples") {
  Fixture f;
  llm::MockGateway gw({testing::reply("[Tap] [OK]")});
  VirtualClock clock;
  const auto run = extract_s2r(f.report, f.index, f.provider, gw, clock, 3);
  std::set<std::string> ids;
  for (const auto& h : run.hits) CHECK(ids.insert(h.record.record_id).second);
  CHECK(run.hits.size() <= 3 * run.sentences.size());
  CHECK(run.prompt.find("Retrieval_Prompt") != std::string::npos);
}

TEST_CASE("extraction failures") {
  Fixture f;
  VirtualClock clock;
  llm::MockGateway gw({testing::reply("Nothing to extract.")});
  try {
    extract_s2r("   \n", f.index, f.provider, gw, clock);
    FAIL("expected NoEntitiesFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoEntitiesFound);
  }
  try {
    extract_s2r(f.report, f.index, f.provider, gw, clock);
    FAIL("expected NoEntitiesFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoEntitiesFound);
  }
}
