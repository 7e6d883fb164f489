#include "crashrepro/extraction.hpp"

#include <set>

namespace crashrepro {

ExtractionRun extract_s2r(const std::string& report, const rag::RagIndex& index, rag::EmbeddingProvider& provider,
                          llm::LlmGateway& gateway, Clock& clock, std::size_t k) {
  ExtractionRun run;
  run.sentences = rag::segment_report(report);
  if (run.sentences.empty()) throw Error(ErrorKind::NoEntitiesFound, "report has no sentences");

  std::set<std::string> seen;
  std::vector<s2r::ExampleSentence> examples;
  for (const auto& sentence : run.sentences) {
    for (auto& hit : index.retrieve(sentence, k, provider)) {
      if (!seen.insert(hit.record.record_id).second) continue;
      examples.push_back({hit.record.sentence, hit.record.labels});
      run.hits.push_back(std::move(hit));
    }
  }
  run.prompt = s2r::build_extraction_prompt(run.sentences, examples);

  std::vector<llm::LlmExchange> log;
  llm::request_text(gateway, run.prompt, clock, log);
  run.exchange = log.back();
  run.script = s2r::parse_extraction_response(run.exchange.raw_response, report, &run.parse_errors);
  return run;
}

nlohmann::json to_json(const ExtractionRun& run) {
  nlohmann::json j;
  j["sentences"] = run.sentences;
  j["retrieved"] = nlohmann::json::array();
  for (const auto& h : run.hits)
    j["retrieved"].push_back({{"record_id", h.record.record_id}, {"sentence", h.record.sentence}, {"score", h.score}});
  j["exchange"] = llm::to_json(run.exchange, true);
  j["script"] = s2r::script_to_json(run.script);
  j["parse_errors"] = nlohmann::json::array();
  for (const auto& e : run.parse_errors)
    j["parse_errors"].push_back({{"line_index", e.line_index}, {"line", e.line}, {"reason", e.reason}});
  return j;
}

}  // namespace crashrepro
