#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crashrepro/clock.hpp"
#include "crashrepro/llm_gateway.hpp"
#include "crashrepro/rag_store.hpp"
#include "crashrepro/s2r.hpp"

namespace crashrepro {

struct ExtractionRun {
  std::vector<std::string> sentences;
  std::vector<rag::RetrievalHit> hits;  // deduplicated, in first-retrieved order
  std::string prompt;
  llm::LlmExchange exchange;
  s2r::S2RScript script;
  std::vector<s2r::ParseError> parse_errors;
};

/// Segments the report, retrieves the `k` nearest labeled sentences for each
/// report sentence, prompts the model once and parses its answer. Throws
/// NoEntitiesFound for an empty report or an answer without entities.
ExtractionRun extract_s2r(const std::string& report, const rag::RagIndex& index, rag::EmbeddingProvider& provider,
                          llm::LlmGateway& gateway, Clock& clock, std::size_t k = 1);

nlohmann::json to_json(const ExtractionRun& run);

}  // namespace crashrepro
