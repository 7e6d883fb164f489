#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "crashrepro/embedding.hpp"
#include "crashrepro/s2r.hpp"

namespace crashrepro::rag {

struct LabeledSentence {
  std::string text;
  std::vector<s2r::S2REntity> labels;
};

struct LabeledReport {
  std::string report_id;
  std::string app_id;
  std::vector<LabeledSentence> sentences;
};

struct RagRecord {
  std::string record_id;
  std::string sentence;
  Vector embedding;
  std::vector<s2r::S2REntity> labels;
  std::string source_report;
};

struct RetrievalHit {
  RagRecord record;
  double score = 0.0;
};

/// Immutable exact-scan vector index over labeled corpus sentences.
class RagIndex {
 public:
  /// Embeds every labeled sentence in corpus order. Record ids are
  /// "<report_id>#<sentence number, 4 digits>".
  static RagIndex build(const std::vector<LabeledReport>& corpus, EmbeddingProvider& provider);

  /// Validates dimension, unit norms and record-id uniqueness.
  static RagIndex from_json(const nlohmann::json& j);
  static RagIndex load(const std::string& path);
  nlohmann::json to_json() const;
  void save(const std::string& path) const;

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& provider_id() const noexcept { return provider_id_; }
  const std::vector<RagRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  /// Top-k records by cosine similarity to `query_sentence`, ties broken by
  /// ascending record id.
  std::vector<RetrievalHit> retrieve(std::string_view query_sentence, std::size_t k,
                                     EmbeddingProvider& provider) const;
  /// Same ranking for an already-normalized query vector.
  std::vector<RetrievalHit> retrieve_vector(const Vector& query, std::size_t k) const;

 private:
  RagIndex(std::size_t dimension, std::string provider_id, std::vector<RagRecord> records);

  std::size_t dimension_;
  std::string provider_id_;
  std::vector<RagRecord> records_;
};

/// Splits a report into sentences: lines first (with list markers like "1."
/// removed), then terminal punctuation within a line. Parenthesized asides
/// stay with the sentence they follow.
std::vector<std::string> segment_report(std::string_view report_text);

/// One JSON object per line: {report_id, app_id, sentences: [{text, labels}]}.
std::vector<LabeledReport> parse_corpus(std::string_view jsonl);
std::vector<LabeledReport> load_corpus(const std::string& path);

}  // namespace crashrepro::rag
