#include "crashrepro/rag_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <regex>
#include <set>

#include "crashrepro/error.hpp"
#include "crashrepro/text.hpp"

namespace crashrepro::rag {

namespace {

constexpr double kNormTolerance = 1e-6;

std::string make_record_id(const std::string& report_id, std::size_t sentence_number) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%04zu", sentence_number);
  return report_id + buf;
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')'; }

// Splits one line at terminal punctuation outside parentheses.
std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '(') ++depth;
    if (c == ')' && depth > 0) --depth;
    if (depth != 0 || (c != '.' && c != '!' && c != '?')) continue;
    std::size_t end = i + 1;
    while (end < line.size() && (line[end] == '.' || line[end] == '!' || line[end] == '?')) ++end;
    while (end < line.size() && is_closer(line[end]) && line[end] != ')') ++end;
    if (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) {
      i = end - 1;
      continue;
    }
    auto piece = text::trim(line.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
    i = end - 1;
  }
  auto tail = text::trim(line.substr(std::min(start, line.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

}  // namespace

std::vector<std::string> segment_report(std::string_view report_text) {
  static const std::regex marker(R"(^(?:\d+[.)]|[-*])\s+)");
  std::vector<std::string> sentences;
  for (const auto& raw : text::split_lines(report_text)) {
    std::string line(text::trim(raw));
    if (line.empty()) continue;
    line = std::regex_replace(line, marker, "", std::regex_constants::format_first_only);
    for (auto& piece : split_line(line)) {
      if (piece.front() == '(' && !sentences.empty()) {
        sentences.back() += " " + piece;
      } else {
        sentences.push_back(std::move(piece));
      }
    }
  }
  return sentences;
}

RagIndex::RagIndex(std::size_t dimension, std::string provider_id, std::vector<RagRecord> records)
    : dimension_(dimension), provider_id_(std::move(provider_id)), records_(std::move(records)) {}

RagIndex RagIndex::build(const std::vector<LabeledReport>& corpus, EmbeddingProvider& provider) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus has no reports");
  const std::size_t dimension = provider.dimension();
  std::vector<RagRecord> records;
  std::set<std::string> ids;
  for (const auto& report : corpus) {
    for (std::size_t i = 0; i < report.sentences.size(); ++i) {
      const auto& s = report.sentences[i];
      RagRecord r;
      r.record_id = make_record_id(report.report_id, i + 1);
      if (!ids.insert(r.record_id).second)
        throw Error(ErrorKind::CorpusInvalid, "duplicate record id " + r.record_id);
      r.sentence = s.text;
      r.embedding = embed(s.text, provider);
      if (r.embedding.size() != dimension || provider.dimension() != dimension)
        throw Error(ErrorKind::DimensionMismatch,
                    "provider dimension changed while embedding " + r.record_id);
      r.labels = s.labels;
      r.source_report = report.report_id;
      records.push_back(std::move(r));
    }
  }
  return RagIndex(dimension, provider.id(), std::move(records));
}

std::vector<RetrievalHit> RagIndex::retrieve(std::string_view query_sentence, std::size_t k,
                                             EmbeddingProvider& provider) const {
  if (provider.id() != provider_id_)
    throw Error(ErrorKind::ProviderMismatch,
                "index built with '" + provider_id_ + "', queried with '" + provider.id() + "'");
  if (records_.empty()) throw Error(ErrorKind::EmptyIndex, "index has no records");
  return retrieve_vector(embed(query_sentence, provider), k);
}

std::vector<RetrievalHit> RagIndex::retrieve_vector(const Vector& query, std::size_t k) const {
  if (records_.empty()) throw Error(ErrorKind::EmptyIndex, "index has no records");
  if (k == 0) throw Error(ErrorKind::ConfigError, "k must be at least 1");
  if (query.size() != dimension_)
    throw Error(ErrorKind::DimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                                  " != index dimension " + std::to_string(dimension_));
  std::vector<double> scores(records_.size());
  // Rank on a 1e-9 grid so scores equal up to rounding noise fall to the record_id tie-break.
  std::vector<long long> rank(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    scores[i] = std::clamp(dot(query, records_[i].embedding), -1.0, 1.0);
    rank[i] = std::llround(scores[i] * 1e9);
  }

  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (rank[a] != rank[b]) return rank[a] > rank[b];
                      return records_[a].record_id < records_[b].record_id;
                    });
  std::vector<RetrievalHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) hits.push_back({records_[order[i]], scores[order[i]]});
  return hits;
}

nlohmann::json RagIndex::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : records_) {
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : r.labels) labels.push_back(s2r::entity_to_json(l));
    records.push_back({{"record_id", r.record_id},
                       {"sentence", r.sentence},
                       {"source_report", r.source_report},
                       {"labels", std::move(labels)},
                       {"embedding", r.embedding}});
  }
  return {{"provider_id", provider_id_}, {"dimension", dimension_}, {"records", std::move(records)}};
}

RagIndex RagIndex::from_json(const nlohmann::json& j) {
  try {
    const auto dimension = j.at("dimension").get<std::size_t>();
    if (dimension == 0) throw Error(ErrorKind::IndexInvalid, "dimension must be positive");
    std::vector<RagRecord> records;
    std::set<std::string> ids;
    for (const auto& jr : j.at("records")) {
      RagRecord r;
      r.record_id = jr.at("record_id").get<std::string>();
      r.sentence = jr.at("sentence").get<std::string>();
      r.source_report = jr.value("source_report", std::string{});
      for (const auto& l : jr.at("labels")) r.labels.push_back(s2r::entity_from_json(l));
      r.embedding = jr.at("embedding").get<Vector>();
      if (r.embedding.size() != dimension)
        throw Error(ErrorKind::DimensionMismatch, "record " + r.record_id + " has dimension " +
                                                      std::to_string(r.embedding.size()));
      if (std::abs(l2_norm(r.embedding) - 1.0) > kNormTolerance)
        throw Error(ErrorKind::IndexInvalid, "record " + r.record_id + " is not unit-norm");
      if (!ids.insert(r.record_id).second)
        throw Error(ErrorKind::IndexInvalid, "duplicate record id " + r.record_id);
      records.push_back(std::move(r));
    }
    return RagIndex(dimension, j.at("provider_id").get<std::string>(), std::move(records));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IndexInvalid, std::string("malformed index: ") + e.what());
  }
}

RagIndex RagIndex::load(const std::string& path) {
  const std::string body = text::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IndexInvalid, path + ": " + e.what());
  }
  return from_json(j);
}

void RagIndex::save(const std::string& path) const { text::write_file(path, to_json().dump() + "\n"); }

std::vector<LabeledReport> parse_corpus(std::string_view jsonl) {
  std::vector<LabeledReport> corpus;
  std::set<std::string> ids;
  const auto lines = text::split_lines(jsonl);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) continue;
    const std::string where = "corpus line " + std::to_string(n + 1);
    try {
      const auto j = nlohmann::json::parse(lines[n]);
      LabeledReport report;
      report.report_id = j.at("report_id").get<std::string>();
      report.app_id = j.value("app_id", std::string{});
      if (report.report_id.empty()) throw Error(ErrorKind::CorpusInvalid, where + ": empty report_id");
      if (!ids.insert(report.report_id).second)
        throw Error(ErrorKind::CorpusInvalid, where + ": duplicate report_id " + report.report_id);
      for (const auto& js : j.at("sentences")) {
        LabeledSentence s;
        s.text = std::string(text::trim(js.at("text").get<std::string>()));
        if (s.text.empty()) throw Error(ErrorKind::CorpusInvalid, where + ": empty sentence text");
        for (const auto& l : js.value("labels", nlohmann::json::array()))
          s.labels.push_back(s2r::entity_from_json(l));
        report.sentences.push_back(std::move(s));
      }
      corpus.push_back(std::move(report));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::CorpusInvalid, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::CorpusInvalid) throw;
      throw Error(ErrorKind::CorpusInvalid, where + ": " + e.what());
    }
  }
  return corpus;
}

std::vector<LabeledReport> load_corpus(const std::string& path) {
  return parse_corpus(text::read_file(path));
}

}  // namespace crashrepro::rag
