#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace crashrepro::rag {

using Vector = std::vector<double>;

/// Turns text into a fixed-length vector. Implementations need not normalize;
/// `embed()` does that.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Stable identifier recorded in the index; queries must use the same one.
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Vector raw_embedding(std::string_view text) = 0;
};

/// Offline provider: lowercase, character trigrams, FNV-1a hashed into
/// `dimension` term-frequency buckets. Deterministic and dependency-free.
class HashedTrigramProvider final : public EmbeddingProvider {
 public:
  explicit HashedTrigramProvider(std::size_t dimension = 384);
  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  Vector raw_embedding(std::string_view text) override;

 private:
  std::size_t dimension_;
};

struct HttpEmbeddingConfig {
  /// Full URL of an embeddings endpoint accepting {"model", "input"} and
  /// answering {"data": [{"embedding": [...]}]} or {"embedding": [...]}.
  std::string endpoint;
  std::string model = "all-MiniLM-L12-v2";
  std::string api_key;
  std::size_t dimension = 384;
  std::chrono::seconds timeout{30};
};

/// Remote sentence-embedding service. Transport failures raise
/// Error(ProviderUnavailable).
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);
  std::string id() const override;
  std::size_t dimension() const override { return config_.dimension; }
  Vector raw_embedding(std::string_view text) override;

 private:
  HttpEmbeddingConfig config_;
};

/// Embeds `text` and L2-normalizes the result. Throws EmptyText for blank
/// input and DimensionMismatch when the provider breaks its own dimension.
Vector embed(std::string_view text, EmbeddingProvider& provider);

double dot(const Vector& a, const Vector& b);
double l2_norm(const Vector& v);
/// Cosine similarity; 0 when either vector is zero.
double cosine(const Vector& a, const Vector& b);

}  // namespace crashrepro::rag
