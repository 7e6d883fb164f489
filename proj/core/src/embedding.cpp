#include "crashrepro/embedding.hpp"

#include <cmath>

#include "crashrepro/error.hpp"
#include "crashrepro/text.hpp"

namespace crashrepro::rag {

HashedTrigramProvider::HashedTrigramProvider(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorKind::ConfigError, "embedding dimension must be positive");
}

std::string HashedTrigramProvider::id() const {
  return "hashed-trigram-" + std::to_string(dimension_);
}

Vector HashedTrigramProvider::raw_embedding(std::string_view input) {
  const std::string lowered = text::to_lower(input);
  Vector v(dimension_, 0.0);
  if (lowered.size() < 3) {
    v[text::fnv1a64(lowered) % dimension_] += 1.0;
    return v;
  }
  for (std::size_t i = 0; i + 3 <= lowered.size(); ++i)
    v[text::fnv1a64(std::string_view(lowered).substr(i, 3)) % dimension_] += 1.0;
  return v;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::DimensionMismatch, "vector dimensions differ: " + std::to_string(a.size()) +
                                                  " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine(const Vector& a, const Vector& b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

Vector embed(std::string_view input, EmbeddingProvider& provider) {
  if (text::trim(input).empty()) throw Error(ErrorKind::EmptyText, "cannot embed empty text");
  Vector v = provider.raw_embedding(input);
  if (v.size() != provider.dimension())
    throw Error(ErrorKind::DimensionMismatch,
                provider.id() + " returned " + std::to_string(v.size()) + " values, expected " +
                    std::to_string(provider.dimension()));
  const double n = l2_norm(v);
  if (n == 0.0 || !std::isfinite(n))
    throw Error(ErrorKind::ProviderUnavailable, provider.id() + " returned a degenerate vector");
  for (double& x : v) x /= n;
  return v;
}

}  // namespace crashrepro::rag
