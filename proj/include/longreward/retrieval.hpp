#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "longreward/hashing.hpp"
#include "longreward/http.hpp"
#include "longreward/rate_limit.hpp"

namespace longreward {

class RetrievalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense embedding with finite entries.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw RetrievalError("embedding must have dim >= 1");
    for (double v : values_)
      if (!std::isfinite(v)) throw RetrievalError("embedding contains a non-finite entry");
  }

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

struct RetrievalConfig {
  std::size_t top_k = 5;
};

inline double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim())
    throw RetrievalError("dimension mismatch: " + std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw RetrievalError("cosine similarity of a zero-norm vector");
  const double sim = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(sim, -1.0, 1.0);
}

// Indices of the k chunks most similar to the query, by descending cosine
// similarity; equal similarities keep ascending index order.
inline std::vector<std::size_t> top_k_chunks(const EmbeddingVector& query,
                                             std::span<const EmbeddingVector> chunks, std::size_t k) {
  if (chunks.empty()) throw RetrievalError("top_k_chunks needs at least one chunk");
  if (k == 0) throw RetrievalError("k must be >= 1");
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) scored.emplace_back(cosine_similarity(query, chunks[i]), i);
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = scored[i].second;
  return out;
}

// Embedding client contract. Implementations must tolerate concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;
};

// Deterministic offline embedder: signed feature hashing of lower-cased
// alphanumeric words. Texts without words map to a fixed unit vector.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 256) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("HashEmbedder dim must be >= 1");
  }

  EmbeddingVector embed(std::string_view text) const {
    std::vector<double> v(dim_, 0.0);
    std::string word;
    bool any = false;
    auto flush = [&] {
      if (word.empty()) return;
      const std::uint64_t h = fnv1a64(word);
      v[h % dim_] += ((h >> 63) != 0U) ? -1.0 : 1.0;
      any = true;
      word.clear();
    };
    for (char c : text) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isalnum(u) || u >= 0x80) {
        word.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
      } else {
        flush();
      }
    }
    flush();
    if (!any || std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
      std::fill(v.begin(), v.end(), 0.0);
      v[0] = 1.0;
    }
    return EmbeddingVector(std::move(v));
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
  }

 private:
  std::size_t dim_;
};

// OpenAI-compatible /embeddings adapter.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(EndpointConfig endpoint, std::size_t batch_size, CallLimiter* limiter = nullptr)
      : endpoint_(std::move(endpoint)), batch_size_(std::max<std::size_t>(batch_size, 1)), limiter_(limiter) {}

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
      const std::size_t end = std::min(texts.size(), begin + batch_size_);
      nlohmann::json body{{"model", endpoint_.model},
                          {"input", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                             texts.begin() + static_cast<std::ptrdiff_t>(end))}};
      nlohmann::json res;
      if (limiter_) {
        auto permit = limiter_->acquire();
        res = post_json(endpoint_, "/embeddings", body);
      } else {
        res = post_json(endpoint_, "/embeddings", body);
      }
      const auto& data = res.at("data");
      if (data.size() != end - begin) throw TransportError("embedding endpoint returned wrong item count");
      std::vector<EmbeddingVector> batch(end - begin);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& item = data[i];
        const std::size_t idx = item.contains("index") ? item.at("index").get<std::size_t>() : i;
        if (idx >= batch.size()) throw TransportError("embedding endpoint returned out-of-range index");
        batch[idx] = EmbeddingVector(item.at("embedding").get<std::vector<double>>());
      }
      for (auto& e : batch) out.push_back(std::move(e));
    }
    return out;
  }

 private:
  EndpointConfig endpoint_;
  std::size_t batch_size_;
  CallLimiter* limiter_;
};

}  // namespace longreward
