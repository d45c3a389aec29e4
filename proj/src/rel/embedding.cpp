#include "rplan/rel/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "rplan/sim/text.hpp"
#include "rplan/util/errors.hpp"
#include "rplan/util/rng.hpp"

namespace rplan::rel {

namespace {

int bucket_of(const std::string& token, int dim) {
  return static_cast<int>(fnv1a(token) % static_cast<std::uint64_t>(dim));
}

}  // namespace

Embedder::Embedder(int dim) : dim_(dim), idf_(static_cast<size_t>(dim), 1.0) {
  if (dim <= 0) throw EmbeddingError("embedding dimension must be positive");
}

void Embedder::fit(const std::vector<std::string>& corpus) {
  std::vector<long long> df(static_cast<size_t>(dim_), 0);
  for (const auto& doc : corpus) {
    std::vector<bool> seen(static_cast<size_t>(dim_), false);
    for (const auto& tok : sim::tokenize(doc)) seen[bucket_of(tok, dim_)] = true;
    for (int b = 0; b < dim_; ++b)
      if (seen[b]) ++df[b];
  }
  doc_count_ = static_cast<long long>(corpus.size());
  for (int b = 0; b < dim_; ++b)
    idf_[b] = std::log((1.0 + static_cast<double>(doc_count_)) / (1.0 + static_cast<double>(df[b]))) + 1.0;
  fitted_ = true;
}

EmbeddingVector Embedder::embed(std::string_view text) const {
  EmbeddingVector v;
  v.values.assign(static_cast<size_t>(dim_), 0.0);
  for (const auto& tok : sim::tokenize(text)) v.values[bucket_of(tok, dim_)] += 1.0;
  double norm2 = 0.0;
  for (int b = 0; b < dim_; ++b) {
    v.values[b] *= idf_[b];
    norm2 += v.values[b] * v.values[b];
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v.values) x *= inv;
  }
  return v;  // empty text stays the zero vector
}

std::string Embedder::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["doc_count"] = doc_count_;
  j["fitted"] = fitted_;
  j["idf"] = idf_;
  return j.dump();
}

Embedder Embedder::from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  Embedder e(j.at("dim").get<int>());
  e.doc_count_ = j.at("doc_count").get<long long>();
  e.fitted_ = j.at("fitted").get<bool>();
  e.idf_ = j.at("idf").get<std::vector<double>>();
  if (static_cast<int>(e.idf_.size()) != e.dim_)
    throw EmbeddingError("idf table size does not match dimension");
  return e;
}

double relevance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size())
    throw EmbeddingError("embedding dimension mismatch: " + std::to_string(a.values.size()) +
                         " vs " + std::to_string(b.values.size()));
  double dot = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return dot;
}

std::vector<int> top_k(const Embedder& embedder, std::string_view query,
                       const std::vector<std::string>& candidates, int k) {
  if (k <= 0) return {};
  const auto q = embedder.embed(query);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i)
    scored.emplace_back(relevance(q, embedder.embed(candidates[i])), static_cast<int>(i));
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const int take = std::min<int>(k, static_cast<int>(scored.size()));
  std::vector<int> out(static_cast<size_t>(take));
  for (int i = 0; i < take; ++i) out[i] = scored[i].second;
  return out;
}

}  // namespace rplan::rel
