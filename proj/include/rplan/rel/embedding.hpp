#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rplan::rel {

// Unit-norm (or zero) fixed-dimension text embedding.
struct EmbeddingVector {
  std::vector<double> values;
};

// Hashed term-frequency embedding with inverse-document-frequency weights
// fit once on the expert corpus, L2-normalized. Deterministic; the fitted
// table travels with the dataset so retrieval reproduces across processes.
class Embedder {
 public:
  explicit Embedder(int dim = 256);

  // idf[b] = log((1 + docs) / (1 + df[b])) + 1, smoothed per hash bucket
  void fit(const std::vector<std::string>& corpus);
  bool fitted() const { return fitted_; }

  EmbeddingVector embed(std::string_view text) const;

  int dim() const { return dim_; }

  std::string to_json() const;
  static Embedder from_json(const std::string& json_text);

 private:
  int dim_;
  bool fitted_ = false;
  long long doc_count_ = 0;
  std::vector<double> idf_;
};

// Exact inner product. Throws on dimension mismatch.
double relevance(const EmbeddingVector& a, const EmbeddingVector& b);

// Indices of the k most relevant candidates, descending score, ties broken
// by ascending candidate index.
std::vector<int> top_k(const Embedder& embedder, std::string_view query,
                       const std::vector<std::string>& candidates, int k);

}  // namespace rplan::rel
