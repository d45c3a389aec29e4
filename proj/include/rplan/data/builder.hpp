#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rplan/data/backend.hpp"
#include "rplan/data/types.hpp"
#include "rplan/rel/embedding.hpp"

namespace rplan::data {

struct BuilderConfig {
  int k = 4;                // retrieved in-context examples
  int max_retries = 3;      // extra attempts after the first
  int critic_variants = 3;  // must stay odd
  LlmGenConfig gen;
  std::string audit_path;   // optional prompt/completion log (JSON Lines)
};

// text form used for retrieval embeddings of transitions and tuples
std::string render_transition(const ExpertTransition& tx);
std::string render_tuple_for_retrieval(const RationaleTuple& t);

// k example blocks, the current (h, o), prior Q/A pairs, then query l.
// Ground-truth plans never appear: examples show rationales only.
std::string render_prompt(const QuerySet& qs, const std::vector<RationaleTuple>& examples,
                          const ExpertTransition& tx, const std::vector<std::string>& priors,
                          int query_index);

std::string render_critic_prompt(const RationaleSet& rationales, const std::string& plan_text,
                                 int variant);

class AuditLog {
 public:
  explicit AuditLog(std::string path);
  ~AuditLog();
  void record(const std::string& purpose, const std::string& prompt,
              const std::string& completion);
  static AuditLog* none() { return nullptr; }

 private:
  struct Impl;
  Impl* impl_;
};

// one completion per query, each prompt conditioned on all earlier answers
RationaleSet extract_rationales(const QuerySet& qs, const std::vector<RationaleTuple>& examples,
                                const ExpertTransition& tx, LLMBackend& backend,
                                const LlmGenConfig& gen, AuditLog* audit);

// n paraphrased critic prompts, majority vote; unparseable answers count no
bool self_critic(const RationaleSet& rationales, const std::string& plan_text,
                 LLMBackend& backend, const LlmGenConfig& gen, int n_variants,
                 std::vector<std::string>* votes_out, AuditLog* audit);

// Retrieval-augmented construction over the expert dataset, seeded with the
// curated examples; failed transitions are retried and finally recorded as
// skips, never dropped silently.
RationaleDataset build_dataset(const std::vector<ExpertTransition>& d_exp, const QuerySet& qs,
                               LLMBackend& backend, const BuilderConfig& cfg,
                               const rel::Embedder& embedder,
                               std::vector<RationaleTuple> seeds);

}  // namespace rplan::data
