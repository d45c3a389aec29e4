#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rplan/model/layers.hpp"
#include "rplan/model/vocab.hpp"
#include "rplan/rel/embedding.hpp"

namespace rplan::model {

struct ReasonerConfig {
  int model_dim = 64;
  int enc_layers = 2;
  int dec_layers = 2;
  int heads = 4;
  int ff_dim = 128;
  int prompt_len = 20;  // vectors per prompt-pool entry
  int num_queries = 7;  // m
  double alpha = 0.5;   // attention-module scaling
  bool use_psi_c = true;
  bool use_psi_g = true;
  int max_rationale_tokens = 40;
  double init_std = 0.08;
};

// Tier-1 model: encoder with prefix/postfix prompt pools, causal+gated
// attention refinement, and m parallel decoder streams sharing one memory.
class Reasoner {
 public:
  struct Counters {
    long long encoder_passes = 0;
    long long decoder_passes = 0;  // one batched multi-stream pass counts once
    long long reasoning_invocations = 0;
  };

  Reasoner(const Vocab& vocab, ReasonerConfig cfg, std::uint64_t seed);

  // overwrite each prefix-pool entry with the pooled relevance embedding of
  // its query projected to model dim
  void init_prefix_pools(const std::vector<std::string>& queries, const rel::Embedder& emb,
                         std::uint64_t seed);

  // ---- tape forwards (training) ----
  int encode_node(Tape& t, Bind& b, const std::vector<int>& g_tokens) const;
  int attend_node(Tape& t, Bind& b, int z) const;
  // targets[i] = token ids of rationale i, EOS appended by the caller
  int rationale_nll_node(Tape& t, Bind& b, int zhat,
                         const std::vector<std::vector<int>>& targets) const;

  // ---- inference ----
  Mat encode(const std::vector<int>& g_tokens) const;
  Mat attend(const Mat& z) const;
  Mat psi_c_branch(const Mat& z) const;  // bare causal branch, for invariants
  Mat psi_g_branch(const Mat& z) const;
  std::vector<double> gate_values() const;  // sigmoid(w)

  // single-step: 1 encoder pass + 1 batched decoder pass
  std::vector<std::vector<int>> decode_rationales(const std::vector<int>& g_tokens) const;
  // ablation: m sequential full passes, one stream each
  std::vector<std::vector<int>> decode_rationales_iterative(
      const std::vector<int>& g_tokens) const;

  double rationale_nll(const std::vector<int>& g_tokens,
                       const std::vector<std::vector<int>>& targets) const;
  // same quantity computed on the cached inference path (no tape)
  double rationale_nll_infer(const std::vector<int>& g_tokens,
                             const std::vector<std::vector<int>>& targets) const;

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const ReasonerConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return *vocab_; }
  Counters& counters() const { return counters_; }

 private:
  std::vector<int> decode_stream(int stream, const Mat& zhat) const;

  const Vocab* vocab_;
  ReasonerConfig cfg_;
  ParamStore params_;

  int tok_emb_ = -1;
  std::vector<BlockP> enc_blocks_;
  LayerNormP enc_ln_;
  std::vector<int> theta_pre_, theta_pos_, theta_dec_;  // one entry per query
  AttnP psi_c_;
  AttnP psi_g_;
  int gate_w_ = -1;
  std::vector<DecBlockP> dec_blocks_;
  LayerNormP dec_ln_;

  mutable Counters counters_;
};

}  // namespace rplan::model
