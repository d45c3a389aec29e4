#pragma once

#include <cstdint>
#include <vector>

#include "rplan/model/beam.hpp"
#include "rplan/model/layers.hpp"
#include "rplan/model/vocab.hpp"

namespace rplan::model {

struct PlannerConfig {
  int model_dim = 64;
  int layers = 2;
  int heads = 4;
  int ff_dim = 128;
  double init_std = 0.08;
};

// Tier-2 model: maps a context token sequence (the separator-joined
// rationale set) to plan text. Decoder-only with beam-search decoding.
class Planner {
 public:
  struct Counters {
    long long decode_calls = 0;
  };

  Planner(const Vocab& vocab, PlannerConfig cfg, std::uint64_t seed);

  // context = rationale tokens; target = plan tokens (EOS appended inside)
  int nll_node(Tape& t, Bind& b, const std::vector<int>& context,
               const std::vector<int>& plan_tokens) const;
  double nll(const std::vector<int>& context, const std::vector<int>& plan_tokens) const;

  // logits for the next token after `prefix` (full sequence, absolute ids)
  Eigen::VectorXd next_logits(const std::vector<int>& prefix) const;

  std::vector<int> decode(const std::vector<int>& context, const GenConfig& cfg) const;

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const PlannerConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return *vocab_; }
  Counters& counters() const { return counters_; }

 private:
  const Vocab* vocab_;
  PlannerConfig cfg_;
  ParamStore params_;
  int tok_emb_ = -1;
  std::vector<BlockP> blocks_;
  LayerNormP final_ln_;
  mutable Counters counters_;
};

}  // namespace rplan::model
