#include "rplan/model/planner.hpp"

#include "rplan/util/rng.hpp"

namespace rplan::model {

Planner::Planner(const Vocab& vocab, PlannerConfig cfg, std::uint64_t seed)
    : vocab_(&vocab), cfg_(cfg) {
  const int d = cfg_.model_dim;
  tok_emb_ = params_.add("tok_emb",
                         randn(vocab.size(), d, mix_seed(seed, "plan_emb"), cfg_.init_std));
  for (int l = 0; l < cfg_.layers; ++l)
    blocks_.push_back(add_block(params_, "blk." + std::to_string(l), d, cfg_.heads, cfg_.ff_dim,
                                mix_seed(seed, "plan_blk" + std::to_string(l)), cfg_.init_std));
  final_ln_ = add_layer_norm(params_, "final_ln", d);
}

int Planner::nll_node(Tape& t, Bind& b, const std::vector<int>& context,
                      const std::vector<int>& plan_tokens) const {
  std::vector<int> seq = {Vocab::kBos};
  seq.insert(seq.end(), context.begin(), context.end());
  seq.push_back(Vocab::kGo);
  const int go_pos = static_cast<int>(seq.size()) - 1;
  seq.insert(seq.end(), plan_tokens.begin(), plan_tokens.end());

  std::vector<int> targets = plan_tokens;
  targets.push_back(Vocab::kEos);

  int x = t.gather_rows(b(tok_emb_), seq);
  x = t.add_const(x, positional_encoding(static_cast<int>(seq.size()), cfg_.model_dim));
  for (const auto& blk : blocks_) x = block(t, b, blk, x, /*causal=*/true);
  x = layer_norm_f(t, b, final_ln_, x);
  const int pred = t.slice_rows(x, go_pos, static_cast<int>(targets.size()));
  const int logits = t.matmul_nt(pred, b(tok_emb_));
  return t.cross_entropy_sum(logits, targets);
}

double Planner::nll(const std::vector<int>& context, const std::vector<int>& plan_tokens) const {
  Tape t;
  Bind b(t, const_cast<ParamStore&>(params_));
  return t.val(nll_node(t, b, context, plan_tokens))(0, 0);
}

Eigen::VectorXd Planner::next_logits(const std::vector<int>& prefix) const {
  const int d = cfg_.model_dim;
  Mat x(static_cast<int>(prefix.size()), d);
  for (size_t i = 0; i < prefix.size(); ++i)
    x.row(static_cast<int>(i)) = params_.value(tok_emb_).row(prefix[i]);
  x += positional_encoding(static_cast<int>(prefix.size()), d);
  for (const auto& blk : blocks_) x = block_infer(params_, blk, x, /*causal=*/true);
  Mat last = layer_norm_infer(params_, final_ln_, x.bottomRows(1));
  return (last.row(0) * params_.value(tok_emb_).transpose()).transpose();
}

std::vector<int> Planner::decode(const std::vector<int>& context, const GenConfig& cfg) const {
  std::vector<int> prefix = {Vocab::kBos};
  prefix.insert(prefix.end(), context.begin(), context.end());
  prefix.push_back(Vocab::kGo);
  ++counters_.decode_calls;
  return beam_search(prefix, [this](const std::vector<int>& p) { return next_logits(p); }, cfg,
                     Vocab::kEos);
}

}  // namespace rplan::model
