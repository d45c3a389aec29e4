#include "rplan/model/reasoner.hpp"

#include "rplan/util/rng.hpp"

namespace rplan::model {

Reasoner::Reasoner(const Vocab& vocab, ReasonerConfig cfg, std::uint64_t seed)
    : vocab_(&vocab), cfg_(cfg) {
  const int d = cfg_.model_dim;
  tok_emb_ = params_.add("tok_emb",
                         randn(vocab.size(), d, mix_seed(seed, "tok_emb"), cfg_.init_std));
  for (int l = 0; l < cfg_.enc_layers; ++l)
    enc_blocks_.push_back(add_block(params_, "enc." + std::to_string(l), d, cfg_.heads,
                                    cfg_.ff_dim, mix_seed(seed, "enc" + std::to_string(l)),
                                    cfg_.init_std));
  enc_ln_ = add_layer_norm(params_, "enc.final_ln", d);
  for (int i = 0; i < cfg_.num_queries; ++i) {
    const auto tag = std::to_string(i);
    theta_pre_.push_back(params_.add(
        "theta_pre." + tag, randn(cfg_.prompt_len, d, mix_seed(seed, "pre" + tag), cfg_.init_std)));
    theta_pos_.push_back(params_.add(
        "theta_pos." + tag, randn(cfg_.prompt_len, d, mix_seed(seed, "pos" + tag), cfg_.init_std)));
    theta_dec_.push_back(params_.add(
        "theta_dec." + tag, randn(cfg_.prompt_len, d, mix_seed(seed, "dec" + tag), cfg_.init_std)));
  }
  if (cfg_.use_psi_c)
    psi_c_ = add_attention(params_, "psi_c", d, cfg_.heads, mix_seed(seed, "psi_c"),
                           cfg_.init_std);
  if (cfg_.use_psi_g) {
    psi_g_ = add_attention(params_, "psi_g", d, cfg_.heads, mix_seed(seed, "psi_g"),
                           cfg_.init_std);
    gate_w_ = params_.add("psi_g.gate", Mat::Zero(1, d));  // sigmoid(0) = 0.5
  }
  for (int l = 0; l < cfg_.dec_layers; ++l)
    dec_blocks_.push_back(add_dec_block(params_, "dec." + std::to_string(l), d, cfg_.heads,
                                        cfg_.ff_dim, mix_seed(seed, "dec" + std::to_string(l)),
                                        cfg_.init_std));
  dec_ln_ = add_layer_norm(params_, "dec.final_ln", d);
}

void Reasoner::init_prefix_pools(const std::vector<std::string>& queries,
                                 const rel::Embedder& emb, std::uint64_t seed) {
  const int d = cfg_.model_dim;
  const Mat proj = randn(emb.dim(), d, mix_seed(seed, "theta-pre-projection"), cfg_.init_std);
  for (int i = 0; i < cfg_.num_queries && i < static_cast<int>(queries.size()); ++i) {
    const auto v = emb.embed(queries[static_cast<size_t>(i)]);
    Eigen::RowVectorXd q(emb.dim());
    for (int j = 0; j < emb.dim(); ++j) q(j) = v.values[static_cast<size_t>(j)];
    const Eigen::RowVectorXd pooled = q * proj;
    Mat& pre = params_.value(theta_pre_[static_cast<size_t>(i)]);
    for (int r = 0; r < pre.rows(); ++r) pre.row(r) = pooled;
  }
}

int Reasoner::encode_node(Tape& t, Bind& b, const std::vector<int>& g_tokens) const {
  std::vector<int> parts;
  for (int i = 0; i < cfg_.num_queries; ++i) parts.push_back(b(theta_pre_[static_cast<size_t>(i)]));
  if (!g_tokens.empty()) parts.push_back(t.gather_rows(b(tok_emb_), g_tokens));
  for (int i = 0; i < cfg_.num_queries; ++i) parts.push_back(b(theta_pos_[static_cast<size_t>(i)]));
  int x = t.concat_rows(parts);
  x = t.add_const(x, positional_encoding(static_cast<int>(t.val(x).rows()), cfg_.model_dim));
  for (const auto& blk : enc_blocks_) x = block(t, b, blk, x, /*causal=*/false);
  return layer_norm_f(t, b, enc_ln_, x);
}

int Reasoner::attend_node(Tape& t, Bind& b, int z) const {
  int sum = -1;
  if (cfg_.use_psi_c) sum = attention(t, b, psi_c_, z, z, /*causal=*/true);
  if (cfg_.use_psi_g) {
    int g = attention(t, b, psi_g_, z, z, /*causal=*/false);
    g = t.mul_rowvec(g, t.sigmoid(b(gate_w_)));
    sum = sum < 0 ? g : t.add(sum, g);
  }
  if (sum < 0) return z;
  return t.add_scaled(z, sum, cfg_.alpha);
}

int Reasoner::rationale_nll_node(Tape& t, Bind& b, int zhat,
                                 const std::vector<std::vector<int>>& targets) const {
  std::vector<CrossNodes> kv;
  for (const auto& blk : dec_blocks_) kv.push_back(cross_kv_nodes(t, b, blk.cross, zhat));

  std::vector<int> losses;
  for (int i = 0; i < cfg_.num_queries; ++i) {
    const auto& tgt = targets[static_cast<size_t>(i)];
    std::vector<int> teacher(tgt.begin(), tgt.end() - 1);
    std::vector<int> rows = {b(theta_dec_[static_cast<size_t>(i)]),
                             t.gather_rows(b(tok_emb_), {vocab_->marker(i)})};
    if (!teacher.empty()) rows.push_back(t.gather_rows(b(tok_emb_), teacher));
    int x = t.concat_rows(rows);
    x = t.add_const(x, positional_encoding(static_cast<int>(t.val(x).rows()), cfg_.model_dim));
    for (size_t l = 0; l < dec_blocks_.size(); ++l) x = dec_block(t, b, dec_blocks_[l], x, kv[l]);
    x = layer_norm_f(t, b, dec_ln_, x);
    const int pred = t.slice_rows(x, cfg_.prompt_len, static_cast<int>(tgt.size()));
    const int logits = t.matmul_nt(pred, b(tok_emb_));
    losses.push_back(t.cross_entropy_sum(logits, tgt));
  }
  return t.add_scalars(losses);
}

Mat Reasoner::encode(const std::vector<int>& g_tokens) const {
  const int d = cfg_.model_dim;
  int rows = 2 * cfg_.num_queries * cfg_.prompt_len + static_cast<int>(g_tokens.size());
  Mat x(rows, d);
  int r = 0;
  for (int i = 0; i < cfg_.num_queries; ++i) {
    x.middleRows(r, cfg_.prompt_len) = params_.value(theta_pre_[static_cast<size_t>(i)]);
    r += cfg_.prompt_len;
  }
  for (int tok : g_tokens) x.row(r++) = params_.value(tok_emb_).row(tok);
  for (int i = 0; i < cfg_.num_queries; ++i) {
    x.middleRows(r, cfg_.prompt_len) = params_.value(theta_pos_[static_cast<size_t>(i)]);
    r += cfg_.prompt_len;
  }
  x += positional_encoding(rows, d);
  for (const auto& blk : enc_blocks_) x = block_infer(params_, blk, x, /*causal=*/false);
  return layer_norm_infer(params_, enc_ln_, x);
}

Mat Reasoner::psi_c_branch(const Mat& z) const {
  if (!cfg_.use_psi_c) return Mat::Zero(z.rows(), z.cols());
  return attention_infer(params_, psi_c_, z, z, /*causal=*/true);
}

Mat Reasoner::psi_g_branch(const Mat& z) const {
  if (!cfg_.use_psi_g) return Mat::Zero(z.rows(), z.cols());
  Mat g = attention_infer(params_, psi_g_, z, z, /*causal=*/false);
  const Mat gate = params_.value(gate_w_);
  Eigen::RowVectorXd s = (1.0 / (1.0 + (-gate.row(0).array()).exp()));
  return g.array().rowwise() * s.array();
}

std::vector<double> Reasoner::gate_values() const {
  std::vector<double> out;
  if (!cfg_.use_psi_g) return out;
  const Mat& w = params_.value(gate_w_);
  for (int i = 0; i < w.cols(); ++i) out.push_back(1.0 / (1.0 + std::exp(-w(0, i))));
  return out;
}

Mat Reasoner::attend(const Mat& z) const {
  if (!cfg_.use_psi_c && !cfg_.use_psi_g) return z;
  Mat sum = Mat::Zero(z.rows(), z.cols());
  bool any = false;
  if (cfg_.use_psi_c) {
    sum += psi_c_branch(z);
    any = true;
  }
  if (cfg_.use_psi_g) {
    sum += psi_g_branch(z);
    any = true;
  }
  if (!any) return z;
  return z + cfg_.alpha * sum;
}

std::vector<int> Reasoner::decode_stream(int stream, const Mat& zhat) const {
  const int d = cfg_.model_dim;
  std::vector<CrossKV> cross;
  for (const auto& blk : dec_blocks_) cross.push_back(make_cross_kv(params_, blk.cross, zhat));
  std::vector<SelfCache> caches(dec_blocks_.size());

  Mat prefix(cfg_.prompt_len + 1, d);
  prefix.topRows(cfg_.prompt_len) = params_.value(theta_dec_[static_cast<size_t>(stream)]);
  prefix.row(cfg_.prompt_len) = params_.value(tok_emb_).row(vocab_->marker(stream));
  prefix += positional_encoding(cfg_.prompt_len + 1, d);

  Mat x = prefix;
  for (size_t l = 0; l < dec_blocks_.size(); ++l)
    x = dec_block_infer(params_, dec_blocks_[l], x, caches[l], cross[l]);
  Mat last = layer_norm_infer(params_, dec_ln_, x.bottomRows(1));

  std::vector<int> out;
  int pos = cfg_.prompt_len + 1;
  for (int stepi = 0; stepi < cfg_.max_rationale_tokens; ++stepi) {
    Eigen::RowVectorXd logits = last.row(0) * params_.value(tok_emb_).transpose();
    int best = 0;
    for (int i = 1; i < logits.size(); ++i)
      if (logits(i) > logits(best)) best = i;
    if (best == Vocab::kEos) break;
    out.push_back(best);
    Mat row = params_.value(tok_emb_).row(best);
    row += positional_encoding(1, d, pos++);
    Mat h = row;
    for (size_t l = 0; l < dec_blocks_.size(); ++l)
      h = dec_block_infer(params_, dec_blocks_[l], h, caches[l], cross[l]);
    last = layer_norm_infer(params_, dec_ln_, h);
  }
  return out;
}

std::vector<std::vector<int>> Reasoner::decode_rationales(const std::vector<int>& g_tokens) const {
  const Mat z = encode(g_tokens);
  ++counters_.encoder_passes;
  const Mat zhat = attend(z);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < cfg_.num_queries; ++i) out.push_back(decode_stream(i, zhat));
  ++counters_.decoder_passes;  // one batched pass over all streams
  ++counters_.reasoning_invocations;
  return out;
}

std::vector<std::vector<int>> Reasoner::decode_rationales_iterative(
    const std::vector<int>& g_tokens) const {
  std::vector<std::vector<int>> out;
  for (int i = 0; i < cfg_.num_queries; ++i) {
    const Mat z = encode(g_tokens);
    ++counters_.encoder_passes;
    const Mat zhat = attend(z);
    out.push_back(decode_stream(i, zhat));
    ++counters_.decoder_passes;
    ++counters_.reasoning_invocations;
  }
  return out;
}

double Reasoner::rationale_nll(const std::vector<int>& g_tokens,
                               const std::vector<std::vector<int>>& targets) const {
  Tape t;
  ParamStore& ps = const_cast<ParamStore&>(params_);
  Bind b(t, ps);
  const int z = encode_node(t, b, g_tokens);
  const int zhat = attend_node(t, b, z);
  const int loss = rationale_nll_node(t, b, zhat, targets);
  return t.val(loss)(0, 0);
}

double Reasoner::rationale_nll_infer(const std::vector<int>& g_tokens,
                                     const std::vector<std::vector<int>>& targets) const {
  const Mat zhat = attend(encode(g_tokens));
  const int d = cfg_.model_dim;
  double total = 0.0;
  for (int i = 0; i < cfg_.num_queries; ++i) {
    const auto& tgt = targets[static_cast<size_t>(i)];
    std::vector<CrossKV> cross;
    for (const auto& blk : dec_blocks_) cross.push_back(make_cross_kv(params_, blk.cross, zhat));
    std::vector<SelfCache> caches(dec_blocks_.size());

    const int teacher_rows = static_cast<int>(tgt.size()) - 1;
    Mat x(cfg_.prompt_len + 1 + teacher_rows, d);
    x.topRows(cfg_.prompt_len) = params_.value(theta_dec_[static_cast<size_t>(i)]);
    x.row(cfg_.prompt_len) = params_.value(tok_emb_).row(vocab_->marker(i));
    for (int r = 0; r < teacher_rows; ++r)
      x.row(cfg_.prompt_len + 1 + r) = params_.value(tok_emb_).row(tgt[static_cast<size_t>(r)]);
    x += positional_encoding(static_cast<int>(x.rows()), d);
    for (size_t l = 0; l < dec_blocks_.size(); ++l)
      x = dec_block_infer(params_, dec_blocks_[l], x, caches[l], cross[l]);
    const Mat h = layer_norm_infer(params_, dec_ln_, x.bottomRows(teacher_rows + 1));
    const Mat logits = h * params_.value(tok_emb_).transpose();
    for (int r = 0; r < logits.rows(); ++r) {
      const double mx = logits.row(r).maxCoeff();
      const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
      total += lse - logits(r, tgt[static_cast<size_t>(r)]);
    }
  }
  return total;
}

}  // namespace rplan::model
