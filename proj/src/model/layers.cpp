#include "rplan/model/layers.hpp"

#include <cmath>
#include <limits>

#include "rplan/util/rng.hpp"

namespace rplan::model {

namespace {
constexpr double kLnEps = 1e-5;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

LinearP add_linear(ParamStore& ps, const std::string& name, int in, int out,
                   std::uint64_t seed, double stddev) {
  LinearP p;
  p.w = ps.add(name + ".w", randn(in, out, mix_seed(seed, name + ".w"), stddev));
  p.b = ps.add(name + ".b", Mat::Zero(1, out));
  return p;
}

LayerNormP add_layer_norm(ParamStore& ps, const std::string& name, int dim) {
  LayerNormP p;
  p.gain = ps.add(name + ".gain", Mat::Ones(1, dim));
  p.bias = ps.add(name + ".bias", Mat::Zero(1, dim));
  return p;
}

AttnP add_attention(ParamStore& ps, const std::string& name, int dim, int heads,
                    std::uint64_t seed, double stddev) {
  AttnP p;
  p.q = add_linear(ps, name + ".q", dim, dim, seed, stddev);
  p.k = add_linear(ps, name + ".k", dim, dim, seed, stddev);
  p.v = add_linear(ps, name + ".v", dim, dim, seed, stddev);
  p.o = add_linear(ps, name + ".o", dim, dim, seed, stddev);
  p.heads = heads;
  return p;
}

BlockP add_block(ParamStore& ps, const std::string& name, int dim, int heads, int ff_dim,
                 std::uint64_t seed, double stddev) {
  BlockP p;
  p.ln1 = add_layer_norm(ps, name + ".ln1", dim);
  p.attn = add_attention(ps, name + ".attn", dim, heads, seed, stddev);
  p.ln2 = add_layer_norm(ps, name + ".ln2", dim);
  p.ffn.in = add_linear(ps, name + ".ffn.in", dim, ff_dim, seed, stddev);
  p.ffn.out = add_linear(ps, name + ".ffn.out", ff_dim, dim, seed, stddev);
  return p;
}

DecBlockP add_dec_block(ParamStore& ps, const std::string& name, int dim, int heads,
                        int ff_dim, std::uint64_t seed, double stddev) {
  DecBlockP p;
  p.ln1 = add_layer_norm(ps, name + ".ln1", dim);
  p.self_attn = add_attention(ps, name + ".self", dim, heads, seed, stddev);
  p.lnx = add_layer_norm(ps, name + ".lnx", dim);
  p.cross = add_attention(ps, name + ".cross", dim, heads, seed, stddev);
  p.ln2 = add_layer_norm(ps, name + ".ln2", dim);
  p.ffn.in = add_linear(ps, name + ".ffn.in", dim, ff_dim, seed, stddev);
  p.ffn.out = add_linear(ps, name + ".ffn.out", ff_dim, dim, seed, stddev);
  return p;
}

Mat causal_mask(int n) {
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m(i, j) = -kInf;
  return m;
}

Mat positional_encoding(int n, int dim, int offset) {
  Mat pe(n, dim);
  for (int pos = 0; pos < n; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      const double angle = (pos + offset) / std::pow(10000.0, static_cast<double>(i) / dim);
      pe(pos, i) = std::sin(angle);
      if (i + 1 < dim) pe(pos, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

// ---- tape forward ----

int linear(Tape& t, Bind& b, const LinearP& p, int x) {
  return t.add_rowvec(t.matmul(x, b(p.w)), b(p.b));
}

int layer_norm_f(Tape& t, Bind& b, const LayerNormP& p, int x) {
  return t.layer_norm(x, b(p.gain), b(p.bias));
}

namespace {

int heads_attend(Tape& t, int q, int k, int v, int heads, const Mat* mask) {
  const int dim = static_cast<int>(t.val(q).cols());
  const int dh = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<int> outs;
  outs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const int qh = t.slice_cols(q, h * dh, dh);
    const int kh = t.slice_cols(k, h * dh, dh);
    const int vh = t.slice_cols(v, h * dh, dh);
    const int scores = t.scale(t.matmul_nt(qh, kh), scale);
    const int sm = t.softmax_rows(scores, mask);
    outs.push_back(t.matmul(sm, vh));
  }
  return t.concat_cols(outs);
}

}  // namespace

int attention(Tape& t, Bind& b, const AttnP& p, int x_q, int x_kv, bool causal) {
  const int q = linear(t, b, p.q, x_q);
  const int k = linear(t, b, p.k, x_kv);
  const int v = linear(t, b, p.v, x_kv);
  Mat mask;
  if (causal) mask = causal_mask(static_cast<int>(t.val(x_q).rows()));
  const int merged = heads_attend(t, q, k, v, p.heads, causal ? &mask : nullptr);
  return linear(t, b, p.o, merged);
}

CrossNodes cross_kv_nodes(Tape& t, Bind& b, const AttnP& p, int memory) {
  CrossNodes kv;
  kv.k = linear(t, b, p.k, memory);
  kv.v = linear(t, b, p.v, memory);
  return kv;
}

int cross_attention(Tape& t, Bind& b, const AttnP& p, int x_q, const CrossNodes& kv) {
  const int q = linear(t, b, p.q, x_q);
  const int merged = heads_attend(t, q, kv.k, kv.v, p.heads, nullptr);
  return linear(t, b, p.o, merged);
}

int block(Tape& t, Bind& b, const BlockP& p, int x, bool causal) {
  const int n1 = layer_norm_f(t, b, p.ln1, x);
  int h = t.add(x, attention(t, b, p.attn, n1, n1, causal));
  const int n2 = layer_norm_f(t, b, p.ln2, h);
  h = t.add(h, linear(t, b, p.ffn.out, t.gelu(linear(t, b, p.ffn.in, n2))));
  return h;
}

int dec_block(Tape& t, Bind& b, const DecBlockP& p, int x, const CrossNodes& kv) {
  const int n1 = layer_norm_f(t, b, p.ln1, x);
  int h = t.add(x, attention(t, b, p.self_attn, n1, n1, true));
  const int nx = layer_norm_f(t, b, p.lnx, h);
  h = t.add(h, cross_attention(t, b, p.cross, nx, kv));
  const int n2 = layer_norm_f(t, b, p.ln2, h);
  h = t.add(h, linear(t, b, p.ffn.out, t.gelu(linear(t, b, p.ffn.in, n2))));
  return h;
}

// ---- inference forward ----

Mat linear_infer(const ParamStore& ps, const LinearP& p, const Mat& x) {
  Mat out = x * ps.value(p.w);
  out.rowwise() += ps.value(p.b).row(0);
  return out;
}

Mat layer_norm_infer(const ParamStore& ps, const LayerNormP& p, const Mat& x) {
  Eigen::VectorXd mean = x.rowwise().mean();
  Mat centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.array().square().rowwise().mean();
  Eigen::VectorXd inv_std = (var.array() + kLnEps).rsqrt();
  Mat xhat = centered.array().colwise() * inv_std.array();
  return (xhat.array().rowwise() * ps.value(p.gain).row(0).array()).rowwise() +
         ps.value(p.bias).row(0).array();
}

namespace {

Mat heads_attend_infer(const Mat& q, const Mat& k, const Mat& v, int heads, const Mat* mask) {
  const int dh = static_cast<int>(q.cols()) / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat out(q.rows(), q.cols());
  for (int h = 0; h < heads; ++h) {
    Mat scores = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose() * scale;
    if (mask) scores += *mask;
    Eigen::VectorXd mx = scores.rowwise().maxCoeff();
    Mat e = (scores.colwise() - mx).array().exp();
    Eigen::VectorXd sums = e.rowwise().sum();
    Mat sm = e.array().colwise() / sums.array();
    out.middleCols(h * dh, dh) = sm * v.middleCols(h * dh, dh);
  }
  return out;
}

}  // namespace

Mat attention_infer(const ParamStore& ps, const AttnP& p, const Mat& x_q, const Mat& x_kv,
                    bool causal) {
  const Mat q = linear_infer(ps, p.q, x_q);
  const Mat k = linear_infer(ps, p.k, x_kv);
  const Mat v = linear_infer(ps, p.v, x_kv);
  Mat mask;
  if (causal) mask = causal_mask(static_cast<int>(x_q.rows()));
  return linear_infer(ps, p.o, heads_attend_infer(q, k, v, p.heads, causal ? &mask : nullptr));
}

Mat block_infer(const ParamStore& ps, const BlockP& p, const Mat& x, bool causal) {
  const Mat n1 = layer_norm_infer(ps, p.ln1, x);
  Mat h = x + attention_infer(ps, p.attn, n1, n1, causal);
  const Mat n2 = layer_norm_infer(ps, p.ln2, h);
  Mat ff = linear_infer(ps, p.ffn.in, n2);
  // gelu, tanh approximation (matches Tape::gelu)
  Mat u = 0.7978845608028654 * (ff.array() + 0.044715 * ff.array().cube());
  ff = 0.5 * ff.array() * (1.0 + u.array().tanh());
  h += linear_infer(ps, p.ffn.out, ff);
  return h;
}

CrossKV make_cross_kv(const ParamStore& ps, const AttnP& p, const Mat& memory) {
  return CrossKV{linear_infer(ps, p.k, memory), linear_infer(ps, p.v, memory)};
}

Mat dec_block_infer(const ParamStore& ps, const DecBlockP& p, const Mat& x_new,
                    SelfCache& cache, const CrossKV& cross) {
  const Mat n1 = layer_norm_infer(ps, p.ln1, x_new);
  const Mat q = linear_infer(ps, p.self_attn.q, n1);
  const Mat k_new = linear_infer(ps, p.self_attn.k, n1);
  const Mat v_new = linear_infer(ps, p.self_attn.v, n1);
  const int prev = static_cast<int>(cache.k.rows());
  if (prev == 0) {
    cache.k = k_new;
    cache.v = v_new;
  } else {
    cache.k.conservativeResize(prev + k_new.rows(), Eigen::NoChange);
    cache.k.bottomRows(k_new.rows()) = k_new;
    cache.v.conservativeResize(prev + v_new.rows(), Eigen::NoChange);
    cache.v.bottomRows(v_new.rows()) = v_new;
  }
  // causal over the cached prefix: new row i may attend to <= prev + i
  const int n = static_cast<int>(x_new.rows());
  const int total = static_cast<int>(cache.k.rows());
  Mat mask = Mat::Zero(n, total);
  for (int i = 0; i < n; ++i)
    for (int j = prev + i + 1; j < total; ++j) mask(i, j) = -kInf;
  Mat self = heads_attend_infer(q, cache.k, cache.v, p.self_attn.heads, &mask);
  Mat h = x_new + linear_infer(ps, p.self_attn.o, self);

  const Mat nx = layer_norm_infer(ps, p.lnx, h);
  const Mat qx = linear_infer(ps, p.cross.q, nx);
  Mat cx = heads_attend_infer(qx, cross.k, cross.v, p.cross.heads, nullptr);
  h += linear_infer(ps, p.cross.o, cx);

  const Mat n2 = layer_norm_infer(ps, p.ln2, h);
  Mat ff = linear_infer(ps, p.ffn.in, n2);
  Mat u = 0.7978845608028654 * (ff.array() + 0.044715 * ff.array().cube());
  ff = 0.5 * ff.array() * (1.0 + u.array().tanh());
  h += linear_infer(ps, p.ffn.out, ff);
  return h;
}

}  // namespace rplan::model
