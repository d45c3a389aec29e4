#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rplan/model/tensor.hpp"

namespace rplan::model {

struct LinearP {
  int w = -1;  // in x out
  int b = -1;  // 1 x out
};

struct LayerNormP {
  int gain = -1;
  int bias = -1;
};

struct AttnP {
  LinearP q, k, v, o;
  int heads = 1;
};

struct FfnP {
  LinearP in, out;
};

// pre-LN transformer block: x += Attn(LN(x)); x += FFN(LN(x))
struct BlockP {
  LayerNormP ln1;
  AttnP attn;
  LayerNormP ln2;
  FfnP ffn;
};

// decoder block with cross-attention between self-attention and the FFN
struct DecBlockP {
  LayerNormP ln1;
  AttnP self_attn;
  LayerNormP lnx;
  AttnP cross;
  LayerNormP ln2;
  FfnP ffn;
};

LinearP add_linear(ParamStore& ps, const std::string& name, int in, int out,
                   std::uint64_t seed, double stddev);
LayerNormP add_layer_norm(ParamStore& ps, const std::string& name, int dim);
AttnP add_attention(ParamStore& ps, const std::string& name, int dim, int heads,
                    std::uint64_t seed, double stddev);
BlockP add_block(ParamStore& ps, const std::string& name, int dim, int heads, int ff_dim,
                 std::uint64_t seed, double stddev);
DecBlockP add_dec_block(ParamStore& ps, const std::string& name, int dim, int heads,
                        int ff_dim, std::uint64_t seed, double stddev);

// ---- tape forward ----
int linear(Tape& t, Bind& b, const LinearP& p, int x);
int layer_norm_f(Tape& t, Bind& b, const LayerNormP& p, int x);
int attention(Tape& t, Bind& b, const AttnP& p, int x_q, int x_kv, bool causal);
struct CrossNodes {
  int k = -1, v = -1;
};
CrossNodes cross_kv_nodes(Tape& t, Bind& b, const AttnP& p, int memory);
int cross_attention(Tape& t, Bind& b, const AttnP& p, int x_q, const CrossNodes& kv);
int block(Tape& t, Bind& b, const BlockP& p, int x, bool causal);
int dec_block(Tape& t, Bind& b, const DecBlockP& p, int x, const CrossNodes& kv);

// ---- inference forward (same math, no tape) ----
Mat linear_infer(const ParamStore& ps, const LinearP& p, const Mat& x);
Mat layer_norm_infer(const ParamStore& ps, const LayerNormP& p, const Mat& x);
Mat attention_infer(const ParamStore& ps, const AttnP& p, const Mat& x_q, const Mat& x_kv,
                    bool causal);
Mat block_infer(const ParamStore& ps, const BlockP& p, const Mat& x, bool causal);

// incremental decoding state for one stream and one layer
struct SelfCache {
  Mat k, v;  // grows by one row per generated position
};
struct CrossKV {
  Mat k, v;
};
CrossKV make_cross_kv(const ParamStore& ps, const AttnP& p, const Mat& memory);
// processes `x_new` rows (appended after the cached prefix), causal within
// the stream; returns block output rows for the new positions
Mat dec_block_infer(const ParamStore& ps, const DecBlockP& p, const Mat& x_new,
                    SelfCache& cache, const CrossKV& cross);

Mat positional_encoding(int n, int dim, int offset = 0);
Mat causal_mask(int n);  // 0 on/below diagonal, -inf above

}  // namespace rplan::model
