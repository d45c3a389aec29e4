#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rplan/model/checkpoint.hpp"
#include "rplan/model/reasoner.hpp"
#include "rplan/model/vocab.hpp"
#include "rplan/util/errors.hpp"
#include "rplan/util/rng.hpp"

using namespace rplan;
using namespace rplan::model;

namespace {

ReasonerConfig small_cfg() {
  ReasonerConfig c;
  c.model_dim = 32;
  c.ff_dim = 48;
  c.heads = 4;
  c.prompt_len = 5;
  c.max_rationale_tokens = 12;
  return c;
}

// ---- straight-line reference forward, no batching tricks ----

Mat naive_linear(const ParamStore& ps, const std::string& name, const Mat& x) {
  const Mat& w = ps.value(ps.index_of(name + ".w"));
  const Mat& b = ps.value(ps.index_of(name + ".b"));
  Mat out = Mat::Zero(x.rows(), w.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) {
      double s = b(0, j);
      for (int k = 0; k < x.cols(); ++k) s += x(i, k) * w(k, j);
      out(i, j) = s;
    }
  return out;
}

Mat naive_ln(const ParamStore& ps, const std::string& name, const Mat& x) {
  const Mat& gain = ps.value(ps.index_of(name + ".gain"));
  const Mat& bias = ps.value(ps.index_of(name + ".bias"));
  Mat out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (int j = 0; j < x.cols(); ++j) mean += x(i, j);
    mean /= x.cols();
    double var = 0.0;
    for (int j = 0; j < x.cols(); ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= x.cols();
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    for (int j = 0; j < x.cols(); ++j)
      out(i, j) = (x(i, j) - mean) * inv * gain(0, j) + bias(0, j);
  }
  return out;
}

Mat naive_attention(const ParamStore& ps, const std::string& name, const Mat& xq,
                    const Mat& xkv, int heads, bool causal) {
  const Mat q = naive_linear(ps, name + ".q", xq);
  const Mat k = naive_linear(ps, name + ".k", xkv);
  const Mat v = naive_linear(ps, name + ".v", xkv);
  const int dh = static_cast<int>(q.cols()) / heads;
  Mat merged(q.rows(), q.cols());
  for (int h = 0; h < heads; ++h) {
    for (int i = 0; i < q.rows(); ++i) {
      const int limit = causal ? i : static_cast<int>(k.rows()) - 1;
      std::vector<double> scores;
      for (int j = 0; j <= limit; ++j) {
        double s = 0.0;
        for (int c = 0; c < dh; ++c) s += q(i, h * dh + c) * k(j, h * dh + c);
        scores.push_back(s / std::sqrt(static_cast<double>(dh)));
      }
      double mx = scores[0];
      for (double s : scores) mx = std::max(mx, s);
      double denom = 0.0;
      for (double& s : scores) {
        s = std::exp(s - mx);
        denom += s;
      }
      for (int c = 0; c < dh; ++c) {
        double acc = 0.0;
        for (size_t j = 0; j < scores.size(); ++j)
          acc += scores[j] / denom * v(static_cast<int>(j), h * dh + c);
        merged(i, h * dh + c) = acc;
      }
    }
  }
  return naive_linear(ps, name + ".o", merged);
}

Mat naive_gelu(const Mat& x) {
  Mat out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) {
      const double u = 0.7978845608028654 * (x(i, j) + 0.044715 * std::pow(x(i, j), 3));
      out(i, j) = 0.5 * x(i, j) * (1.0 + std::tanh(u));
    }
  return out;
}

Mat naive_block(const ParamStore& ps, const std::string& name, const Mat& x, int heads,
                bool causal) {
  const Mat n1 = naive_ln(ps, name + ".ln1", x);
  Mat h = x + naive_attention(ps, name + ".attn", n1, n1, heads, causal);
  const Mat n2 = naive_ln(ps, name + ".ln2", h);
  h += naive_linear(ps, name + ".ffn.out", naive_gelu(naive_linear(ps, name + ".ffn.in", n2)));
  return h;
}

Mat naive_encode(const Reasoner& r, const std::vector<int>& tokens) {
  const auto& c = r.config();
  const auto& ps = r.params();
  const int rows = 2 * c.num_queries * c.prompt_len + static_cast<int>(tokens.size());
  Mat x(rows, c.model_dim);
  int row = 0;
  for (int i = 0; i < c.num_queries; ++i) {
    x.middleRows(row, c.prompt_len) = ps.value(ps.index_of("theta_pre." + std::to_string(i)));
    row += c.prompt_len;
  }
  const Mat& emb = ps.value(ps.index_of("tok_emb"));
  for (int tok : tokens) x.row(row++) = emb.row(tok);
  for (int i = 0; i < c.num_queries; ++i) {
    x.middleRows(row, c.prompt_len) = ps.value(ps.index_of("theta_pos." + std::to_string(i)));
    row += c.prompt_len;
  }
  x += positional_encoding(rows, c.model_dim);
  for (int l = 0; l < c.enc_layers; ++l)
    x = naive_block(ps, "enc." + std::to_string(l), x, c.heads, false);
  return naive_ln(ps, "enc.final_ln", x);
}

}  // namespace

TEST_CASE("vocab: ids are bijective and text round-trips through decode") {
  const auto v = Vocab::domain();
  for (int i = 0; i < v.size(); ++i) CHECK(v.id(v.token(i)) == i);
  const std::string text = "Therefore the next plan is to pick up the Cup-1 from the SideTable.";
  CHECK(v.decode(v.encode(text)) == text);
  const std::string tri = "(Cup-2, In, Fridge). (Agent, At, Sink).";
  CHECK(v.decode(v.encode(tri)) == tri);
  CHECK_THROWS_AS(v.encode("flibbertigibbet"), VocabError);
}

TEST_CASE("encode: empty graph text gives exactly the 2mL prompt rows") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 42);
  const Mat z = r.encode({});
  CHECK(z.rows() == 2 * r.config().num_queries * r.config().prompt_len);
  CHECK(z.cols() == r.config().model_dim);
  const auto toks = v.encode("(Agent, At, Sink).");
  const Mat z2 = r.encode(toks);
  CHECK(z2.rows() == z.rows() + static_cast<int>(toks.size()));
}

TEST_CASE("encode: deterministic and equal to the straight-line reference") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 42);
  const auto toks = v.encode("(Task, Object, Mug). (Mug, On, SideTable). (Agent, At, Sink).");
  const Mat a = r.encode(toks);
  const Mat b = r.encode(toks);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Mat ref = naive_encode(r, toks);
  CHECK((a - ref).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("encode path on tape matches inference path") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 7);
  const auto toks = v.encode("(Agent, At, Fridge). (Apple, In, Fridge).");
  Tape t;
  Bind b(t, r.params());
  const int z = r.encode_node(t, b, toks);
  const int zhat = r.attend_node(t, b, z);
  CHECK((t.val(z) - r.encode(toks)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((t.val(zhat) - r.attend(r.encode(toks))).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("attend: alpha = 0 is the exact identity") {
  const auto v = Vocab::domain();
  auto cfg = small_cfg();
  cfg.alpha = 0.0;
  Reasoner r(v, cfg, 3);
  const Mat z = randn(20, cfg.model_dim, 99, 1.0);
  const Mat zhat = r.attend(z);
  CHECK((zhat - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("attend: removing both branches removes the alpha path") {
  const auto v = Vocab::domain();
  auto cfg = small_cfg();
  cfg.use_psi_c = false;
  cfg.use_psi_g = false;
  Reasoner r(v, cfg, 3);
  const Mat z = randn(12, cfg.model_dim, 5, 1.0);
  CHECK((r.attend(z) - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("psi_c: strict causal mask, prefix unaffected by suffix changes") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 11);
  const Mat z = randn(16, 32, 13, 1.0);
  const Mat base = r.psi_c_branch(z);
  for (int j : {5, 10, 15}) {
    Mat pert = z;
    pert.row(j).array() += 3.0;
    const Mat out = r.psi_c_branch(pert);
    CHECK((out.topRows(j) - base.topRows(j)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.row(j) - base.row(j)).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("psi_g gate values lie in (0, 1)") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 17);
  const auto gates = r.gate_values();
  REQUIRE(gates.size() == 32);
  for (double g : gates) {
    CHECK(g > 0.0);
    CHECK(g < 1.0);
  }
}

TEST_CASE("attend matches a naive attention oracle within 1e-6") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 23);
  const Mat z = randn(24, 32, 29, 0.7);
  const auto& ps = r.params();
  const Mat psi_c = naive_attention(ps, "psi_c", z, z, 4, true);
  Mat psi_g = naive_attention(ps, "psi_g", z, z, 4, false);
  const Mat& w = ps.value(ps.index_of("psi_g.gate"));
  for (int i = 0; i < psi_g.rows(); ++i)
    for (int j = 0; j < psi_g.cols(); ++j) psi_g(i, j) *= 1.0 / (1.0 + std::exp(-w(0, j)));
  const Mat expected = z + r.config().alpha * (psi_c + psi_g);
  CHECK((r.attend(z) - expected).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("decode_rationales: shapes, counters and the single-step contract") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 31);
  const auto toks = v.encode("(Task, Object, Mug). (Agent, At, Sink).");

  r.counters() = {};
  const auto streams = r.decode_rationales(toks);
  REQUIRE(static_cast<int>(streams.size()) == r.config().num_queries);
  for (const auto& s : streams)
    CHECK(static_cast<int>(s.size()) <= r.config().max_rationale_tokens);
  CHECK(r.counters().encoder_passes == 1);
  CHECK(r.counters().decoder_passes == 1);
  CHECK(r.counters().reasoning_invocations == 1);

  r.counters() = {};
  const auto iterative = r.decode_rationales_iterative(toks);
  CHECK(r.counters().encoder_passes == r.config().num_queries);
  CHECK(r.counters().reasoning_invocations == r.config().num_queries);
  // streams are independent given the shared memory, so outputs agree
  REQUIRE(iterative.size() == streams.size());
  for (size_t i = 0; i < streams.size(); ++i) CHECK(iterative[i] == streams[i]);
}

TEST_CASE("tape and cached-inference forwards compute the same loss") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 37);
  const auto toks = v.encode("(Apple, On, DiningTable). (Agent, At, DiningTable).");
  // teacher-force the model's own greedy output plus a fixed template
  const auto streams = r.decode_rationales(toks);
  std::vector<std::vector<int>> targets;
  for (int i = 0; i < r.config().num_queries; ++i) {
    auto s = streams[static_cast<size_t>(i)];
    if (s.empty()) s = v.encode("the Mug is heated");
    s.push_back(Vocab::kEos);
    targets.push_back(std::move(s));
  }
  const double tape_nll = r.rationale_nll(toks, targets);
  const double infer_nll = r.rationale_nll_infer(toks, targets);
  CHECK(tape_nll == doctest::Approx(infer_nll).epsilon(1e-9));
}

TEST_CASE("rationale_nll: nonnegative, and exact under uniform logits") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 41);
  const auto toks = v.encode("(Agent, At, Sink).");
  std::vector<std::vector<int>> targets;
  int total_tokens = 0;
  for (int i = 0; i < r.config().num_queries; ++i) {
    auto t = v.encode("the Mug is heated");
    t.push_back(Vocab::kEos);
    total_tokens += static_cast<int>(t.size());
    targets.push_back(std::move(t));
  }
  const double nll = r.rationale_nll(toks, targets);
  CHECK(nll >= 0.0);

  // zero embedding table -> all logits zero -> exactly uniform distribution
  auto& ps = r.params();
  ps.value(ps.index_of("tok_emb")).setZero();
  const double uniform = r.rationale_nll(toks, targets);
  CHECK(uniform ==
        doctest::Approx(total_tokens * std::log(static_cast<double>(v.size()))).epsilon(1e-9));
}

TEST_CASE("checkpoint: bitwise round trip and corrupt-file rejection") {
  const auto v = Vocab::domain();
  Reasoner r(v, small_cfg(), 53);
  const auto toks = v.encode("(Task, Target, Drawer). (Agent, At, Drawer).");
  const Mat before = r.attend(r.encode(toks));
  const auto streams_before = r.decode_rationales(toks);

  const std::string path = "/tmp/rplan_test_reasoner.ckpt";
  save_reasoner(path, r);
  auto loaded = load_reasoner(path, v);
  const Mat after = loaded->attend(loaded->encode(toks));
  CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded->decode_rationales(toks) == streams_before);

  // truncated file
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out("/tmp/rplan_trunc.ckpt", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_reasoner("/tmp/rplan_trunc.ckpt", v), CheckpointError);

  {
    std::ofstream out("/tmp/rplan_badmagic.ckpt", std::ios::binary);
    out << "NOTACKPTxxxxxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(load_reasoner("/tmp/rplan_badmagic.ckpt", v), CheckpointError);
  std::remove(path.c_str());
  std::remove("/tmp/rplan_trunc.ckpt");
  std::remove("/tmp/rplan_badmagic.ckpt");
}
