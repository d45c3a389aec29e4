#include "rplan/train/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "rplan/model/planner.hpp"
#include "rplan/model/reasoner.hpp"
#include "rplan/train/contrastive.hpp"
#include "rplan/util/errors.hpp"
#include "rplan/util/rng.hpp"

namespace rplan::train {

namespace {

model::Vocab toy_vocab() {
  std::vector<std::string> toks = {"<pad>", "<bos>", "<eos>", "<go>", "<sep>"};
  for (int i = 0; i < 7; ++i) toks.push_back("<r" + std::to_string(i + 1) + ">");
  for (const char* w : {"a", "b", "c", "d", "e", "f", "g", "h"}) toks.push_back(w);
  return model::Vocab::from_tokens(std::move(toks));
}

model::ReasonerConfig toy_reasoner_cfg() {
  model::ReasonerConfig c;
  c.model_dim = 8;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.heads = 2;
  c.ff_dim = 12;
  c.prompt_len = 2;
  c.num_queries = 2;
  c.init_std = 0.3;  // keep activations lively at toy scale
  return c;
}

std::vector<int> toy_tokens(std::mt19937_64& rng, const model::Vocab& v, int n) {
  std::uniform_int_distribution<int> pick(12, v.size() - 1);  // content tokens only
  std::vector<int> out;
  for (int i = 0; i < n; ++i) out.push_back(pick(rng));
  return out;
}

// worst |analytic - numeric| / max(|analytic|, |numeric|, 1) over all params
double check_against(model::ParamStore& ps, const std::function<double()>& loss_fn,
                     const std::function<double()>& loss_and_grads) {
  ps.zero_grads();
  loss_and_grads();
  std::vector<model::Mat> analytic;
  for (int i = 0; i < ps.count(); ++i) analytic.push_back(ps.grad(i));

  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < ps.count(); ++i) {
    model::Mat& value = ps.value(i);
    for (int r = 0; r < value.rows(); ++r) {
      for (int c = 0; c < value.cols(); ++c) {
        const double saved = value(r, c);
        value(r, c) = saved + h;
        const double up = loss_fn();
        value(r, c) = saved - h;
        const double down = loss_fn();
        value(r, c) = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[static_cast<size_t>(i)](r, c);
        const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1.0});
        worst = std::max(worst, err);
      }
    }
  }
  return worst;
}

}  // namespace

double grad_check(LossKind kind, std::uint64_t seed) {
  const auto vocab = toy_vocab();
  auto rng = make_rng(seed, "gradcheck");

  if (kind == LossKind::Plan) {
    model::PlannerConfig cfg;
    cfg.model_dim = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.ff_dim = 12;
    cfg.init_std = 0.3;
    model::Planner p(vocab, cfg, seed);
    const auto ctx = toy_tokens(rng, vocab, 6);
    const auto plan = toy_tokens(rng, vocab, 3);
    auto loss = [&] { return p.nll(ctx, plan); };
    auto loss_grads = [&] {
      model::Tape t;
      model::Bind b(t, p.params());
      const int node = p.nll_node(t, b, ctx, plan);
      t.backward(node);
      b.harvest_grads();
      return t.val(node)(0, 0);
    };
    return check_against(p.params(), loss, loss_grads);
  }

  model::Reasoner r(vocab, toy_reasoner_cfg(), seed);
  const auto g_tokens = toy_tokens(rng, vocab, 4);

  if (kind == LossKind::Rationale) {
    std::vector<std::vector<int>> targets;
    for (int i = 0; i < r.config().num_queries; ++i) {
      auto t = toy_tokens(rng, vocab, 3);
      t.push_back(model::Vocab::kEos);
      targets.push_back(std::move(t));
    }
    auto loss = [&] { return r.rationale_nll(g_tokens, targets); };
    auto loss_grads = [&] {
      model::Tape t;
      model::Bind b(t, r.params());
      const int node =
          r.rationale_nll_node(t, b, r.attend_node(t, b, r.encode_node(t, b, g_tokens)), targets);
      t.backward(node);
      b.harvest_grads();
      return t.val(node)(0, 0);
    };
    return check_against(r.params(), loss, loss_grads);
  }

  // Contrastive: a large margin keeps the hinge active and away from its kink
  const auto pos_tokens = toy_tokens(rng, vocab, 4);
  const auto neg_tokens = toy_tokens(rng, vocab, 5);
  const double margin = 5.0;
  auto build = [&](model::Tape& t, model::Bind& b) {
    const int za = r.attend_node(t, b, r.encode_node(t, b, g_tokens));
    return contrastive_term_node(t, b, r, za, pos_tokens, neg_tokens, margin);
  };
  auto loss = [&] {
    model::Tape t;
    model::Bind b(t, r.params());
    return t.val(build(t, b))(0, 0);
  };
  auto loss_grads = [&] {
    model::Tape t;
    model::Bind b(t, r.params());
    const int node = build(t, b);
    t.backward(node);
    b.harvest_grads();
    return t.val(node)(0, 0);
  };
  const double base = loss();
  if (base <= 0.5) throw IntegrityError("contrastive toy config must keep the hinge active");
  return check_against(r.params(), loss, loss_grads);
}

}  // namespace rplan::train
