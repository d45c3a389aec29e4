#include "rplan/train/contrastive.hpp"

#include <map>

#include "rplan/util/rng.hpp"

namespace rplan::train {

namespace {

int prefix_rows(const model::Reasoner& r) {
  return r.config().num_queries * r.config().prompt_len;
}

}  // namespace

std::optional<ContrastiveTriple> contrastive_for_anchor(const GraphedDataset& gd, int anchor,
                                                        std::mt19937_64& rng) {
  const auto& a = gd.tuples[static_cast<size_t>(anchor)];
  std::vector<int> positives;
  for (size_t i = 0; i < gd.tuples.size(); ++i) {
    if (static_cast<int>(i) == anchor) continue;
    const auto& c = gd.tuples[i];
    if (c.plan_text != a.plan_text) continue;
    if (c.full == a.full) continue;  // positives must differ as graphs
    positives.push_back(static_cast<int>(i));
  }
  if (positives.empty()) return std::nullopt;

  ContrastiveTriple t;
  t.anchor = anchor;
  std::uniform_int_distribution<size_t> pick(0, positives.size() - 1);
  t.positive = positives[pick(rng)];

  const auto& episode = gd.episodes[static_cast<size_t>(a.episode)];
  const int pos = a.pos_in_episode;
  t.negative = pos + 1 < static_cast<int>(episode.size())
                   ? episode[static_cast<size_t>(pos + 1)]
                   : episode[static_cast<size_t>(pos - 1)];
  return t;
}

std::vector<ContrastiveTriple> build_contrastive_batch(const GraphedDataset& gd, int size,
                                                       std::uint64_t seed, int* skipped) {
  auto rng = make_rng(seed, "contrastive-batch");
  std::uniform_int_distribution<size_t> pick(0, gd.tuples.empty() ? 0 : gd.tuples.size() - 1);
  std::vector<ContrastiveTriple> out;
  int skips = 0;
  for (int i = 0; i < size && !gd.tuples.empty(); ++i) {
    const int anchor = static_cast<int>(pick(rng));
    if (auto t = contrastive_for_anchor(gd, anchor, rng))
      out.push_back(*t);
    else
      ++skips;
  }
  if (skipped) *skipped = skips;
  return out;
}

int contrastive_term_node(model::Tape& t, model::Bind& b, const model::Reasoner& r,
                          int anchor_zhat, const std::vector<int>& pos_tokens,
                          const std::vector<int>& neg_tokens, double margin) {
  const int rows = prefix_rows(r);
  const int zp = r.attend_node(t, b, r.encode_node(t, b, pos_tokens));
  const int zn = r.attend_node(t, b, r.encode_node(t, b, neg_tokens));
  const int a = t.slice_rows(anchor_zhat, 0, rows);
  const int p = t.slice_rows(zp, 0, rows);
  const int n = t.slice_rows(zn, 0, rows);
  const int gap = t.add_const(t.sub(t.sqdist(a, p), t.sqdist(a, n)),
                              model::Mat::Constant(1, 1, margin));
  return t.hinge(gap);
}

int contrastive_loss_node(model::Tape& t, model::Bind& b, const model::Reasoner& r,
                          const GraphedDataset& gd, const std::vector<ContrastiveTriple>& batch,
                          double margin) {
  std::vector<int> terms;
  for (const auto& triple : batch) {
    const int za =
        r.attend_node(t, b, r.encode_node(t, b, gd.tuples[static_cast<size_t>(triple.anchor)].tokens));
    terms.push_back(contrastive_term_node(t, b, r, za,
                                          gd.tuples[static_cast<size_t>(triple.positive)].tokens,
                                          gd.tuples[static_cast<size_t>(triple.negative)].tokens,
                                          margin));
  }
  return t.scale(t.add_scalars(terms), 1.0 / static_cast<double>(terms.size()));
}

}  // namespace rplan::train
