#include "rplan/model/beam.hpp"

#include <algorithm>
#include <cmath>

namespace rplan::model {

std::vector<int> decode_candidates(const Eigen::VectorXd& logits, const GenConfig& cfg,
                                   Eigen::VectorXd* logprobs) {
  const double temp = std::max(cfg.temperature, 1e-8);
  Eigen::VectorXd scaled = logits / temp;
  const double mx = scaled.maxCoeff();
  const double lse = mx + std::log((scaled.array() - mx).exp().sum());
  Eigen::VectorXd lp = scaled.array() - lse;
  if (logprobs) *logprobs = lp;

  std::vector<int> order(static_cast<size_t>(lp.size()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lp(a) != lp(b)) return lp(a) > lp(b);
    return a < b;
  });

  // smallest prefix of the sorted order whose probability mass reaches top_p
  size_t p_count = order.size();
  double cum = 0.0;
  for (size_t i = 0; i < order.size(); ++i) {
    cum += std::exp(lp(order[i]));
    if (cum >= cfg.top_p) {
      p_count = i + 1;
      break;
    }
  }
  const size_t k_count = cfg.top_k > 0 ? static_cast<size_t>(cfg.top_k) : order.size();
  const size_t take = std::min({order.size(), p_count, k_count});
  return std::vector<int>(order.begin(), order.begin() + static_cast<long>(take));
}

namespace {

struct BeamItem {
  std::vector<int> toks;
  double score = 0.0;
};

bool better(const BeamItem& a, const BeamItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.toks < b.toks;
}

}  // namespace

std::vector<int> beam_search(const std::vector<int>& init_prefix, const LogitsFn& next_logits,
                             const GenConfig& cfg, int eos_id) {
  std::vector<BeamItem> live = {BeamItem{}};
  std::vector<BeamItem> done;

  for (int step = 0; step < cfg.max_new_tokens && !live.empty(); ++step) {
    std::vector<BeamItem> expansions;
    for (const auto& beam : live) {
      std::vector<int> prefix = init_prefix;
      prefix.insert(prefix.end(), beam.toks.begin(), beam.toks.end());
      Eigen::VectorXd lp;
      const auto cands = decode_candidates(next_logits(prefix), cfg, &lp);
      for (int c : cands) {
        if (c == eos_id) {
          done.push_back(BeamItem{beam.toks, beam.score + lp(c)});
        } else {
          BeamItem next{beam.toks, beam.score + lp(c)};
          next.toks.push_back(c);
          expansions.push_back(std::move(next));
        }
      }
    }
    std::sort(expansions.begin(), expansions.end(), better);
    if (static_cast<int>(expansions.size()) > cfg.beam_size)
      expansions.resize(static_cast<size_t>(cfg.beam_size));
    live = std::move(expansions);
  }
  // beams that hit the length cap count as finished
  for (auto& b : live) done.push_back(std::move(b));
  if (done.empty()) return {};
  return std::min_element(done.begin(), done.end(),
                          [](const BeamItem& a, const BeamItem& b) { return better(a, b); })
      ->toks;
}

}  // namespace rplan::model
