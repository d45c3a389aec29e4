#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rplan::model {

struct GenConfig {
  int beam_size = 3;
  double temperature = 0.01;
  int top_k = 5;
  double top_p = 0.3;
  int max_new_tokens = 40;
};

using LogitsFn = std::function<Eigen::VectorXd(const std::vector<int>& prefix)>;

// Per-step candidates: log-softmax of temperature-scaled logits, restricted
// to the intersection of the top-k and top-p sets (both are prefixes of the
// same descending order, ties by ascending id). Returns candidate ids in
// descending score order; `logprobs` receives the full distribution.
std::vector<int> decode_candidates(const Eigen::VectorXd& logits, const GenConfig& cfg,
                                   Eigen::VectorXd* logprobs);

// Width-`beam_size` search over the candidate dynamics; returns the
// highest-cumulative-log-prob finished sequence (EOS or length cap), ties
// broken lexicographically. EOS is not included in the result.
std::vector<int> beam_search(const std::vector<int>& init_prefix, const LogitsFn& next_logits,
                             const GenConfig& cfg, int eos_id);

}  // namespace rplan::model
