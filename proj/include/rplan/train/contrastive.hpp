#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rplan/model/reasoner.hpp"
#include "rplan/train/graphs.hpp"

namespace rplan::train {

struct ContrastiveTriple {
  int anchor = -1;
  int positive = -1;
  int negative = -1;  // consecutive step of the anchor's episode
};

// positives share the anchor's plan text but not its graph; the negative is
// step t+1 of the anchor's episode (t-1 at episode end)
std::optional<ContrastiveTriple> contrastive_for_anchor(const GraphedDataset& gd, int anchor,
                                                        std::mt19937_64& rng);

// seeded batch of triples; anchors without positives are skipped and counted
std::vector<ContrastiveTriple> build_contrastive_batch(const GraphedDataset& gd, int size,
                                                       std::uint64_t seed, int* skipped);

// mean over triples of max{0, d(zhat, zhat+) - d(zhat, zhat-) + margin},
// distances summed over the m*L prefix-prompt positions
int contrastive_loss_node(model::Tape& t, model::Bind& b, const model::Reasoner& r,
                          const GraphedDataset& gd, const std::vector<ContrastiveTriple>& batch,
                          double margin);

// single-triple hinge sharing the anchor's already-computed zhat node
int contrastive_term_node(model::Tape& t, model::Bind& b, const model::Reasoner& r,
                          int anchor_zhat, const std::vector<int>& pos_tokens,
                          const std::vector<int>& neg_tokens, double margin);

}  // namespace rplan::train
