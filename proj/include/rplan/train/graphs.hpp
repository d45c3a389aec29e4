#pragma once

#include <string>
#include <vector>

#include "rplan/data/types.hpp"
#include "rplan/kg/kgraph.hpp"
#include "rplan/model/vocab.hpp"
#include "rplan/rel/embedding.hpp"

namespace rplan::train {

// One dataset tuple with its reconstructed and retrieved graphs, tokenized
// for the models.
struct GraphedTuple {
  int dataset_index = -1;
  std::string task_id;
  int step_index = 0;
  kg::KGraph full;
  kg::KGraph retrieved;
  std::vector<int> tokens;                         // encode(linearize(retrieved))
  std::vector<std::vector<int>> rationale_targets; // per stream, EOS appended
  std::vector<int> plan_tokens;                    // canonical plan, no EOS
  std::string plan_text;
  int episode = -1;
  int pos_in_episode = 0;
};

struct GraphedDataset {
  std::vector<GraphedTuple> tuples;
  std::vector<std::vector<int>> episodes;  // tuple indices in step order
};

// Replays each episode's updates from the dataset records and retrieves the
// per-step graphs. Duplicate (task, step) records share one reconstruction.
GraphedDataset reconstruct_graphs(const data::RationaleDataset& ds, const rel::Embedder& emb,
                                  double delta, const model::Vocab& vocab);

}  // namespace rplan::train
