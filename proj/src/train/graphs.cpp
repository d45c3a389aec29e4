#include "rplan/train/graphs.hpp"

#include <algorithm>
#include <map>

#include "rplan/sim/text.hpp"
#include "rplan/util/errors.hpp"

namespace rplan::train {

GraphedDataset reconstruct_graphs(const data::RationaleDataset& ds, const rel::Embedder& emb,
                                  double delta, const model::Vocab& vocab) {
  // group dataset rows by episode; seeds duplicate steps already present, so
  // key reconstruction by (task_id, step_index)
  std::map<std::string, std::map<int, std::vector<int>>> by_episode;
  for (size_t i = 0; i < ds.tuples.size(); ++i) {
    const auto& p = ds.tuples[i].provenance;
    by_episode[p.task_id][p.step_index].push_back(static_cast<int>(i));
  }

  GraphedDataset out;
  out.tuples.resize(ds.tuples.size());

  for (const auto& [task_id, steps] : by_episode) {
    std::vector<int> episode_members;
    const int episode_index = static_cast<int>(out.episodes.size());

    const auto& first_tuple = ds.tuples[static_cast<size_t>(steps.begin()->second.front())];
    const auto task = sim::parse_task(first_tuple.h);
    if (!task) throw IntegrityError("unparseable task text: " + first_tuple.h);

    kg::KGraph g = kg::initial_graph(*task);
    std::optional<sim::PlanAction> prev;
    int pos = 0;
    for (const auto& [step_index, dataset_rows] : steps) {
      const auto& row = ds.tuples[static_cast<size_t>(dataset_rows.front())];
      const auto obs = sim::parse_observation(row.o);
      if (!obs) throw IntegrityError("unparseable observation: " + row.o);
      g = kg::update(g, prev, *obs);
      const auto retrieved = kg::retrieve(g, *obs, row.h, delta, emb);

      GraphedTuple gt;
      gt.task_id = task_id;
      gt.step_index = step_index;
      gt.full = g;
      gt.retrieved = retrieved;
      gt.tokens = vocab.encode(kg::linearize(retrieved));
      for (const auto& r : row.rationales) {
        auto ids = vocab.encode(r);
        ids.push_back(model::Vocab::kEos);
        gt.rationale_targets.push_back(std::move(ids));
      }
      gt.plan_tokens = vocab.encode(row.a);
      gt.plan_text = row.a;
      gt.episode = episode_index;
      gt.pos_in_episode = pos;

      for (int dataset_row : dataset_rows) {
        GraphedTuple copy = gt;
        copy.dataset_index = dataset_row;
        // duplicate (seed) rows share reconstruction but remain separate
        // training examples
        out.tuples[static_cast<size_t>(dataset_row)] = std::move(copy);
      }
      episode_members.push_back(dataset_rows.front());

      const auto plan = sim::parse_plan(row.a);
      if (!plan.action) throw IntegrityError("unparseable plan text: " + row.a);
      prev = *plan.action;
      ++pos;
    }
    out.episodes.push_back(std::move(episode_members));
  }
  return out;
}

}  // namespace rplan::train
