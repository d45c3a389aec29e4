#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rplan/rel/embedding.hpp"
#include "rplan/sim/types.hpp"

namespace rplan::kg {

struct Triple {
  sim::Symbol subject;
  sim::Symbol relation;
  sim::Symbol object;

  bool operator==(const Triple&) const = default;
};

// Insertion-ordered, deduplicated triple store. Contradicted triples are
// retracted (latest wins): one location triple per object id, one agent
// position, one holding, paired open/closed and on/off states, and the
// heated/cooled exclusion.
class KGraph {
 public:
  const std::vector<Triple>& triples() const { return triples_; }
  int step_index() const { return step_index_; }
  void set_step_index(int s) { step_index_ = s; }
  bool contains(const Triple& t) const;
  size_t size() const { return triples_.size(); }

  // no-op when the identical triple is present; retracts contradicted
  // triples, then appends
  void assert_triple(const Triple& t);

  bool operator==(const KGraph&) const = default;

 private:
  void retract_if(const Triple& incoming);
  std::vector<Triple> triples_;
  int step_index_ = 0;
};

// Goal facts derived from the task description; the graph a fresh episode
// starts from.
KGraph initial_graph(const sim::TaskSpec& task);

// Folds the previous plan's effects and the new observation into g.
KGraph update(const KGraph& g, const std::optional<sim::PlanAction>& prev_plan,
              const sim::Observation& obs);

// Triples whose linearized text is relevant to (h, rendered o) at threshold
// delta. (Agent, *, *) triples are always retained. Insertion order kept.
KGraph retrieve(const KGraph& g, const sim::Observation& obs, const std::string& h,
                double delta, const rel::Embedder& embedder);

// "(s, r, o). " clauses in insertion order.
std::string linearize(const KGraph& g);
std::string linearize_triple(const Triple& t);

std::optional<std::vector<Triple>> parse_triples(std::string_view text);

// JSON Lines snapshot: one {"step_index": n} header then one line per triple.
std::string snapshot_jsonl(const KGraph& g);

}  // namespace rplan::kg
