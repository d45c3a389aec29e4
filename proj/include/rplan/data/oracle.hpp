#pragma once

#include <map>
#include <string>
#include <vector>

#include "rplan/data/backend.hpp"
#include "rplan/data/types.hpp"
#include "rplan/sim/world.hpp"

namespace rplan::data {

struct ExpertEpisode {
  sim::TaskSpec task;
  sim::Trajectory traj;
  std::vector<std::string> obs_texts;   // per step, rendered
  std::vector<std::string> plan_texts;  // per step, canonical
  std::vector<sim::WorldState> states;  // state before each step
};

// All expert episodes for the train task table plus a flattened transition
// view; also the ground-truth index used by the scripted oracle.
class ExpertCorpus {
 public:
  static ExpertCorpus build_train();

  const std::vector<ExpertEpisode>& episodes() const { return episodes_; }
  std::vector<ExpertTransition> transitions() const;

  // (h, observation text) -> episode/step; unique by construction
  const ExpertEpisode* find(const std::string& h, const std::string& o_text, int* step) const;

 private:
  std::vector<ExpertEpisode> episodes_;
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> index_;
};

// Deterministic ground-truth rationales for one expert step, in query order.
RationaleSet oracle_rationales(const ExpertEpisode& ep, int step);

// Nine curated example tuples used to seed dataset construction.
std::vector<RationaleTuple> seed_examples(const ExpertCorpus& corpus);

// LLM stand-in that answers extraction queries and critic checks from
// simulator ground truth. Pure and deterministic.
class OracleBackend : public LLMBackend {
 public:
  explicit OracleBackend(const ExpertCorpus& corpus) : corpus_(&corpus) {}
  std::string complete(const std::string& prompt, const LlmGenConfig& cfg) override;
  std::string identity() const override { return "scripted-oracle"; }

 private:
  const ExpertCorpus* corpus_;
};

// shared with the critic: "Therefore the next plan is to <phrase>." -> plan
std::string rationale_plan_phrase(const std::string& r7);

}  // namespace rplan::data
