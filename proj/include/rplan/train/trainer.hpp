#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rplan/data/types.hpp"
#include "rplan/model/planner.hpp"
#include "rplan/model/reasoner.hpp"
#include "rplan/train/graphs.hpp"

namespace rplan::train {

struct TrainConfig {
  int reasoning_epochs = 100;
  int reasoning_batch = 1;
  double reasoning_lr = 5e-5;
  int planning_epochs = 20;
  int planning_batch = 2;
  double planning_lr = 3e-5;
  double margin = 1.0;      // contrastive hinge margin
  double lambda_con = 1.0;  // weight of the contrastive term
  std::uint64_t seed = 1;
  std::string log_path;        // per-epoch JSON Lines log, optional
  std::string checkpoint_path; // rewritten after every epoch, optional
};

struct EpochLog {
  int epoch = 0;
  double loss_rtn = 0.0;
  double loss_con = 0.0;
  double loss_total = 0.0;
  double wall_s = 0.0;
};

// Reasoning-policy distillation: per step, total = L_Rtn + lambda * L_Con,
// plain gradient descent. Throws on non-finite loss.
std::vector<EpochLog> train_reasoning(model::Reasoner& r, const GraphedDataset& gd,
                                      const TrainConfig& cfg);

// Planning-policy distillation on rationales produced by the frozen
// reasoning-policy. The teacher's parameter hash is asserted unchanged.
std::vector<EpochLog> train_planning(model::Planner& p, const model::Reasoner& frozen,
                                     const GraphedDataset& gd, const TrainConfig& cfg);

// single-tier baseline: (task, observation, plan history) text -> plan
std::vector<EpochLog> train_end2end(model::Planner& p, const data::RationaleDataset& ds,
                                    const GraphedDataset& gd, const TrainConfig& cfg);

// context assembly shared by planner training and evaluation
std::vector<int> rationale_context_tokens(const std::vector<std::vector<int>>& streams);
std::string render_policy_context(const std::string& h, const std::string& o_text,
                                  const std::vector<std::string>& history_plans);

}  // namespace rplan::train
