#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rplan/sim/types.hpp"

namespace rplan::sim {

enum class PrecondKind {
  NotAtReceptacle,
  ObjectNotVisible,
  InventoryFull,
  InventoryEmpty,
  NotHoldingObject,
  MissingKnife,
  ReceptacleClosed,
  NotOpenable,
  NotToggleable,
  WrongAppliance,
  AlreadyOpen,
  AlreadyClosed,
  CannotHoldObjects,
};

std::string_view precond_name(PrecondKind k);

struct PlanError {
  enum class Type { Precondition, Symbol };
  Type type = Type::Precondition;
  PrecondKind kind = PrecondKind::NotAtReceptacle;
  std::string message;
};

struct StepResult {
  bool ok = false;
  WorldState state;  // next state on success, the input state otherwise
  Observation obs;   // observation of `state` on success
  PlanError error;
  bool terminal = false;  // End
};

// Deterministic initial state for (scene, seed, category).
WorldState new_scene(const Symbol& scene_id, std::uint64_t seed, Category category);

Observation observe(const WorldState& state);

// Pure transition. Failures never mutate state.
StepResult step(const WorldState& state, const PlanAction& plan);

std::vector<SubGoal> subgoals_of(const TaskSpec& task);

struct Score {
  int sr = 0;      // 1 iff every sub-goal holds in the terminal state
  double gc = 0.0;  // fraction of sub-goals satisfied
};

// Replays the trajectory from its initial state and scores the terminal
// state against the task's sub-goals. Replay mismatch -> IntegrityError.
Score evaluate_episode(const Trajectory& traj, const TaskSpec& task);

Score score_state(const WorldState& state, const TaskSpec& task);

// Templated per-kind decomposition; the returned sequence ends with End and
// reaches sr = 1 from `state`. Missing object/appliance -> InfeasibleTask.
std::vector<PlanAction> expert_plan(const WorldState& state, const TaskSpec& task);

// Runs expert_plan from `state` and records the trajectory.
Trajectory run_expert(const WorldState& state, const TaskSpec& task);

struct SuiteEntry {
  TaskSpec task;
  WorldState state;
};

// Train reproduces the expert task list exactly (n = 0 means all). The other
// categories derive deterministically from (category, seed).
std::vector<SuiteEntry> sample_suite(Category category, int n, std::uint64_t seed);

}  // namespace rplan::sim
