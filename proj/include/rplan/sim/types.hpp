#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rplan/sim/plan.hpp"

namespace rplan::sim {

using Symbol = std::string;

struct ObjectFlags {
  bool sliced = false;
  bool heated = false;
  bool cooled = false;
  bool clean = false;

  bool operator==(const ObjectFlags&) const = default;
  bool any() const { return sliced || heated || cooled || clean; }
};

struct ObjectInstance {
  Symbol id;   // "Apple", or "Cup-1" when the class has several instances
  Symbol cls;  // "Apple", "Cup"
  ObjectFlags flags;

  bool operator==(const ObjectInstance&) const = default;
};

struct Receptacle {
  Symbol id;  // one receptacle per class per scene, so id == class
  bool openable = false;
  bool open = false;
  bool toggleable = false;
  bool on = false;

  bool operator==(const Receptacle&) const = default;
};

struct WorldState {
  Symbol scene_id;
  std::vector<ObjectInstance> objects;
  std::vector<Receptacle> receptacles;
  std::map<Symbol, Symbol> placement;  // object id -> receptacle id; absent while held
  Symbol agent_at;
  std::optional<Symbol> inventory;  // at most one object id
  std::uint64_t rng_seed = 0;

  bool operator==(const WorldState&) const = default;

  const ObjectInstance* find_object(const Symbol& id) const;
  ObjectInstance* find_object(const Symbol& id);
  const Receptacle* find_receptacle(const Symbol& id) const;
  Receptacle* find_receptacle(const Symbol& id);
};

struct VisibleObject {
  Symbol id;
  Symbol cls;
  ObjectFlags flags;

  bool operator==(const VisibleObject&) const = default;
};

struct ReceptacleView {
  Symbol id;
  bool openable = false;
  bool open = false;
  bool toggleable = false;
  bool on = false;

  bool operator==(const ReceptacleView&) const = default;
};

struct Observation {
  Symbol agent_at;
  std::vector<VisibleObject> visible;  // sorted by id; contents of closed receptacles hidden
  std::optional<VisibleObject> inventory;
  ReceptacleView local;

  bool operator==(const Observation&) const = default;
};

enum class TaskKind {
  PickPlace,
  StackPlace,
  PickTwoPlace,
  CleanPlace,
  HeatPlace,
  CoolPlace,
  ExamineInLight,
};

std::string_view task_kind_name(TaskKind k);

struct TaskSpec {
  std::string task_id;
  TaskKind kind = TaskKind::PickPlace;
  Symbol object;   // primary object class
  Symbol object2;  // StackPlace companion class, else empty
  Symbol target;   // receptacle (the lamp for ExamineInLight)
  bool sliced = false;  // slice modifier for Heat/Cool
  Symbol scene_id;

  bool operator==(const TaskSpec&) const = default;
};

enum class FlagKind { Sliced, Heated, Cooled, Clean };

struct SubGoal {
  enum class Kind { AtCount, Flag, Holding, ReceptacleOn };
  Kind kind = Kind::AtCount;
  Symbol object_class;
  Symbol receptacle;
  int count = 1;  // AtCount: at least this many instances of the class at the receptacle
  FlagKind flag = FlagKind::Sliced;

  bool operator==(const SubGoal&) const = default;
};

bool subgoal_satisfied(const SubGoal& g, const WorldState& s);

struct TrajStep {
  Observation obs;  // observation before the plan executes
  PlanAction plan;

  bool operator==(const TrajStep&) const = default;
};

struct Trajectory {
  WorldState initial;
  std::vector<TrajStep> steps;
  WorldState terminal;

  bool operator==(const Trajectory&) const = default;
};

enum class Category { Train, Seen, UnseenSpatial, UnseenEnvironment };

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);

}  // namespace rplan::sim
