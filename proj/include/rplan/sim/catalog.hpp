#pragma once

#include <map>
#include <utility>
#include <vector>

#include "rplan/sim/types.hpp"

namespace rplan::sim {

struct ObjectClassInfo {
  Symbol name;
  bool sliceable = false;
  bool heatable = false;
  bool coolable = false;
  bool cleanable = false;
  bool knife = false;
  bool examinable = false;  // eligible for ExamineInLight / PickPlace variety
};

struct ReceptacleClassInfo {
  Symbol name;
  bool openable = false;
  bool toggleable = false;
  bool holds_objects = true;
};

struct SceneSpec {
  Symbol id;
  std::vector<Symbol> receptacles;
  std::vector<std::pair<Symbol, int>> objects;  // class -> instance count
  std::map<Symbol, Symbol> train_placement;     // object id -> receptacle id
  Symbol agent_start;
  bool held_out = false;

  // instance ids in catalog order: "Apple", or "Cup-1","Cup-2" for count > 1
  std::vector<ObjectInstance> instances() const;
};

const std::vector<ObjectClassInfo>& object_catalog();
const std::vector<ReceptacleClassInfo>& receptacle_catalog();
const ObjectClassInfo* find_object_class(const Symbol& name);
const ReceptacleClassInfo* find_receptacle_class(const Symbol& name);

const std::vector<SceneSpec>& scene_catalog();
const SceneSpec* find_scene(const Symbol& id);

// The fixed expert task table. Train suites and the expert dataset
// enumerate exactly these.
const std::vector<TaskSpec>& train_tasks();

// Object ids a scene's train tasks depend on (task object classes plus the
// knife for slice tasks). Seen-category scenes keep these at their train
// placement and shuffle only the rest.
std::vector<Symbol> task_pool_ids(const SceneSpec& scene);

Symbol object_id(const Symbol& cls, int index, int count);
Symbol class_of_id(const Symbol& id);

}  // namespace rplan::sim
