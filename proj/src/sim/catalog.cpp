#include "rplan/sim/catalog.hpp"

#include <algorithm>
#include <set>

namespace rplan::sim {

const std::vector<ObjectClassInfo>& object_catalog() {
  static const std::vector<ObjectClassInfo> kObjects = {
      //            name        slice  heat   cool   clean  knife  examine
      ObjectClassInfo{"Apple", true, true, true, true, false, false},
      ObjectClassInfo{"Bread", true, true, true, false, false, false},
      ObjectClassInfo{"Potato", true, true, true, true, false, false},
      ObjectClassInfo{"Tomato", true, true, true, true, false, false},
      ObjectClassInfo{"Mug", false, true, true, true, false, false},
      ObjectClassInfo{"Cup", false, true, true, true, false, false},
      ObjectClassInfo{"Bowl", false, false, true, true, false, false},
      ObjectClassInfo{"Spoon", false, false, false, true, false, false},
      ObjectClassInfo{"Pencil", false, false, false, false, false, true},
      ObjectClassInfo{"Book", false, false, false, false, false, true},
      ObjectClassInfo{"Watch", false, false, false, false, false, true},
      ObjectClassInfo{"ButterKnife", false, false, false, false, true, false},
  };
  return kObjects;
}

const std::vector<ReceptacleClassInfo>& receptacle_catalog() {
  static const std::vector<ReceptacleClassInfo> kReceptacles = {
      ReceptacleClassInfo{"CounterTop", false, false, true},
      ReceptacleClassInfo{"SideTable", false, false, true},
      ReceptacleClassInfo{"DiningTable", false, false, true},
      ReceptacleClassInfo{"Drawer", true, false, true},
      ReceptacleClassInfo{"Microwave", true, false, true},
      ReceptacleClassInfo{"Fridge", true, false, true},
      ReceptacleClassInfo{"Sink", false, false, true},
      ReceptacleClassInfo{"FloorLamp", false, true, false},
  };
  return kReceptacles;
}

const ObjectClassInfo* find_object_class(const Symbol& name) {
  for (const auto& c : object_catalog())
    if (c.name == name) return &c;
  return nullptr;
}

const ReceptacleClassInfo* find_receptacle_class(const Symbol& name) {
  for (const auto& c : receptacle_catalog())
    if (c.name == name) return &c;
  return nullptr;
}

Symbol object_id(const Symbol& cls, int index, int count) {
  if (count <= 1) return cls;
  return cls + "-" + std::to_string(index + 1);
}

Symbol class_of_id(const Symbol& id) {
  auto dash = id.find('-');
  return dash == Symbol::npos ? id : id.substr(0, dash);
}

std::vector<ObjectInstance> SceneSpec::instances() const {
  std::vector<ObjectInstance> out;
  for (const auto& [cls, count] : objects)
    for (int i = 0; i < count; ++i) out.push_back(ObjectInstance{object_id(cls, i, count), cls, {}});
  return out;
}

const std::vector<SceneSpec>& scene_catalog() {
  static const std::vector<SceneSpec> kScenes = {
      SceneSpec{
          "kitchen-0",
          {"CounterTop", "SideTable", "DiningTable", "Microwave", "Fridge", "Sink"},
          {{"Apple", 1},
           {"Bread", 1},
           {"Potato", 1},
           {"Tomato", 1},
           {"Mug", 1},
           {"Cup", 2},
           {"Bowl", 1},
           {"Spoon", 1},
           {"Pencil", 1},
           {"Book", 1},
           {"ButterKnife", 1}},
          {{"Apple", "SideTable"},
           {"Bread", "CounterTop"},
           {"Potato", "Fridge"},
           {"Tomato", "Sink"},
           {"Mug", "SideTable"},
           {"Cup-1", "DiningTable"},
           {"Cup-2", "DiningTable"},
           {"Bowl", "DiningTable"},
           {"Spoon", "DiningTable"},
           {"Pencil", "SideTable"},
           {"Book", "DiningTable"},
           {"ButterKnife", "CounterTop"}},
          "CounterTop",
          false},
      SceneSpec{
          "kitchen-1",
          {"CounterTop", "SideTable", "Drawer", "Microwave", "Fridge", "Sink"},
          {{"Apple", 1},
           {"Bread", 1},
           {"Potato", 1},
           {"Tomato", 1},
           {"Mug", 1},
           {"Cup", 1},
           {"Bowl", 1},
           {"Spoon", 2},
           {"Pencil", 1},
           {"Watch", 1},
           {"ButterKnife", 1}},
          {{"Apple", "Fridge"},
           {"Bread", "SideTable"},
           {"Potato", "CounterTop"},
           {"Tomato", "Fridge"},
           {"Mug", "Drawer"},
           {"Cup", "Sink"},
           {"Bowl", "CounterTop"},
           {"Spoon-1", "Sink"},
           {"Spoon-2", "SideTable"},
           {"Pencil", "SideTable"},
           {"Watch", "SideTable"},
           {"ButterKnife", "Drawer"}},
          "SideTable",
          false},
      SceneSpec{
          "kitchen-2",
          {"CounterTop", "DiningTable", "Microwave", "Fridge", "Sink", "FloorLamp"},
          {{"Apple", 1},
           {"Bread", 1},
           {"Potato", 1},
           {"Tomato", 1},
           {"Mug", 1},
           {"Cup", 1},
           {"Bowl", 1},
           {"Pencil", 2},
           {"Book", 1},
           {"Watch", 1},
           {"ButterKnife", 1}},
          {{"Apple", "CounterTop"},
           {"Bread", "Fridge"},
           {"Potato", "Microwave"},
           {"Tomato", "CounterTop"},
           {"Mug", "CounterTop"},
           {"Cup", "DiningTable"},
           {"Bowl", "Sink"},
           {"Pencil-1", "CounterTop"},
           {"Pencil-2", "CounterTop"},
           {"Book", "DiningTable"},
           {"Watch", "DiningTable"},
           {"ButterKnife", "DiningTable"}},
          "DiningTable",
          false},
      SceneSpec{
          "livingroom-0",
          {"SideTable", "DiningTable", "Drawer", "FloorLamp"},
          {{"Apple", 1},
           {"Bread", 1},
           {"Tomato", 1},
           {"Mug", 1},
           {"Cup", 1},
           {"Bowl", 1},
           {"Spoon", 1},
           {"Pencil", 2},
           {"Book", 2},
           {"Watch", 1}},
          {{"Apple", "SideTable"},
           {"Bread", "Drawer"},
           {"Tomato", "DiningTable"},
           {"Mug", "DiningTable"},
           {"Cup", "SideTable"},
           {"Bowl", "DiningTable"},
           {"Spoon", "Drawer"},
           {"Pencil-1", "SideTable"},
           {"Pencil-2", "DiningTable"},
           {"Book-1", "DiningTable"},
           {"Book-2", "Drawer"},
           {"Watch", "SideTable"}},
          "SideTable",
          false},
      SceneSpec{
          "kitchen-3",
          {"CounterTop", "SideTable", "Microwave", "Fridge", "Sink", "FloorLamp"},
          {{"Bread", 1},
           {"Potato", 1},
           {"Tomato", 1},
           {"Mug", 1},
           {"Cup", 1},
           {"Bowl", 1},
           {"Spoon", 1},
           {"Pencil", 2},
           {"Book", 1},
           {"Watch", 1},
           {"ButterKnife", 1}},
          {{"Bread", "CounterTop"},
           {"Potato", "Fridge"},
           {"Tomato", "SideTable"},
           {"Mug", "Sink"},
           {"Cup", "CounterTop"},
           {"Bowl", "SideTable"},
           {"Spoon", "Sink"},
           {"Pencil-1", "SideTable"},
           {"Pencil-2", "CounterTop"},
           {"Book", "SideTable"},
           {"Watch", "CounterTop"},
           {"ButterKnife", "SideTable"}},
          "Sink",
          true},
      SceneSpec{
          "livingroom-1",
          {"SideTable", "DiningTable", "Drawer", "FloorLamp"},
          {{"Apple", 1},
           {"Bread", 1},
           {"Tomato", 1},
           {"Mug", 1},
           {"Cup", 2},
           {"Bowl", 1},
           {"Spoon", 1},
           {"Pencil", 1},
           {"Book", 2},
           {"Watch", 1}},
          {{"Apple", "DiningTable"},
           {"Bread", "Drawer"},
           {"Tomato", "SideTable"},
           {"Mug", "SideTable"},
           {"Cup-1", "DiningTable"},
           {"Cup-2", "Drawer"},
           {"Bowl", "SideTable"},
           {"Spoon", "DiningTable"},
           {"Pencil", "SideTable"},
           {"Book-1", "DiningTable"},
           {"Book-2", "SideTable"},
           {"Watch", "Drawer"}},
          "DiningTable",
          true},
  };
  return kScenes;
}

const SceneSpec* find_scene(const Symbol& id) {
  for (const auto& s : scene_catalog())
    if (s.id == id) return &s;
  return nullptr;
}

namespace {

TaskSpec make_task(std::string id, TaskKind kind, Symbol obj, Symbol obj2, Symbol target,
                   bool sliced, Symbol scene) {
  TaskSpec t;
  t.task_id = std::move(id);
  t.kind = kind;
  t.object = std::move(obj);
  t.object2 = std::move(obj2);
  t.target = std::move(target);
  t.sliced = sliced;
  t.scene_id = std::move(scene);
  return t;
}

}  // namespace

const std::vector<TaskSpec>& train_tasks() {
  using K = TaskKind;
  static const std::vector<TaskSpec> kTasks = {
      make_task("train-00", K::PickPlace, "Apple", "", "DiningTable", false, "kitchen-0"),
      make_task("train-01", K::HeatPlace, "Mug", "", "CounterTop", false, "kitchen-0"),
      make_task("train-02", K::CoolPlace, "Tomato", "", "SideTable", false, "kitchen-0"),
      make_task("train-03", K::CleanPlace, "Cup", "", "SideTable", false, "kitchen-0"),
      make_task("train-04", K::PickTwoPlace, "Cup", "", "SideTable", false, "kitchen-0"),
      make_task("train-05", K::StackPlace, "Bowl", "Spoon", "CounterTop", false, "kitchen-0"),
      make_task("train-06", K::HeatPlace, "Bread", "", "SideTable", true, "kitchen-0"),
      make_task("train-07", K::HeatPlace, "Potato", "", "SideTable", false, "kitchen-1"),
      make_task("train-08", K::CoolPlace, "Mug", "", "CounterTop", false, "kitchen-1"),
      make_task("train-09", K::CleanPlace, "Spoon", "", "Drawer", false, "kitchen-1"),
      make_task("train-10", K::PickTwoPlace, "Spoon", "", "CounterTop", false, "kitchen-1"),
      make_task("train-11", K::PickPlace, "Watch", "", "Drawer", false, "kitchen-1"),
      make_task("train-12", K::StackPlace, "Bowl", "Apple", "SideTable", false, "kitchen-1"),
      make_task("train-13", K::ExamineInLight, "Book", "", "FloorLamp", false, "kitchen-2"),
      make_task("train-14", K::HeatPlace, "Apple", "", "DiningTable", false, "kitchen-2"),
      make_task("train-15", K::PickTwoPlace, "Pencil", "", "DiningTable", false, "kitchen-2"),
      make_task("train-16", K::CoolPlace, "Bread", "", "CounterTop", true, "kitchen-2"),
      make_task("train-17", K::PickPlace, "Bowl", "", "DiningTable", false, "kitchen-2"),
      make_task("train-18", K::ExamineInLight, "Watch", "", "FloorLamp", false, "livingroom-0"),
      make_task("train-19", K::PickPlace, "Book", "", "SideTable", false, "livingroom-0"),
      make_task("train-20", K::PickTwoPlace, "Pencil", "", "Drawer", false, "livingroom-0"),
      make_task("train-21", K::StackPlace, "Bowl", "Spoon", "SideTable", false, "livingroom-0"),
  };
  return kTasks;
}

std::vector<Symbol> task_pool_ids(const SceneSpec& scene) {
  std::set<Symbol> classes;
  for (const auto& t : train_tasks()) {
    if (t.scene_id != scene.id) continue;
    classes.insert(t.object);
    if (!t.object2.empty()) classes.insert(t.object2);
    if (t.sliced) classes.insert("ButterKnife");
  }
  std::vector<Symbol> ids;
  for (const auto& inst : scene.instances())
    if (classes.count(inst.cls)) ids.push_back(inst.id);
  return ids;
}

}  // namespace rplan::sim
