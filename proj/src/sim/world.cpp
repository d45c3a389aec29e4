#include "rplan/sim/world.hpp"

#include <algorithm>
#include <set>

#include "rplan/sim/catalog.hpp"
#include "rplan/util/errors.hpp"
#include "rplan/util/rng.hpp"

namespace rplan::sim {

namespace {
constexpr const char* kHeatAppliance = "Microwave";
constexpr const char* kCoolAppliance = "Fridge";
constexpr const char* kCleanAppliance = "Sink";
constexpr const char* kKnifeClass = "ButterKnife";
}  // namespace

const ObjectInstance* WorldState::find_object(const Symbol& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}
ObjectInstance* WorldState::find_object(const Symbol& id) {
  for (auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}
const Receptacle* WorldState::find_receptacle(const Symbol& id) const {
  for (const auto& r : receptacles)
    if (r.id == id) return &r;
  return nullptr;
}
Receptacle* WorldState::find_receptacle(const Symbol& id) {
  for (auto& r : receptacles)
    if (r.id == id) return &r;
  return nullptr;
}

std::string_view task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::PickPlace: return "PickPlace";
    case TaskKind::StackPlace: return "StackPlace";
    case TaskKind::PickTwoPlace: return "PickTwoPlace";
    case TaskKind::CleanPlace: return "CleanPlace";
    case TaskKind::HeatPlace: return "HeatPlace";
    case TaskKind::CoolPlace: return "CoolPlace";
    case TaskKind::ExamineInLight: return "ExamineInLight";
  }
  return "";
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Train: return "Train";
    case Category::Seen: return "Seen";
    case Category::UnseenSpatial: return "UnseenSpatial";
    case Category::UnseenEnvironment: return "UnseenEnvironment";
  }
  return "";
}

std::optional<Category> category_from_name(std::string_view name) {
  for (Category c : {Category::Train, Category::Seen, Category::UnseenSpatial,
                     Category::UnseenEnvironment})
    if (category_name(c) == name) return c;
  return std::nullopt;
}

std::string_view precond_name(PrecondKind k) {
  switch (k) {
    case PrecondKind::NotAtReceptacle: return "not_at_receptacle";
    case PrecondKind::ObjectNotVisible: return "object_not_visible";
    case PrecondKind::InventoryFull: return "inventory_full";
    case PrecondKind::InventoryEmpty: return "inventory_empty";
    case PrecondKind::NotHoldingObject: return "not_holding_object";
    case PrecondKind::MissingKnife: return "missing_knife";
    case PrecondKind::ReceptacleClosed: return "receptacle_closed";
    case PrecondKind::NotOpenable: return "not_openable";
    case PrecondKind::NotToggleable: return "not_toggleable";
    case PrecondKind::WrongAppliance: return "wrong_appliance";
    case PrecondKind::AlreadyOpen: return "already_open";
    case PrecondKind::AlreadyClosed: return "already_closed";
    case PrecondKind::CannotHoldObjects: return "cannot_hold_objects";
  }
  return "";
}

bool subgoal_satisfied(const SubGoal& g, const WorldState& s) {
  switch (g.kind) {
    case SubGoal::Kind::AtCount: {
      int n = 0;
      for (const auto& [obj, rec] : s.placement)
        if (rec == g.receptacle && class_of_id(obj) == g.object_class) ++n;
      return n >= g.count;
    }
    case SubGoal::Kind::Flag: {
      for (const auto& o : s.objects) {
        if (o.cls != g.object_class) continue;
        switch (g.flag) {
          case FlagKind::Sliced:
            if (o.flags.sliced) return true;
            break;
          case FlagKind::Heated:
            if (o.flags.heated) return true;
            break;
          case FlagKind::Cooled:
            if (o.flags.cooled) return true;
            break;
          case FlagKind::Clean:
            if (o.flags.clean) return true;
            break;
        }
      }
      return false;
    }
    case SubGoal::Kind::Holding:
      return s.inventory && class_of_id(*s.inventory) == g.object_class;
    case SubGoal::Kind::ReceptacleOn: {
      const auto* r = s.find_receptacle(g.receptacle);
      return r && r->on;
    }
  }
  return false;
}

namespace {

std::vector<Symbol> placeable_receptacles(const SceneSpec& scene) {
  std::vector<Symbol> out;
  for (const auto& r : scene.receptacles)
    if (find_receptacle_class(r)->holds_objects) out.push_back(r);
  return out;
}

}  // namespace

WorldState new_scene(const Symbol& scene_id, std::uint64_t seed, Category category) {
  const SceneSpec* scene = find_scene(scene_id);
  if (!scene) throw SymbolError("unknown scene: " + scene_id);

  WorldState st;
  st.scene_id = scene_id;
  st.rng_seed = seed;
  st.objects = scene->instances();
  for (const auto& rid : scene->receptacles) {
    const auto* info = find_receptacle_class(rid);
    Receptacle r;
    r.id = rid;
    r.openable = info->openable;
    r.toggleable = info->toggleable;
    st.receptacles.push_back(r);
  }

  const auto fixed = [&](const Symbol& id) { return scene->train_placement.at(id); };
  const auto placeable = placeable_receptacles(*scene);
  auto rng = make_rng(seed, std::string("scene:") + scene_id + ":" +
                                std::string(category_name(category)));
  std::uniform_int_distribution<size_t> pick(0, placeable.size() - 1);
  const auto random_spot = [&] { return placeable[pick(rng)]; };

  switch (category) {
    case Category::Train:
      for (const auto& o : st.objects) st.placement[o.id] = fixed(o.id);
      st.agent_at = scene->agent_start;
      break;
    case Category::Seen: {
      const auto pool = task_pool_ids(*scene);
      const std::set<Symbol> pool_set(pool.begin(), pool.end());
      for (const auto& o : st.objects)
        st.placement[o.id] = pool_set.count(o.id) ? fixed(o.id) : random_spot();
      st.agent_at = scene->agent_start;
      break;
    }
    case Category::UnseenSpatial:
    case Category::UnseenEnvironment: {
      for (const auto& o : st.objects) st.placement[o.id] = random_spot();
      std::uniform_int_distribution<size_t> at(0, scene->receptacles.size() - 1);
      st.agent_at = scene->receptacles[at(rng)];
      break;
    }
  }
  return st;
}

Observation observe(const WorldState& state) {
  Observation obs;
  obs.agent_at = state.agent_at;
  const auto* local = state.find_receptacle(state.agent_at);
  obs.local.id = local->id;
  obs.local.openable = local->openable;
  obs.local.open = local->open;
  obs.local.toggleable = local->toggleable;
  obs.local.on = local->on;

  const bool contents_visible = !local->openable || local->open;
  if (contents_visible) {
    for (const auto& [obj, rec] : state.placement) {
      if (rec != state.agent_at) continue;
      const auto* o = state.find_object(obj);
      obs.visible.push_back(VisibleObject{o->id, o->cls, o->flags});
    }
    std::sort(obs.visible.begin(), obs.visible.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
  }
  if (state.inventory) {
    const auto* o = state.find_object(*state.inventory);
    obs.inventory = VisibleObject{o->id, o->cls, o->flags};
  }
  return obs;
}

namespace {

StepResult fail_precond(const WorldState& state, PrecondKind kind, std::string msg) {
  StepResult r;
  r.ok = false;
  r.state = state;
  r.error = PlanError{PlanError::Type::Precondition, kind, std::move(msg)};
  return r;
}

StepResult fail_symbol(const WorldState& state, std::string msg) {
  StepResult r;
  r.ok = false;
  r.state = state;
  r.error = PlanError{PlanError::Type::Symbol, PrecondKind::NotAtReceptacle, std::move(msg)};
  return r;
}

// lowest-id instance of `cls` placed at `rec` (contents of closed receptacles
// are handled by the callers)
const ObjectInstance* instance_at(const WorldState& st, const Symbol& cls, const Symbol& rec) {
  const ObjectInstance* best = nullptr;
  for (const auto& o : st.objects) {
    if (o.cls != cls) continue;
    auto it = st.placement.find(o.id);
    if (it == st.placement.end() || it->second != rec) continue;
    if (!best || o.id < best->id) best = &o;
  }
  return best;
}

StepResult success(WorldState next, bool terminal = false) {
  StepResult r;
  r.ok = true;
  r.state = std::move(next);
  r.obs = observe(r.state);
  r.terminal = terminal;
  return r;
}

}  // namespace

StepResult step(const WorldState& state, const PlanAction& plan) {
  switch (plan.verb) {
    case Verb::End:
      return success(state, true);

    case Verb::GotoLocation: {
      if (!state.find_receptacle(plan.arg1))
        return fail_symbol(state, "receptacle not in scene: " + plan.arg1);
      WorldState next = state;
      next.agent_at = plan.arg1;
      return success(std::move(next));
    }

    case Verb::OpenObject:
    case Verb::CloseObject: {
      const auto* rec = state.find_receptacle(plan.arg1);
      if (!rec) return fail_symbol(state, "receptacle not in scene: " + plan.arg1);
      if (state.agent_at != plan.arg1)
        return fail_precond(state, PrecondKind::NotAtReceptacle, "agent not at " + plan.arg1);
      if (!rec->openable)
        return fail_precond(state, PrecondKind::NotOpenable, plan.arg1 + " is not openable");
      const bool opening = plan.verb == Verb::OpenObject;
      if (opening && rec->open)
        return fail_precond(state, PrecondKind::AlreadyOpen, plan.arg1 + " is already open");
      if (!opening && !rec->open)
        return fail_precond(state, PrecondKind::AlreadyClosed, plan.arg1 + " is already closed");
      WorldState next = state;
      next.find_receptacle(plan.arg1)->open = opening;
      return success(std::move(next));
    }

    case Verb::ToggleObject: {
      const auto* rec = state.find_receptacle(plan.arg1);
      if (!rec) return fail_symbol(state, "receptacle not in scene: " + plan.arg1);
      if (state.agent_at != plan.arg1)
        return fail_precond(state, PrecondKind::NotAtReceptacle, "agent not at " + plan.arg1);
      if (!rec->toggleable)
        return fail_precond(state, PrecondKind::NotToggleable, plan.arg1 + " is not toggleable");
      WorldState next = state;
      auto* r = next.find_receptacle(plan.arg1);
      r->on = !r->on;
      return success(std::move(next));
    }

    case Verb::PickupObject: {
      const auto* rec = state.find_receptacle(plan.arg2);
      if (!rec) return fail_symbol(state, "receptacle not in scene: " + plan.arg2);
      if (state.agent_at != plan.arg2)
        return fail_precond(state, PrecondKind::NotAtReceptacle, "agent not at " + plan.arg2);
      if (state.inventory)
        return fail_precond(state, PrecondKind::InventoryFull, "already holding " + *state.inventory);
      if (rec->openable && !rec->open)
        return fail_precond(state, PrecondKind::ReceptacleClosed, plan.arg2 + " is closed");
      const auto* inst = instance_at(state, plan.arg1, plan.arg2);
      if (!inst)
        return fail_precond(state, PrecondKind::ObjectNotVisible,
                            "no " + plan.arg1 + " at " + plan.arg2);
      WorldState next = state;
      next.placement.erase(inst->id);
      next.inventory = inst->id;
      return success(std::move(next));
    }

    case Verb::PutObject: {
      const auto* rec = state.find_receptacle(plan.arg2);
      if (!rec) return fail_symbol(state, "receptacle not in scene: " + plan.arg2);
      if (state.agent_at != plan.arg2)
        return fail_precond(state, PrecondKind::NotAtReceptacle, "agent not at " + plan.arg2);
      if (!state.inventory)
        return fail_precond(state, PrecondKind::InventoryEmpty, "inventory is empty");
      if (class_of_id(*state.inventory) != plan.arg1)
        return fail_precond(state, PrecondKind::NotHoldingObject,
                            "not holding a " + plan.arg1);
      if (!find_receptacle_class(plan.arg2)->holds_objects)
        return fail_precond(state, PrecondKind::CannotHoldObjects,
                            plan.arg2 + " cannot hold objects");
      if (rec->openable && !rec->open)
        return fail_precond(state, PrecondKind::ReceptacleClosed, plan.arg2 + " is closed");
      WorldState next = state;
      next.placement[*next.inventory] = plan.arg2;
      next.inventory.reset();
      return success(std::move(next));
    }

    case Verb::SliceObject: {
      if (!find_object_class(plan.arg1))
        return fail_symbol(state, "unknown object class: " + plan.arg1);
      if (!state.inventory || !find_object_class(class_of_id(*state.inventory))->knife)
        return fail_precond(state, PrecondKind::MissingKnife, "no knife in inventory");
      const auto* local = state.find_receptacle(state.agent_at);
      if (local->openable && !local->open)
        return fail_precond(state, PrecondKind::ReceptacleClosed, state.agent_at + " is closed");
      const auto* inst = instance_at(state, plan.arg1, state.agent_at);
      if (!inst)
        return fail_precond(state, PrecondKind::ObjectNotVisible,
                            "no " + plan.arg1 + " at " + state.agent_at);
      WorldState next = state;
      next.find_object(inst->id)->flags.sliced = true;
      return success(std::move(next));
    }

    case Verb::HeatObject:
    case Verb::CoolObject:
    case Verb::CleanObject: {
      const char* appliance = plan.verb == Verb::HeatObject   ? kHeatAppliance
                              : plan.verb == Verb::CoolObject ? kCoolAppliance
                                                              : kCleanAppliance;
      if (!find_object_class(plan.arg1))
        return fail_symbol(state, "unknown object class: " + plan.arg1);
      if (!state.find_receptacle(plan.arg2))
        return fail_symbol(state, "receptacle not in scene: " + plan.arg2);
      if (plan.arg2 != appliance)
        return fail_precond(state, PrecondKind::WrongAppliance,
                            std::string(verb_name(plan.verb)) + " requires the " + appliance);
      if (state.agent_at != plan.arg2)
        return fail_precond(state, PrecondKind::NotAtReceptacle, "agent not at " + plan.arg2);
      if (!state.inventory)
        return fail_precond(state, PrecondKind::InventoryEmpty, "inventory is empty");
      if (class_of_id(*state.inventory) != plan.arg1)
        return fail_precond(state, PrecondKind::NotHoldingObject, "not holding a " + plan.arg1);
      WorldState next = state;
      auto* obj = next.find_object(*next.inventory);
      if (plan.verb == Verb::HeatObject) {
        obj->flags.heated = true;
        obj->flags.cooled = false;
      } else if (plan.verb == Verb::CoolObject) {
        obj->flags.cooled = true;
        obj->flags.heated = false;
      } else {
        obj->flags.clean = true;
      }
      return success(std::move(next));
    }
  }
  return fail_symbol(state, "unknown verb");
}

std::vector<SubGoal> subgoals_of(const TaskSpec& task) {
  std::vector<SubGoal> goals;
  auto at = [&](const Symbol& cls, int count) {
    SubGoal g;
    g.kind = SubGoal::Kind::AtCount;
    g.object_class = cls;
    g.receptacle = task.target;
    g.count = count;
    return g;
  };
  auto flag = [&](FlagKind f) {
    SubGoal g;
    g.kind = SubGoal::Kind::Flag;
    g.object_class = task.object;
    g.flag = f;
    return g;
  };
  switch (task.kind) {
    case TaskKind::PickPlace:
      goals.push_back(at(task.object, 1));
      break;
    case TaskKind::StackPlace:
      goals.push_back(at(task.object, 1));
      goals.push_back(at(task.object2, 1));
      break;
    case TaskKind::PickTwoPlace:
      goals.push_back(at(task.object, 1));
      goals.push_back(at(task.object, 2));
      break;
    case TaskKind::CleanPlace:
      goals.push_back(flag(FlagKind::Clean));
      goals.push_back(at(task.object, 1));
      break;
    case TaskKind::HeatPlace:
      if (task.sliced) goals.push_back(flag(FlagKind::Sliced));
      goals.push_back(flag(FlagKind::Heated));
      goals.push_back(at(task.object, 1));
      break;
    case TaskKind::CoolPlace:
      if (task.sliced) goals.push_back(flag(FlagKind::Sliced));
      goals.push_back(flag(FlagKind::Cooled));
      goals.push_back(at(task.object, 1));
      break;
    case TaskKind::ExamineInLight: {
      SubGoal hold;
      hold.kind = SubGoal::Kind::Holding;
      hold.object_class = task.object;
      goals.push_back(hold);
      SubGoal lamp;
      lamp.kind = SubGoal::Kind::ReceptacleOn;
      lamp.receptacle = task.target;
      goals.push_back(lamp);
      break;
    }
  }
  return goals;
}

Score score_state(const WorldState& state, const TaskSpec& task) {
  const auto goals = subgoals_of(task);
  int met = 0;
  for (const auto& g : goals)
    if (subgoal_satisfied(g, state)) ++met;
  Score s;
  s.gc = goals.empty() ? 1.0 : static_cast<double>(met) / static_cast<double>(goals.size());
  s.sr = met == static_cast<int>(goals.size()) ? 1 : 0;
  return s;
}

Score evaluate_episode(const Trajectory& traj, const TaskSpec& task) {
  WorldState st = traj.initial;
  for (const auto& rec : traj.steps) {
    Observation obs = observe(st);
    if (!(obs == rec.obs)) throw IntegrityError("replay mismatch: observation differs");
    StepResult r = step(st, rec.plan);
    if (!r.ok) throw IntegrityError("replay mismatch: step failed: " + r.error.message);
    st = r.state;
  }
  if (!(st == traj.terminal)) throw IntegrityError("replay mismatch: terminal state differs");
  return score_state(st, task);
}

namespace {

// Emits plans while simulating them, so preconditions are enforced as the
// sequence is built.
struct ExpertBuilder {
  WorldState st;
  std::vector<PlanAction> plans;

  void apply(PlanAction a) {
    StepResult r = step(st, a);
    if (!r.ok) throw IntegrityError("expert step failed: " + r.error.message);
    st = std::move(r.state);
    plans.push_back(std::move(a));
  }

  void goto_r(const Symbol& r) {
    if (st.agent_at != r) apply(PlanAction{Verb::GotoLocation, r, ""});
  }

  void ensure_open(const Symbol& r) {
    const auto* rec = st.find_receptacle(r);
    if (rec->openable && !rec->open) apply(PlanAction{Verb::OpenObject, r, ""});
  }

  bool holding(const Symbol& cls) const {
    return st.inventory && class_of_id(*st.inventory) == cls;
  }

  // placed instance of `cls`, preferring co-located ones, then anything away
  // from `avoid`, then instances already at `avoid`; lowest id within a tier.
  // Grabbing the near instance first keeps each (task, observation) pair on
  // one expert action under partial observability.
  const ObjectInstance* locate(const Symbol& cls, const Symbol& avoid) const {
    const ObjectInstance* here = nullptr;
    const ObjectInstance* best = nullptr;
    const ObjectInstance* fallback = nullptr;
    for (const auto& o : st.objects) {
      if (o.cls != cls) continue;
      auto it = st.placement.find(o.id);
      if (it == st.placement.end()) continue;
      if (it->second == st.agent_at && it->second != avoid) {
        if (!here || o.id < here->id) here = &o;
      } else if (it->second != avoid) {
        if (!best || o.id < best->id) best = &o;
      } else if (!fallback || o.id < fallback->id) {
        fallback = &o;
      }
    }
    return here ? here : (best ? best : fallback);
  }

  void fetch(const Symbol& cls, const Symbol& avoid) {
    if (holding(cls)) return;
    const auto* inst = locate(cls, avoid);
    if (!inst) throw InfeasibleTask("no placed instance of " + cls);
    const Symbol rec = st.placement.at(inst->id);
    goto_r(rec);
    ensure_open(rec);
    apply(PlanAction{Verb::PickupObject, cls, rec});
  }

  void stow(const Symbol& cls, const Symbol& target) {
    goto_r(target);
    ensure_open(target);
    apply(PlanAction{Verb::PutObject, cls, target});
  }

  // fetch a knife, slice the object where it lies, drop the knife there and
  // end up holding the sliced object
  void acquire_sliced(const Symbol& cls, const Symbol& target) {
    const auto* inst = locate(cls, "");
    if (!inst) throw InfeasibleTask("no placed instance of " + cls);
    const Symbol inst_id = inst->id;
    fetch(kKnifeClass, "");
    const Symbol rec = st.placement.at(inst_id);
    goto_r(rec);
    ensure_open(rec);
    apply(PlanAction{Verb::SliceObject, cls, ""});
    apply(PlanAction{Verb::PutObject, kKnifeClass, rec});
    apply(PlanAction{Verb::PickupObject, cls, rec});
    (void)target;
  }
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw InfeasibleTask(msg);
}

void check_feasible(const WorldState& st, const TaskSpec& task) {
  const auto count_class = [&](const Symbol& cls) {
    int n = 0;
    for (const auto& o : st.objects)
      if (o.cls == cls) ++n;
    return n;
  };
  require(st.find_receptacle(task.target) != nullptr, "target not in scene: " + task.target);
  require(count_class(task.object) >= 1, "object not in scene: " + task.object);
  if (task.kind == TaskKind::PickTwoPlace)
    require(count_class(task.object) >= 2, "need two instances of " + task.object);
  if (task.kind == TaskKind::StackPlace)
    require(count_class(task.object2) >= 1, "object not in scene: " + task.object2);
  if (task.sliced) require(count_class(kKnifeClass) >= 1, "no knife in scene");
  if (task.kind == TaskKind::HeatPlace)
    require(st.find_receptacle(kHeatAppliance) != nullptr, "no microwave in scene");
  if (task.kind == TaskKind::CoolPlace)
    require(st.find_receptacle(kCoolAppliance) != nullptr, "no fridge in scene");
  if (task.kind == TaskKind::CleanPlace)
    require(st.find_receptacle(kCleanAppliance) != nullptr, "no sink in scene");
  if (task.kind == TaskKind::ExamineInLight)
    require(find_receptacle_class(task.target)->toggleable, "target is not a lamp");
  require(find_receptacle_class(task.target)->holds_objects ||
              task.kind == TaskKind::ExamineInLight,
          "target cannot hold objects");
}

}  // namespace

std::vector<PlanAction> expert_plan(const WorldState& state, const TaskSpec& task) {
  check_feasible(state, task);
  ExpertBuilder b{state, {}};
  const auto goals = subgoals_of(task);
  const auto satisfied = [&](const SubGoal& g) { return subgoal_satisfied(g, b.st); };

  switch (task.kind) {
    case TaskKind::PickPlace:
      if (!satisfied(goals[0])) {
        b.fetch(task.object, task.target);
        b.stow(task.object, task.target);
      }
      break;
    case TaskKind::StackPlace:
      for (const auto& cls : {task.object, task.object2}) {
        SubGoal g;
        g.kind = SubGoal::Kind::AtCount;
        g.object_class = cls;
        g.receptacle = task.target;
        g.count = 1;
        if (!subgoal_satisfied(g, b.st)) {
          b.fetch(cls, task.target);
          b.stow(cls, task.target);
        }
      }
      break;
    case TaskKind::PickTwoPlace:
      for (int round = 0; round < 2; ++round) {
        if (satisfied(goals[1])) break;
        b.fetch(task.object, task.target);
        b.stow(task.object, task.target);
      }
      break;
    case TaskKind::CleanPlace:
      b.fetch(task.object, task.target);
      b.goto_r(kCleanAppliance);
      b.apply(PlanAction{Verb::CleanObject, task.object, kCleanAppliance});
      b.stow(task.object, task.target);
      break;
    case TaskKind::HeatPlace:
    case TaskKind::CoolPlace: {
      if (task.sliced)
        b.acquire_sliced(task.object, task.target);
      else
        b.fetch(task.object, task.target);
      const Symbol appliance =
          task.kind == TaskKind::HeatPlace ? kHeatAppliance : kCoolAppliance;
      const Verb verb = task.kind == TaskKind::HeatPlace ? Verb::HeatObject : Verb::CoolObject;
      b.goto_r(appliance);
      b.apply(PlanAction{verb, task.object, appliance});
      b.stow(task.object, task.target);
      break;
    }
    case TaskKind::ExamineInLight: {
      b.fetch(task.object, "");
      b.goto_r(task.target);
      if (!b.st.find_receptacle(task.target)->on)
        b.apply(PlanAction{Verb::ToggleObject, task.target, ""});
      break;
    }
  }
  b.apply(PlanAction{Verb::End, "", ""});
  return b.plans;
}

Trajectory run_expert(const WorldState& state, const TaskSpec& task) {
  const auto plans = expert_plan(state, task);
  Trajectory traj;
  traj.initial = state;
  WorldState st = state;
  for (const auto& plan : plans) {
    traj.steps.push_back(TrajStep{observe(st), plan});
    StepResult r = step(st, plan);
    if (!r.ok) throw IntegrityError("expert replay failed: " + r.error.message);
    st = r.state;
  }
  traj.terminal = st;
  return traj;
}

namespace {

std::string task_key(const TaskSpec& t) {
  return std::string(task_kind_name(t.kind)) + "|" + t.object + "|" + t.object2 + "|" +
         t.target + "|" + (t.sliced ? "1" : "0");
}

// Candidate tasks for a held-out scene, excluding parameterizations that
// appear in the expert dataset.
std::vector<TaskSpec> unseen_env_candidates(const SceneSpec& scene) {
  std::set<std::string> train_keys;
  for (const auto& t : train_tasks()) train_keys.insert(task_key(t));

  const auto counts = [&] {
    std::map<Symbol, int> m;
    for (const auto& [cls, n] : scene.objects) m[cls] = n;
    return m;
  }();
  const auto has_receptacle = [&](const Symbol& r) {
    return std::count(scene.receptacles.begin(), scene.receptacles.end(), r) > 0;
  };
  const bool has_micro = has_receptacle(kHeatAppliance);
  const bool has_fridge = has_receptacle(kCoolAppliance);
  const bool has_sink = has_receptacle(kCleanAppliance);
  const bool has_lamp = has_receptacle("FloorLamp");
  const bool has_knife = counts.count(kKnifeClass) > 0;

  std::vector<Symbol> surfaces = placeable_receptacles(scene);
  static const std::vector<Symbol> kContainers = {"Bowl", "Cup", "Mug"};

  std::vector<TaskSpec> out;
  auto add = [&](TaskKind kind, const Symbol& obj, const Symbol& obj2, const Symbol& target,
                 bool sliced) {
    TaskSpec t;
    t.kind = kind;
    t.object = obj;
    t.object2 = obj2;
    t.target = target;
    t.sliced = sliced;
    t.scene_id = scene.id;
    if (!train_keys.count(task_key(t))) out.push_back(t);
  };

  for (const auto& cls : object_catalog()) {
    if (!counts.count(cls.name)) continue;
    for (const auto& target : surfaces) {
      add(TaskKind::PickPlace, cls.name, "", target, false);
      if (cls.cleanable && has_sink) add(TaskKind::CleanPlace, cls.name, "", target, false);
      if (cls.heatable && has_micro) {
        add(TaskKind::HeatPlace, cls.name, "", target, false);
        if (cls.sliceable && has_knife) add(TaskKind::HeatPlace, cls.name, "", target, true);
      }
      if (cls.coolable && has_fridge) {
        add(TaskKind::CoolPlace, cls.name, "", target, false);
        if (cls.sliceable && has_knife) add(TaskKind::CoolPlace, cls.name, "", target, true);
      }
      if (counts.at(cls.name) >= 2) add(TaskKind::PickTwoPlace, cls.name, "", target, false);
    }
    if (cls.examinable && has_lamp)
      add(TaskKind::ExamineInLight, cls.name, "", "FloorLamp", false);
  }
  for (const auto& container : kContainers) {
    if (!counts.count(container)) continue;
    for (const auto& cls : object_catalog()) {
      if (cls.name == container || cls.knife || !counts.count(cls.name)) continue;
      for (const auto& target : surfaces) add(TaskKind::StackPlace, container, cls.name, target, false);
    }
  }
  return out;
}

}  // namespace

std::vector<SuiteEntry> sample_suite(Category category, int n, std::uint64_t seed) {
  std::vector<SuiteEntry> out;
  const auto& tasks = train_tasks();
  const auto entry_seed = [&](int i) {
    return mix_seed(seed, std::string(category_name(category)) + ":" + std::to_string(i));
  };

  switch (category) {
    case Category::Train: {
      const int count = n <= 0 ? static_cast<int>(tasks.size())
                               : std::min<int>(n, static_cast<int>(tasks.size()));
      for (int i = 0; i < count; ++i) {
        SuiteEntry e;
        e.task = tasks[i];
        e.state = new_scene(e.task.scene_id, seed, Category::Train);
        out.push_back(std::move(e));
      }
      break;
    }
    case Category::Seen:
    case Category::UnseenSpatial: {
      const int count = n <= 0 ? static_cast<int>(tasks.size()) : n;
      const char* prefix = category == Category::Seen ? "seen" : "uspatial";
      for (int i = 0; i < count; ++i) {
        SuiteEntry e;
        e.task = tasks[i % tasks.size()];
        e.task.task_id = std::string(prefix) + "-" + std::to_string(seed) + "-" +
                         std::to_string(i);
        e.state = new_scene(e.task.scene_id, entry_seed(i), category);
        out.push_back(std::move(e));
      }
      break;
    }
    case Category::UnseenEnvironment: {
      std::vector<TaskSpec> candidates;
      for (const auto& scene : scene_catalog())
        if (scene.held_out) {
          auto c = unseen_env_candidates(scene);
          candidates.insert(candidates.end(), c.begin(), c.end());
        }
      auto rng = make_rng(seed, "suite:uenv");
      std::shuffle(candidates.begin(), candidates.end(), rng);
      const int count = n <= 0 ? static_cast<int>(tasks.size())
                               : std::min<int>(n, static_cast<int>(candidates.size()));
      for (int i = 0; i < count; ++i) {
        SuiteEntry e;
        e.task = candidates[i];
        e.task.task_id = "uenv-" + std::to_string(seed) + "-" + std::to_string(i);
        e.state = new_scene(e.task.scene_id, entry_seed(i), Category::UnseenEnvironment);
        out.push_back(std::move(e));
      }
      break;
    }
  }
  return out;
}

}  // namespace rplan::sim
