#include "rplan/kg/kgraph.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "rplan/sim/catalog.hpp"
#include "rplan/sim/text.hpp"

namespace rplan::kg {

namespace {

bool is_location_relation(const sim::Symbol& r) { return r == "On" || r == "In"; }

sim::Symbol location_relation(const sim::Symbol& receptacle) {
  const auto* info = sim::find_receptacle_class(receptacle);
  return info && info->openable ? "In" : "On";
}

std::optional<sim::Symbol> state_opposite(const sim::Symbol& o) {
  if (o == "Open") return "Closed";
  if (o == "Closed") return "Open";
  if (o == "On") return "Off";
  if (o == "Off") return "On";
  if (o == "Heated") return "Cooled";
  if (o == "Cooled") return "Heated";
  return std::nullopt;
}

}  // namespace

bool KGraph::contains(const Triple& t) const {
  return std::find(triples_.begin(), triples_.end(), t) != triples_.end();
}

void KGraph::retract_if(const Triple& incoming) {
  auto drop = [&](auto pred) {
    triples_.erase(std::remove_if(triples_.begin(), triples_.end(), pred), triples_.end());
  };
  if (incoming.subject == "Agent") {
    drop([&](const Triple& t) { return t.subject == "Agent" && t.relation == incoming.relation; });
    return;
  }
  if (is_location_relation(incoming.relation)) {
    drop([&](const Triple& t) {
      return t.subject == incoming.subject && is_location_relation(t.relation);
    });
    return;
  }
  if (incoming.relation == "Is") {
    if (auto opp = state_opposite(incoming.object)) {
      drop([&](const Triple& t) {
        return t.subject == incoming.subject && t.relation == "Is" &&
               (t.object == incoming.object || t.object == *opp);
      });
    }
  }
}

void KGraph::assert_triple(const Triple& t) {
  if (contains(t)) return;
  retract_if(t);
  triples_.push_back(t);
}

KGraph initial_graph(const sim::TaskSpec& task) {
  KGraph g;
  const bool examine = task.kind == sim::TaskKind::ExamineInLight;
  g.assert_triple({"Task", "Action", examine ? "Pick" : "Put"});
  g.assert_triple({"Task", "Object", task.object});
  if (!task.object2.empty()) g.assert_triple({"Task", "Object2", task.object2});
  if (task.kind == sim::TaskKind::PickTwoPlace) g.assert_triple({"Task", "Count", "two"});
  switch (task.kind) {
    case sim::TaskKind::CleanPlace: g.assert_triple({"Task", "Modifier", "clean"}); break;
    case sim::TaskKind::HeatPlace: g.assert_triple({"Task", "Modifier", "heated"}); break;
    case sim::TaskKind::CoolPlace: g.assert_triple({"Task", "Modifier", "cold"}); break;
    default: break;
  }
  if (task.sliced) g.assert_triple({"Task", "Modifier", "slice"});
  g.assert_triple({"Task", "Target", task.target});
  g.set_step_index(0);
  return g;
}

namespace {

// lowest-id subject of `cls` that has a location triple at `rec`
std::optional<sim::Symbol> located_instance(const KGraph& g, const sim::Symbol& cls,
                                            const sim::Symbol& rec) {
  std::optional<sim::Symbol> best;
  for (const auto& t : g.triples()) {
    if (!is_location_relation(t.relation) || t.object != rec) continue;
    if (sim::class_of_id(t.subject) != cls) continue;
    if (!best || t.subject < *best) best = t.subject;
  }
  return best;
}

std::optional<sim::Symbol> held_instance(const KGraph& g, const sim::Symbol& cls) {
  for (const auto& t : g.triples())
    if (t.subject == "Agent" && t.relation == "Holding" && sim::class_of_id(t.object) == cls)
      return t.object;
  return std::nullopt;
}

std::optional<sim::Symbol> agent_position(const KGraph& g) {
  for (const auto& t : g.triples())
    if (t.subject == "Agent" && t.relation == "At") return t.object;
  return std::nullopt;
}

void drop_location_of(KGraph& g, const sim::Symbol& id) {
  // asserting a Holding triple does not clear locations, so do it explicitly
  KGraph rebuilt;
  rebuilt.set_step_index(g.step_index());
  for (const auto& t : g.triples())
    if (!(t.subject == id && is_location_relation(t.relation))) rebuilt.assert_triple(t);
  g = rebuilt;
}

void apply_plan_effects(KGraph& g, const sim::PlanAction& plan) {
  using sim::Verb;
  switch (plan.verb) {
    case Verb::GotoLocation:
      g.assert_triple({"Agent", "At", plan.arg1});
      break;
    case Verb::PickupObject: {
      if (auto id = located_instance(g, plan.arg1, plan.arg2)) {
        drop_location_of(g, *id);
        g.assert_triple({"Agent", "Holding", *id});
      }
      break;
    }
    case Verb::PutObject: {
      if (auto id = held_instance(g, plan.arg1)) {
        KGraph rebuilt;
        rebuilt.set_step_index(g.step_index());
        for (const auto& t : g.triples())
          if (!(t.subject == "Agent" && t.relation == "Holding")) rebuilt.assert_triple(t);
        g = rebuilt;
        g.assert_triple({*id, location_relation(plan.arg2), plan.arg2});
      }
      break;
    }
    case Verb::OpenObject:
      g.assert_triple({plan.arg1, "Is", "Open"});
      break;
    case Verb::CloseObject:
      g.assert_triple({plan.arg1, "Is", "Closed"});
      break;
    case Verb::ToggleObject: {
      if (g.contains({plan.arg1, "Is", "On"}))
        g.assert_triple({plan.arg1, "Is", "Off"});
      else if (g.contains({plan.arg1, "Is", "Off"}))
        g.assert_triple({plan.arg1, "Is", "On"});
      break;
    }
    case Verb::HeatObject:
      if (auto id = held_instance(g, plan.arg1)) g.assert_triple({*id, "Is", "Heated"});
      break;
    case Verb::CoolObject:
      if (auto id = held_instance(g, plan.arg1)) g.assert_triple({*id, "Is", "Cooled"});
      break;
    case Verb::CleanObject:
      if (auto id = held_instance(g, plan.arg1)) g.assert_triple({*id, "Is", "Clean"});
      break;
    case Verb::SliceObject: {
      if (auto at = agent_position(g))
        if (auto id = located_instance(g, plan.arg1, *at)) g.assert_triple({*id, "Is", "Sliced"});
      break;
    }
    case Verb::End:
      break;
  }
}

void assert_flags(KGraph& g, const sim::Symbol& id, const sim::ObjectFlags& f) {
  if (f.sliced) g.assert_triple({id, "Is", "Sliced"});
  if (f.heated) g.assert_triple({id, "Is", "Heated"});
  if (f.cooled) g.assert_triple({id, "Is", "Cooled"});
  if (f.clean) g.assert_triple({id, "Is", "Clean"});
}

}  // namespace

KGraph update(const KGraph& g, const std::optional<sim::PlanAction>& prev_plan,
              const sim::Observation& obs) {
  KGraph out = g;
  if (prev_plan) apply_plan_effects(out, *prev_plan);

  out.assert_triple({"Agent", "At", obs.agent_at});

  if (obs.inventory) {
    drop_location_of(out, obs.inventory->id);
    out.assert_triple({"Agent", "Holding", obs.inventory->id});
    assert_flags(out, obs.inventory->id, obs.inventory->flags);
  } else {
    KGraph rebuilt;
    rebuilt.set_step_index(out.step_index());
    for (const auto& t : out.triples())
      if (!(t.subject == "Agent" && t.relation == "Holding")) rebuilt.assert_triple(t);
    out = rebuilt;
  }

  for (const auto& v : obs.visible) {
    out.assert_triple({v.id, location_relation(obs.agent_at), obs.agent_at});
    assert_flags(out, v.id, v.flags);
  }

  if (obs.local.openable)
    out.assert_triple({obs.agent_at, "Is", obs.local.open ? "Open" : "Closed"});
  if (obs.local.toggleable)
    out.assert_triple({obs.agent_at, "Is", obs.local.on ? "On" : "Off"});

  out.set_step_index(g.step_index() + 1);
  return out;
}

KGraph retrieve(const KGraph& g, const sim::Observation& obs, const std::string& h,
                double delta, const rel::Embedder& embedder) {
  const auto query = embedder.embed(h + " " + sim::render_observation(obs));
  KGraph out;
  out.set_step_index(g.step_index());
  for (const auto& t : g.triples()) {
    if (t.subject == "Agent") {
      out.assert_triple(t);
      continue;
    }
    const double score = rel::relevance(embedder.embed(linearize_triple(t)), query);
    if (score >= delta) out.assert_triple(t);
  }
  return out;
}

std::string linearize_triple(const Triple& t) {
  return "(" + t.subject + ", " + t.relation + ", " + t.object + ").";
}

std::string linearize(const KGraph& g) {
  std::string out;
  for (const auto& t : g.triples()) {
    if (!out.empty()) out += " ";
    out += linearize_triple(t);
  }
  return out;
}

std::optional<std::vector<Triple>> parse_triples(std::string_view text) {
  std::vector<Triple> out;
  std::string_view s = text;
  while (!s.empty()) {
    if (s.front() != '(') return std::nullopt;
    s.remove_prefix(1);
    Triple t;
    for (int field = 0; field < 3; ++field) {
      const char* stop = field < 2 ? ", " : ").";
      size_t pos = s.find(stop);
      if (pos == std::string_view::npos || pos == 0) return std::nullopt;
      std::string_view sym = s.substr(0, pos);
      if (sym.find('(') != std::string_view::npos) return std::nullopt;
      if (field == 0) t.subject = sim::Symbol{sym};
      if (field == 1) t.relation = sim::Symbol{sym};
      if (field == 2) t.object = sim::Symbol{sym};
      s.remove_prefix(pos + 2);
    }
    out.push_back(std::move(t));
    if (!s.empty()) {
      if (s.front() != ' ') return std::nullopt;
      s.remove_prefix(1);
    }
  }
  return out;
}

std::string snapshot_jsonl(const KGraph& g) {
  std::string out = nlohmann::json{{"step_index", g.step_index()}}.dump() + "\n";
  for (const auto& t : g.triples())
    out += nlohmann::json{{"s", t.subject}, {"r", t.relation}, {"o", t.object}}.dump() + "\n";
  return out;
}

}  // namespace rplan::kg
