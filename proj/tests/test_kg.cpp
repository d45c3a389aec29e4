#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <map>
#include <random>

#include "rplan/kg/kgraph.hpp"
#include "rplan/sim/catalog.hpp"
#include "rplan/sim/text.hpp"
#include "rplan/sim/world.hpp"
#include "rplan/util/rng.hpp"

using namespace rplan;
using namespace rplan::kg;
using rplan::sim::Observation;
using rplan::sim::PlanAction;
using rplan::sim::Verb;

namespace {

rel::Embedder fitted_embedder() {
  std::vector<std::string> docs;
  for (const auto& e : sim::sample_suite(sim::Category::Train, 0, 1)) {
    const auto traj = sim::run_expert(e.state, e.task);
    for (const auto& s : traj.steps)
      docs.push_back(sim::render_task(e.task) + " " + sim::render_observation(s.obs));
  }
  rel::Embedder emb(256);
  emb.fit(docs);
  return emb;
}

Observation obs_at(const sim::WorldState& st) { return sim::observe(st); }

// random walk through a scene that exercises every update path
struct RandomEpisode {
  sim::WorldState st;
  KGraph g;
  std::optional<PlanAction> prev;

  void advance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> verb_pick(0, 9);
    std::uniform_int_distribution<size_t> obj_pick(0, sim::object_catalog().size() - 1);
    std::uniform_int_distribution<size_t> rec_pick(0, st.receptacles.size() - 1);
    PlanAction a;
    a.verb = static_cast<Verb>(verb_pick(rng));
    if (sim::verb_arity(a.verb) >= 1)
      a.arg1 = sim::verb_arg1_is_receptacle(a.verb)
                   ? st.receptacles[rec_pick(rng)].id
                   : sim::object_catalog()[obj_pick(rng)].name;
    if (sim::verb_arity(a.verb) >= 2) a.arg2 = st.receptacles[rec_pick(rng)].id;
    auto r = sim::step(st, a);
    if (r.ok && !r.terminal) {
      st = r.state;
      g = update(g, a, r.obs);
      prev = a;
    } else {
      g = update(g, std::nullopt, sim::observe(st));
      prev.reset();
    }
  }
};

}  // namespace

TEST_CASE("update: a visible apple yields its location triple") {
  auto st = sim::new_scene("kitchen-0", 1, sim::Category::Train);
  st.placement["Apple"] = "DiningTable";
  st.agent_at = "DiningTable";
  const auto g = update(KGraph{}, std::nullopt, obs_at(st));
  CHECK(g.contains({"Apple", "On", "DiningTable"}));
  CHECK(g.contains({"Agent", "At", "DiningTable"}));
}

TEST_CASE("update: picking up a knife replaces its location with Holding") {
  KGraph g;
  g.assert_triple({"ButterKnife", "On", "SideTable"});
  g.assert_triple({"Agent", "At", "SideTable"});

  Observation obs;
  obs.agent_at = "SideTable";
  obs.local.id = "SideTable";
  obs.inventory = sim::VisibleObject{"ButterKnife", "ButterKnife", {}};

  const auto g2 = update(g, PlanAction{Verb::PickupObject, "ButterKnife", "SideTable"}, obs);
  CHECK(g2.contains({"Agent", "Holding", "ButterKnife"}));
  for (const auto& t : g2.triples()) {
    const bool knife_location =
        t.subject == "ButterKnife" && (t.relation == "On" || t.relation == "In");
    CHECK_FALSE(knife_location);
  }
}

TEST_CASE("update: empty observation only adds the agent position") {
  KGraph g;
  g.assert_triple({"Apple", "On", "DiningTable"});
  g.assert_triple({"Task", "Object", "Apple"});

  Observation obs;
  obs.agent_at = "CounterTop";
  obs.local.id = "CounterTop";

  const auto g2 = update(g, std::nullopt, obs);
  REQUIRE(g2.size() == 3);
  CHECK(g2.contains({"Apple", "On", "DiningTable"}));
  CHECK(g2.contains({"Task", "Object", "Apple"}));
  CHECK(g2.contains({"Agent", "At", "CounterTop"}));

  // idempotent for a repeated identical (no plan, obs) pair
  const auto g3 = update(g2, std::nullopt, obs);
  CHECK(g3.triples() == g2.triples());
}

TEST_CASE("update: heated and cooled flags are mutually exclusive") {
  KGraph g;
  g.assert_triple({"Mug", "Is", "Cooled"});
  g.assert_triple({"Agent", "Holding", "Mug"});
  Observation obs;
  obs.agent_at = "Microwave";
  obs.local.id = "Microwave";
  obs.local.openable = true;
  sim::ObjectFlags f;
  f.heated = true;
  obs.inventory = sim::VisibleObject{"Mug", "Mug", f};
  const auto g2 = update(g, PlanAction{Verb::HeatObject, "Mug", "Microwave"}, obs);
  CHECK(g2.contains({"Mug", "Is", "Heated"}));
  CHECK_FALSE(g2.contains({"Mug", "Is", "Cooled"}));
  CHECK(g2.contains({"Microwave", "Is", "Closed"}));
}

TEST_CASE("location uniqueness and holding consistency over random episodes") {
  auto rng = make_rng(77, "kg-random");
  for (int ep = 0; ep < 60; ++ep) {
    RandomEpisode e;
    const auto& scenes = sim::scene_catalog();
    e.st = sim::new_scene(scenes[ep % scenes.size()].id, mix_seed(3, std::to_string(ep)),
                          sim::Category::UnseenSpatial);
    e.g = update(KGraph{}, std::nullopt, sim::observe(e.st));
    for (int t = 0; t < 40; ++t) {
      e.advance(rng);
      std::map<sim::Symbol, int> locs;
      int holding = 0, at = 0;
      for (const auto& tr : e.g.triples()) {
        if (tr.relation == "On" || tr.relation == "In") ++locs[tr.subject];
        if (tr.subject == "Agent" && tr.relation == "Holding") ++holding;
        if (tr.subject == "Agent" && tr.relation == "At") ++at;
      }
      for (const auto& [id, n] : locs) {
        CHECK(n == 1);
        if (e.st.inventory) CHECK(id != *e.st.inventory);
      }
      CHECK(holding <= 1);
      CHECK(at == 1);
      // no duplicate triples
      for (size_t i = 0; i < e.g.triples().size(); ++i)
        for (size_t j = i + 1; j < e.g.triples().size(); ++j)
          CHECK_FALSE(e.g.triples()[i] == e.g.triples()[j]);
    }
  }
}

TEST_CASE("retrieve: threshold extremes") {
  const auto emb = fitted_embedder();
  auto st = sim::new_scene("kitchen-0", 1, sim::Category::Train);
  auto g = initial_graph(sim::train_tasks()[0]);
  g = update(g, std::nullopt, sim::observe(st));
  const auto h = sim::render_task(sim::train_tasks()[0]);

  const double inf = std::numeric_limits<double>::infinity();
  const auto full = retrieve(g, sim::observe(st), h, -inf, emb);
  CHECK(full.triples() == g.triples());

  const auto only_agent = retrieve(g, sim::observe(st), h, inf, emb);
  for (const auto& t : only_agent.triples()) CHECK(t.subject == "Agent");
  CHECK(only_agent.size() >= 1);
}

TEST_CASE("retrieve matches the brute-force filter and is monotone in delta") {
  const auto emb = fitted_embedder();
  auto rng = make_rng(15, "kg-retrieve");
  // build a ~50-triple graph by walking an episode
  RandomEpisode e;
  e.st = sim::new_scene("kitchen-0", 4, sim::Category::UnseenSpatial);
  e.g = initial_graph(sim::train_tasks()[1]);
  e.g = update(e.g, std::nullopt, sim::observe(e.st));
  for (int t = 0; t < 60; ++t) e.advance(rng);
  const auto h = sim::render_task(sim::train_tasks()[1]);
  const auto obs = sim::observe(e.st);

  const auto query = emb.embed(h + " " + sim::render_observation(obs));
  for (double delta : {-1.0, 0.05, 0.15, 0.25, 0.35, 0.5, 0.9}) {
    const auto got = retrieve(e.g, obs, h, delta, emb);
    // brute-force oracle over all triples
    std::vector<Triple> expected;
    for (const auto& t : e.g.triples()) {
      if (t.subject == "Agent" ||
          rel::relevance(emb.embed(linearize_triple(t)), query) >= delta)
        expected.push_back(t);
    }
    CHECK(got.triples() == expected);
  }
  // monotonicity: larger delta keeps a subset
  const auto lo = retrieve(e.g, obs, h, 0.1, emb);
  const auto hi = retrieve(e.g, obs, h, 0.4, emb);
  for (const auto& t : hi.triples()) CHECK(lo.contains(t));
}

TEST_CASE("linearize examples and round-trip") {
  KGraph g;
  CHECK(linearize(g) == "");
  g.assert_triple({"Apple", "On", "DiningTable"});
  CHECK(linearize(g) == "(Apple, On, DiningTable).");
  g.assert_triple({"Agent", "At", "Sink"});
  CHECK(linearize(g) == "(Apple, On, DiningTable). (Agent, At, Sink).");

  auto rng = make_rng(31, "kg-linearize");
  RandomEpisode e;
  e.st = sim::new_scene("kitchen-1", 9, sim::Category::UnseenSpatial);
  e.g = initial_graph(sim::train_tasks()[8]);
  e.g = update(e.g, std::nullopt, sim::observe(e.st));
  for (int t = 0; t < 50; ++t) {
    e.advance(rng);
    const auto text = linearize(e.g);
    const auto parsed = parse_triples(text);
    REQUIRE(parsed.has_value());
    CHECK(*parsed == e.g.triples());
    KGraph rebuilt;
    for (const auto& tr : *parsed) rebuilt.assert_triple(tr);
    CHECK(linearize(rebuilt) == text);
  }
}

TEST_CASE("initial_graph carries the task parameters") {
  const auto& t = sim::train_tasks()[6];  // sliced heat task
  const auto g = initial_graph(t);
  CHECK(g.contains({"Task", "Action", "Put"}));
  CHECK(g.contains({"Task", "Object", "Bread"}));
  CHECK(g.contains({"Task", "Modifier", "heated"}));
  CHECK(g.contains({"Task", "Modifier", "slice"}));
  CHECK(g.contains({"Task", "Target", "SideTable"}));
}
