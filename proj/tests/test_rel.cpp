#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rplan/rel/embedding.hpp"
#include "rplan/sim/text.hpp"
#include "rplan/sim/world.hpp"
#include "rplan/util/errors.hpp"
#include "rplan/util/rng.hpp"

using namespace rplan;
using namespace rplan::rel;

namespace {

std::vector<std::string> expert_corpus() {
  std::vector<std::string> docs;
  for (const auto& e : sim::sample_suite(sim::Category::Train, 0, 1)) {
    const auto traj = sim::run_expert(e.state, e.task);
    for (const auto& s : traj.steps)
      docs.push_back(sim::render_task(e.task) + " " + sim::render_observation(s.obs) + " " +
                     sim::render_plan(s.plan));
  }
  return docs;
}

Embedder fitted() {
  Embedder e(256);
  e.fit(expert_corpus());
  return e;
}

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {
      "Apple", "Bread",  "Mug",    "CounterTop", "SideTable", "heated", "clean",
      "put",   "pick",   "two",    "the",        "a",         "on",     "in",
      "You",   "see",    "are",    "holding",    "nothing",   "Task",   "Agent",
      "slice", "Fridge", "Drawer", "Microwave",  "Sink",      "cold",   "turn"};
  std::uniform_int_distribution<size_t> w(0, words.size() - 1);
  std::uniform_int_distribution<int> len(1, 12);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += " ";
    out += words[w(rng)];
  }
  return out;
}

}  // namespace

TEST_CASE("embed is deterministic and unit-norm on nonempty text") {
  const auto e = fitted();
  const auto a = e.embed("Put a heated Mug on the CounterTop.");
  const auto b = e.embed("Put a heated Mug on the CounterTop.");
  CHECK(a.values == b.values);
  CHECK(relevance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embed of empty text is the zero vector") {
  const auto e = fitted();
  const auto z = e.embed("");
  for (double x : z.values) CHECK(x == 0.0);
}

TEST_CASE("relevance is the exact inner product") {
  const auto e = fitted();
  auto rng = make_rng(5, "rel-oracle");
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = e.embed(random_text(rng));
    const auto b = e.embed(random_text(rng));
    // independent naive summation oracle
    long double dot = 0.0L;
    for (size_t i = 0; i < a.values.size(); ++i)
      dot += static_cast<long double>(a.values[i]) * static_cast<long double>(b.values[i]);
    CHECK(std::abs(relevance(a, b) - static_cast<double>(dot)) <= 1e-12);
    CHECK(relevance(a, b) >= -1.0 - 1e-12);
    CHECK(relevance(a, b) <= 1.0 + 1e-12);
    CHECK(relevance(a, b) == doctest::Approx(relevance(b, a)).epsilon(1e-15));
  }
}

TEST_CASE("relevance of disjoint-bucket texts is zero") {
  const auto e = fitted();
  // distinct single tokens that land in different hash buckets
  const auto a = e.embed("Apple");
  const auto b = e.embed("Microwave");
  bool disjoint = true;
  for (size_t i = 0; i < a.values.size(); ++i)
    if (a.values[i] != 0.0 && b.values[i] != 0.0) disjoint = false;
  REQUIRE(disjoint);
  CHECK(relevance(a, b) == 0.0);
}

TEST_CASE("relevance rejects dimension mismatch") {
  Embedder small(16), big(32);
  CHECK_THROWS_AS(relevance(small.embed("a"), big.embed("a")), EmbeddingError);
}

TEST_CASE("top_k basics") {
  const auto e = fitted();
  const std::vector<std::string> cands = {"Put a heated Mug on the CounterTop.",
                                          "You see the Apple.", "Put a cold Tomato on the SideTable."};
  CHECK(top_k(e, "heated Mug", cands, 0).empty());
  const auto all = top_k(e, "heated Mug", cands, 99);
  CHECK(all.size() == cands.size());
  CHECK(all[0] == 0);
}

TEST_CASE("top_k matches the exhaustive sort oracle with stable ties") {
  const auto e = fitted();
  auto rng = make_rng(11, "topk-oracle");
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::string> cands;
    for (int i = 0; i < 100; ++i) cands.push_back(random_text(rng));
    const auto query = random_text(rng);

    const auto q = e.embed(query);
    std::vector<std::pair<double, int>> oracle;
    for (int i = 0; i < 100; ++i) oracle.emplace_back(relevance(q, e.embed(cands[i])), i);
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });

    const auto got = top_k(e, query, cands, 4);
    REQUIRE(got.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(got[i] == oracle[i].second);

    // prefix property
    const auto five = top_k(e, query, cands, 5);
    for (int i = 0; i < 4; ++i) CHECK(five[i] == got[i]);
  }
}

TEST_CASE("fitted idf table serializes and reproduces embeddings exactly") {
  const auto e = fitted();
  const auto restored = Embedder::from_json(e.to_json());
  auto rng = make_rng(21, "rel-serialize");
  for (int i = 0; i < 50; ++i) {
    const auto t = random_text(rng);
    CHECK(e.embed(t).values == restored.embed(t).values);
  }
}
