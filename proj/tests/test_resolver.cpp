#include "stmreg/resolver.hpp"

#include "doctest.h"
#include "stmreg/scenario.hpp"
#include "support/builders.hpp"
#include "support/paths.hpp"
#include "support/random_world.hpp"

#include <algorithm>
#include <random>

using namespace stmreg;
using testutil::bind1;
using testutil::ent;
using testutil::unary;

namespace {

const EntityRef o1 = ent("objects", 1);
const EntityRef o2 = ent("objects", 2);
const EntityRef o3 = ent("objects", 3);
const EntityRef o4 = ent("objects", 4);

std::unique_ptr<World> demo_world() {
  return build_world(load_scenario(testutil::scenario_path("demo_teabox")));
}

ResolutionQuery query_of(std::initializer_list<std::string> predicates) {
  ResolutionQuery query;
  query.target_variable = "X";
  for (const std::string& p : predicates) query.properties.emplace_back(unary(p), Bindings{});
  return query;
}

}  // namespace

TEST_CASE("resolving the box finds both teaboxes and caches the property") {
  auto world = demo_world();
  ResolutionResult result = resolve(*world, query_of({"box"}), 0.5);
  CHECK(result.candidates == std::vector<EntityRef>{o1, o2});
  CHECK(result.ambiguous);
  Consultant& objects = *world->find_consultant("objects");
  CHECK(objects.stm_contains(o1, bind1(unary("box"), o1), 0));
  CHECK(objects.stm_contains(o2, bind1(unary("box"), o2), 0));
  CHECK(objects.stm_contents(o3, 0).empty());  // dropped candidates cache nothing
}

TEST_CASE("resolving the table is unambiguous") {
  auto world = demo_world();
  ResolutionResult result = resolve(*world, query_of({"table"}), 0.5);
  CHECK(result.candidates == std::vector<EntityRef>{o3});
  CHECK(!result.ambiguous);
}

TEST_CASE("conjunction survivors carry exactly their satisfied prefix") {
  auto world = build_world(load_scenario(testutil::scenario_path("tall_red_box")));
  ResolutionResult result = resolve(*world, query_of({"tall", "red", "box"}), 0.5);
  CHECK(result.candidates == std::vector<EntityRef>{o1});
  CHECK(!result.ambiguous);

  Consultant& objects = *world->find_consultant("objects");
  auto texts = [&](const EntityRef& e) {
    std::vector<std::string> out;
    for (const BoundProperty& p : objects.stm_contents(e, 0)) out.push_back(p.str());
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(texts(o1) == std::vector<std::string>{"box(objects_1)", "red(objects_1)",
                                              "tall(objects_1)"});
  CHECK(texts(o2) == std::vector<std::string>{"red(objects_2)", "tall(objects_2)"});
  CHECK(texts(o3) == std::vector<std::string>{"tall(objects_3)"});
  CHECK(texts(o4).empty());
}

TEST_CASE("filtering is monotone and order-independent in its survivors") {
  std::mt19937 rng(555);
  for (int trial = 0; trial < 60; ++trial) {
    Scenario scenario = testutil::random_scenario(rng);
    std::vector<Formula> unaries;
    for (const CatalogDecl& entry : scenario.consultants.front().catalog) {
      if (entry.formula.arity() == 1) unaries.push_back(entry.formula);
    }
    if (unaries.size() < 2) continue;
    std::shuffle(unaries.begin(), unaries.end(), rng);
    std::vector<Formula> picked(unaries.begin(),
                                unaries.begin() + 1 + rng() % std::min<std::size_t>(
                                                               unaries.size() - 1, 2));

    // Brute-force answer straight off the scenario's fact list.
    auto holds = [&](const Formula& f, const EntityRef& e) {
      for (const FactDecl& fact : scenario.facts) {
        if (fact.prop.formula.predicate == f.predicate &&
            fact.prop.bindings == Bindings{{"X", e}})
          return fact.probability > 0.5;
      }
      return false;
    };
    std::vector<EntityRef> expected;
    for (const EntityRef& e : testutil::scenario_entities(scenario)) {
      bool all = true;
      for (const Formula& f : picked) all = all && holds(f, e);
      if (all) expected.push_back(e);
    }

    // Incremental filtering, prefix sizes shrinking monotonically.
    auto world = build_world(scenario);
    ResolutionQuery query;
    query.target_variable = "X";
    std::vector<std::size_t> sizes;
    for (const Formula& f : picked) {
      query.properties.emplace_back(f, Bindings{});
      auto fresh = build_world(scenario);
      sizes.push_back(resolve(*fresh, query, 0.5).candidates.size());
    }
    for (std::size_t i = 1; i < sizes.size(); ++i) REQUIRE(sizes[i] <= sizes[i - 1]);
    REQUIRE(resolve(*world, query, 0.5).candidates == expected);

    // Survivors ignore property order.
    std::shuffle(query.properties.begin(), query.properties.end(), rng);
    auto reordered = build_world(scenario);
    REQUIRE(resolve(*reordered, query, 0.5).candidates == expected);
  }
}

TEST_CASE("relational properties are not resolvable") {
  auto world = demo_world();
  ResolutionQuery query;
  query.target_variable = "X";
  query.properties.emplace_back(testutil::binary("on"), Bindings{});
  CHECK_THROWS_AS(resolve(*world, query, 0.5), Error);
}

TEST_CASE("a predicate nobody advertises is an error") {
  auto world = demo_world();
  CHECK_THROWS_AS(resolve(*world, query_of({"weight"}), 0.5), Error);
  CHECK_THROWS_AS(resolve(*world, query_of({"box", "weight"}), 0.5), Error);
  CHECK_THROWS_AS(resolve(*world, ResolutionQuery{"X", {}}, 0.5), Error);
}

TEST_CASE("candidates start from the advertisers of the first predicate") {
  World world;
  Consultant& objects = world.add_consultant("objects", "object", {});
  objects.add_entity(1, "object");
  objects.add_constraint(unary("red"));
  Consultant& sounds = world.add_consultant("sounds", "sound", {});
  sounds.add_entity(1, "sound");
  sounds.add_constraint(unary("loud", "X", "sound"));
  objects.impose(unary("red"), {{"X", ent("objects", 1)}}, 1.0);
  sounds.impose(unary("loud", "X", "sound"), {{"X", ent("sounds", 1)}}, 1.0);

  ResolutionResult result = resolve(world, {"X", {{unary("red"), Bindings{}}}}, 0.5);
  // The sound entity was never a candidate: only `objects` advertises red.
  CHECK(result.candidates == std::vector<EntityRef>{ent("objects", 1)});
}
