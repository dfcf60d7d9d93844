#include "stmreg/reg.hpp"

#include "doctest.h"
#include "stmreg/oracle.hpp"
#include "stmreg/resolver.hpp"
#include "stmreg/scenario.hpp"
#include "support/builders.hpp"
#include "support/paths.hpp"
#include "support/random_world.hpp"

#include <algorithm>
#include <random>

using namespace stmreg;
using testutil::bind1;
using testutil::bind2;
using testutil::binary;
using testutil::ent;
using testutil::unary;

namespace {

const EntityRef o1 = ent("objects", 1);
const EntityRef o2 = ent("objects", 2);
const EntityRef o3 = ent("objects", 3);

std::unique_ptr<World> demo_world() {
  return build_world(load_scenario(testutil::scenario_path("demo_teabox")));
}

ResolutionQuery query_of(const std::string& predicate) {
  return {"X", {{unary(predicate), Bindings{}}}};
}

// Warms the demo buffers the way the walkthrough does.
void warm_demo(World& world) {
  resolve(world, query_of("box"), 0.5);
}

std::vector<std::string> canonical(const SubDescription& sub) {
  std::vector<std::string> out;
  for (const BoundProperty& p : sub) out.push_back(p.str());
  std::sort(out.begin(), out.end());
  return out;
}

bool same_sets(const Description& a, const Description& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (const auto& [entity, sub] : a.entries) {
    const SubDescription* other = b.find(entity);
    if (!other || canonical(sub) != canonical(*other)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("order_by_catalog sorts by preference rank, stably") {
  std::vector<Formula> catalog{unary("teabox"), unary("box"), unary("red")};
  std::vector<BoundProperty> props{bind1(unary("red"), o1), bind1(unary("box"), o1)};
  auto ordered = order_by_catalog(props, catalog);
  CHECK(ordered[0] == bind1(unary("box"), o1));
  CHECK(ordered[1] == bind1(unary("red"), o1));

  CHECK(order_by_catalog({}, catalog).empty());

  // Unlisted predicates sort last and keep their relative order.
  std::vector<BoundProperty> mixed{bind1(unary("shiny"), o1), bind1(unary("dusty"), o1),
                                   bind1(unary("red"), o1)};
  auto tail = order_by_catalog(mixed, catalog);
  CHECK(tail[0] == bind1(unary("red"), o1));
  CHECK(tail[1] == bind1(unary("shiny"), o1));
  CHECK(tail[2] == bind1(unary("dusty"), o1));
}

TEST_CASE("cross_bindings grounds all but one target-typed variable") {
  auto world = demo_world();
  auto bindings = cross_bindings(*world, binary("on"), {}, o1);
  REQUIRE(bindings.size() == 4);
  CHECK(bindings[0] == Bindings{{"Y", o2}});
  CHECK(bindings[1] == Bindings{{"Y", o3}});
  CHECK(bindings[2] == Bindings{{"X", o2}});
  CHECK(bindings[3] == Bindings{{"X", o3}});
}

TEST_CASE("cross_bindings leaves only target-typed variables free") {
  World world;
  Consultant& objects = world.add_consultant("objects", "object", {});
  objects.add_entity(1, "object");
  objects.add_constraint(Formula{"at", {{"X", "object"}, {"L", "place"}}});
  Consultant& places = world.add_consultant("places", "place", {});
  places.add_entity(1, "place");
  places.add_entity(2, "place");

  auto bindings = cross_bindings(world, Formula{"at", {{"X", "object"}, {"L", "place"}}},
                                 {}, ent("objects", 1));
  // Only X matches the target type; L ranges over the two places.
  REQUIRE(bindings.size() == 2);
  CHECK(bindings[0] == Bindings{{"L", ent("places", 1)}});
  CHECK(bindings[1] == Bindings{{"L", ent("places", 2)}});
}

TEST_CASE("cross_bindings with no filler of the right type is empty") {
  World world;
  Consultant& objects = world.add_consultant("objects", "object", {});
  objects.add_entity(1, "object");
  CHECK(cross_bindings(world, binary("on"), {}, ent("objects", 1)).empty());
}

TEST_CASE("stm_apply hits skip LTM, misses fall through") {
  auto world = demo_world();
  warm_demo(*world);
  Consultant& objects = *world->find_consultant("objects");
  const auto before = objects.counters().snapshot();

  // box(objects_2) was cached by the resolution.
  CHECK(stm_apply(*world, o2, unary("box"), {{"X", o2}}) == 1.0);
  auto after_hit = objects.counters().snapshot() - before;
  CHECK(after_hit.ltm_queries == 0);
  CHECK(after_hit.stm_hits == 1);
  CHECK(after_hit.stm_misses == 0);

  // box(objects_3) is not cached and not a fact: one LTM query.
  CHECK(stm_apply(*world, o3, unary("box"), {{"X", o3}}) == 0.0);
  auto after_miss = objects.counters().snapshot() - before;
  CHECK(after_miss.ltm_queries == 1);
  CHECK(after_miss.stm_hits == 1);
  CHECK(after_miss.stm_misses == 1);
}

TEST_CASE("stm_apply trusts the cache over the fact table") {
  auto world = demo_world();
  Consultant& objects = *world->find_consultant("objects");
  objects.stm_insert(o2, bind1(unary("red"), o2), 0);
  objects.impose(unary("red"), {{"X", o2}}, 0.0);
  CHECK(stm_apply(*world, o2, unary("red"), {{"X", o2}}) == 1.0);  // the cache wins
}

TEST_CASE("stm stage uses cached properties to prune distractors") {
  auto world = demo_world();
  warm_demo(*world);
  RegConfig config;
  auto stage = sd_pia_stm_h(*world, o1, config);
  CHECK(stage.fetched);
  CHECK(canonical(stage.partial) == std::vector<std::string>{"box(objects_1)"});
  CHECK(stage.remaining == std::vector<EntityRef>{o2});
}

TEST_CASE("stm stage with an empty buffer changes nothing") {
  auto world = demo_world();
  RegConfig config;
  auto stage = sd_pia_stm_h(*world, o1, config);
  CHECK(stage.partial.empty());
  CHECK(stage.remaining == std::vector<EntityRef>{o2, o3});
}

TEST_CASE("stm stage skips a property cached for every distractor") {
  auto world = demo_world();
  Consultant& objects = *world->find_consultant("objects");
  for (const EntityRef& e : {o1, o2, o3})
    objects.stm_insert(e, bind1(unary("teabox"), e), 0);
  RegConfig config;
  auto stage = sd_pia_stm_h(*world, o1, config);
  CHECK(stage.partial.empty());  // hit on both distractors: nothing eliminated
  CHECK(stage.remaining == std::vector<EntityRef>{o2, o3});
}

TEST_CASE("stm stage is disabled for the baseline") {
  auto world = demo_world();
  warm_demo(*world);
  RegConfig config;
  config.stm_enabled = false;
  auto stage = sd_pia_stm_h(*world, o1, config);
  CHECK(!stage.fetched);
  CHECK(stage.partial.empty());
  CHECK(stage.remaining == std::vector<EntityRef>{o2, o3});
}

TEST_CASE("catalog stage reproduces the teabox walkthrough step by step") {
  auto world = demo_world();
  warm_demo(*world);

  std::vector<std::string> applied;
  world->set_apply_observer([&](const std::string&, const BoundProperty& prop, double) {
    applied.push_back(prop.str());
  });

  RegConfig config;
  std::vector<EntityRef> remaining{o2};
  SubDescription partial{bind1(unary("box"), o1)};
  SubDescription sub = sd_pia_h(*world, o1, remaining, partial, config);

  CHECK(canonical(sub) == std::vector<std::string>{"box(objects_1)", "red(objects_1)"});
  CHECK(remaining.empty());
  // teabox held for both so it was skipped; table failed the target check;
  // box was excluded up front; red finished the job. on(X,Y) never came up.
  CHECK(applied == std::vector<std::string>{"teabox(objects_1)", "teabox(objects_2)",
                                            "table(objects_1)", "red(objects_1)",
                                            "red(objects_2)"});
}

TEST_CASE("catalog stage returns immediately with no distractors left") {
  auto world = demo_world();
  std::size_t applies = 0;
  world->set_apply_observer([&](const std::string&, const BoundProperty&, double) {
    ++applies;
  });
  RegConfig config;
  std::vector<EntityRef> remaining;
  SubDescription sub = sd_pia_h(*world, o1, remaining, {bind1(unary("box"), o1)}, config);
  CHECK(sub == SubDescription{bind1(unary("box"), o1)});
  CHECK(applies == 0);
}

TEST_CASE("every apply in a relational run is ground") {
  auto world = build_world(load_scenario(testutil::scenario_path("relational_chain")));
  bool all_ground = true;
  world->set_apply_observer([&](const std::string&, const BoundProperty& prop, double) {
    all_ground = all_ground && prop.ground();
  });
  RegConfig config;
  sd_pia(*world, o1, config);
  CHECK(all_ground);
}

TEST_CASE("warmed sd_pia reproduces the demo descriptions") {
  auto world = demo_world();
  warm_demo(*world);
  RegConfig config;

  RegResult first = sd_pia(*world, o1, config);
  REQUIRE(first.description.find(o1) != nullptr);
  CHECK(canonical(*first.description.find(o1)) ==
        std::vector<std::string>{"box(objects_1)", "red(objects_1)"});
  CHECK(first.fully_discriminating());
  CHECK(first.stm_stage_calls == 1);
  CHECK(first.stm_fetches == 1);
  CHECK(first.counter_deltas.at("objects").ltm_queries == 6);

  RegResult second = sd_pia(*world, o2, config);
  REQUIRE(second.description.find(o2) != nullptr);
  CHECK(canonical(*second.description.find(o2)) ==
        std::vector<std::string>{"box(objects_2)", "green(objects_2)"});
  CHECK(second.counter_deltas.at("objects").ltm_queries == 7);
}

TEST_CASE("single-entity world yields an empty sub-description") {
  auto world = testutil::WorldBuilder{}
                   .entities(1)
                   .constraint(unary("red"))
                   .fact("red", 1)
                   .build();
  RegConfig config;
  RegResult result = sd_pia(*world, o1, config);
  REQUIRE(result.description.find(o1) != nullptr);
  CHECK(result.description.find(o1)->empty());
  CHECK(result.unresolved.at(o1).empty());
  CHECK(result.fully_discriminating());
}

TEST_CASE("relational descriptions enqueue and describe the mentioned entity") {
  auto world = build_world(load_scenario(testutil::scenario_path("relational_chain")));
  RegConfig config;
  RegResult result = sd_pia(*world, o1, config);

  REQUIRE(result.description.entries.size() == 2);
  CHECK(result.description.entries[0].first == o1);
  CHECK(result.description.entries[1].first == o3);
  CHECK(canonical(*result.description.find(o1)) ==
        std::vector<std::string>{"box(objects_1)", "on(objects_1,objects_3)"});
  CHECK(canonical(*result.description.find(o3)) ==
        std::vector<std::string>{"table(objects_3)"});
  CHECK(result.fully_discriminating());

  // The relation really is the first discriminating finisher in preference
  // order: the oracle has no unary-only minimal set.
  auto fresh = build_world(load_scenario(testutil::scenario_path("relational_chain")));
  OracleResult oracle = brute_force_oracle(*fresh, o1, 0.5);
  REQUIRE(oracle.discriminable);
  for (const SubDescription& set : oracle.minimal_sets) {
    bool has_relation = std::any_of(set.begin(), set.end(), [](const BoundProperty& p) {
      return p.formula.arity() == 2;
    });
    CHECK(has_relation);
  }
}

TEST_CASE("twins leave a distractor unresolved") {
  auto world = build_world(load_scenario(testutil::scenario_path("twins")));
  RegConfig config;
  RegResult result = sd_pia(*world, o1, config);
  CHECK(!result.fully_discriminating());
  CHECK(result.unresolved.at(o1) == std::vector<EntityRef>{o2});
}

TEST_CASE("dist_pia equals cold sd_pia on random worlds, description for description") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    Scenario scenario = testutil::random_scenario(rng);
    for (const EntityRef& target : testutil::scenario_entities(scenario)) {
      auto cold = build_world(scenario);
      RegConfig cold_config;
      cold_config.populate_stm = false;  // empty buffers stay empty
      RegResult sd = sd_pia(*cold, target, cold_config);

      auto baseline = build_world(scenario);
      RegConfig config;
      RegResult dist = dist_pia(*baseline, target, config);

      REQUIRE(same_sets(sd.description, dist.description));
      REQUIRE(sd.unresolved == dist.unresolved);
    }
  }
}

TEST_CASE("warmed runs never skip a better-ranked discriminating cached property") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 100; ++trial) {
    Scenario scenario = testutil::random_scenario(rng);
    auto world = build_world(scenario);
    const auto entities = world->all_entities();

    // Warm buffers through resolutions of random unary predicates.
    const auto& catalog = world->consultants().front()->constraints();
    for (int warm = 0; warm < 3; ++warm) {
      const Formula& f = catalog[rng() % catalog.size()];
      if (f.arity() != 1) continue;
      resolve(*world, {"X", {{f, Bindings{}}}}, 0.5);
    }

    const EntityRef target = entities[rng() % entities.size()];
    const Consultant& owner = world->owner_of(target);

    // Catalog rank of the best cached property that would eliminate at least
    // one distractor under the stm_apply semantics at this snapshot.
    auto rank_of = [&](const BoundProperty& p) {
      for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (catalog[i].predicate == p.formula.predicate) return i;
      }
      return catalog.size();
    };
    std::size_t best_cached = catalog.size() + 1;
    for (const BoundProperty& cached : owner.stm_contents(target, world->now())) {
      bool eliminates = false;
      for (const EntityRef& x : entities) {
        if (x == target) continue;
        BoundProperty rebound{cached.formula, rebind(cached.bindings, target, x)};
        double p = world->owner_of(x).stm_contains(x, rebound, world->now())
                       ? 1.0
                       : world->consultant_for(x, rebound.formula)
                             .peek(rebound.formula, rebound.bindings);
        if (p < 0.5) eliminates = true;
      }
      if (eliminates) best_cached = std::min(best_cached, rank_of(cached));
    }
    if (best_cached > catalog.size()) continue;  // nothing discriminating cached

    RegConfig config;
    RegResult result = sd_pia(*world, target, config);
    const SubDescription* sub = result.description.find(target);
    REQUIRE(sub != nullptr);
    REQUIRE(!sub->empty());
    std::size_t best_used = catalog.size() + 1;
    for (const BoundProperty& p : *sub) best_used = std::min(best_used, rank_of(p));
    REQUIRE(best_used <= best_cached);
  }
}

TEST_CASE("descriptions from clean warmed runs hold in the fact table") {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    Scenario scenario = testutil::random_scenario(rng);
    auto world = build_world(scenario);
    const auto entities = world->all_entities();

    const auto& catalog = world->consultants().front()->constraints();
    for (int warm = 0; warm < 2; ++warm) {
      const Formula& f = catalog[rng() % catalog.size()];
      if (f.arity() != 1) continue;
      resolve(*world, {"X", {{f, Bindings{}}}}, 0.5);
    }

    const EntityRef target = entities[rng() % entities.size()];
    RegConfig config;
    RegResult result = sd_pia(*world, target, config);
    for (const auto& [entity, sub] : result.description.entries) {
      for (const BoundProperty& prop : sub) {
        double p = world->consultant_for(entity, prop.formula)
                       .peek(prop.formula, prop.bindings);
        REQUIRE(p > config.tau_dph);
      }
    }
  }
}

TEST_CASE("every added property eliminated at least one distractor") {
  // Audit on random cold runs: each property of a sub-description rules out
  // some distractor on its own, per the fact table.
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    Scenario scenario = testutil::random_scenario(rng);
    auto world = build_world(scenario);
    const auto entities = world->all_entities();
    if (entities.size() < 2) continue;
    const EntityRef target = entities[rng() % entities.size()];
    RegConfig config;
    RegResult result = dist_pia(*world, target, config);
    for (const auto& [entity, sub] : result.description.entries) {
      for (const BoundProperty& prop : sub) {
        bool eliminates_someone = false;
        for (const EntityRef& x : entities) {
          if (x == entity) continue;
          BoundProperty rebound{prop.formula, rebind(prop.bindings, entity, x)};
          if (world->consultant_for(x, rebound.formula)
                  .peek(rebound.formula, rebound.bindings) < config.tau_dph)
            eliminates_someone = true;
        }
        REQUIRE(eliminates_someone);
      }
    }
  }
}

TEST_CASE("a consultant with an empty catalog describes nothing but still answers") {
  World world;
  Consultant& mute = world.add_consultant("mute", "thing", {});
  mute.add_entity(1, "thing");
  mute.add_entity(2, "thing");
  RegConfig config;
  RegResult result = sd_pia(world, ent("mute", 1), config);
  REQUIRE(result.description.find(ent("mute", 1)) != nullptr);
  CHECK(result.description.find(ent("mute", 1))->empty());
  CHECK(result.unresolved.at(ent("mute", 1)) == std::vector<EntityRef>{ent("mute", 2)});
}

TEST_CASE("stm misses never exceed ltm queries") {
  std::mt19937 rng(1212);
  for (int trial = 0; trial < 30; ++trial) {
    Scenario scenario = testutil::random_scenario(rng);
    auto world = build_world(scenario);
    const auto& catalog = world->consultants().front()->constraints();
    for (int warm = 0; warm < 2; ++warm) {
      const Formula& f = catalog[rng() % catalog.size()];
      if (f.arity() == 1) resolve(*world, {"X", {{f, Bindings{}}}}, 0.5);
    }
    const auto entities = world->all_entities();
    RegConfig config;
    sd_pia(*world, entities[rng() % entities.size()], config);
    for (const auto& [id, counters] : world->counters_snapshot()) {
      REQUIRE(counters.stm_misses <= counters.ltm_queries);
    }
  }
}

TEST_CASE("reg config validation rejects degenerate thresholds") {
  auto world = demo_world();
  RegConfig config;
  config.tau_dph = 0.0;
  CHECK_THROWS_AS(sd_pia(*world, o1, config), Error);
  config.tau_dph = 1.0;
  CHECK_THROWS_AS(sd_pia(*world, o1, config), Error);
}

TEST_CASE("unknown targets are rejected") {
  auto world = demo_world();
  RegConfig config;
  CHECK_THROWS_AS(sd_pia(*world, ent("objects", 42), config), Error);
  CHECK_THROWS_AS(dist_pia(*world, ent("ghosts", 1), config), Error);
}
