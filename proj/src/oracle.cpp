#include "stmreg/oracle.hpp"

#include "stmreg/reg.hpp"

#include <algorithm>
#include <set>

namespace stmreg {

namespace {

double peek_probability(const World& world, const EntityRef& subject,
                        const BoundProperty& prop) {
  return world.consultant_for(subject, prop.formula).peek(prop.formula, prop.bindings);
}

// Every ground property the catalog can state about the target: unary
// templates bound directly, relational ones over all cross-bindings.
SubDescription candidate_pool(const World& world, const EntityRef& target) {
  const Consultant& owner = world.owner_of(target);
  SubDescription pool;
  for (const Formula& formula : owner.constraints()) {
    if (formula.arity() == 1) {
      Bindings b{{formula.variables.front().name, target}};
      add_property(pool, BoundProperty{formula, std::move(b)});
      continue;
    }
    for (Bindings& grounding : cross_bindings(world, formula, {}, target)) {
      std::vector<TypedVar> unbound = find_unbound(formula, grounding);
      if (unbound.size() != 1) continue;
      grounding[unbound.front().name] = target;
      add_property(pool, BoundProperty{formula, std::move(grounding)});
    }
  }
  return pool;
}

}  // namespace

bool eliminates_all_distractors(const World& world, const EntityRef& target,
                                const SubDescription& props, double tau) {
  for (const EntityRef& x : world.all_entities()) {
    if (x == target) continue;
    bool eliminated = false;
    for (const BoundProperty& prop : props) {
      BoundProperty rebound{prop.formula, rebind(prop.bindings, target, x)};
      if (peek_probability(world, x, rebound) < tau) {
        eliminated = true;
        break;
      }
    }
    if (!eliminated) return false;
  }
  return true;
}

OracleResult brute_force_oracle(const World& world, const EntityRef& target, double tau) {
  const std::vector<EntityRef> entities = world.all_entities();
  if (entities.size() > 8)
    throw Error("oracle instance above desk scale: " + std::to_string(entities.size()) +
                " entities (max 8)");
  const Consultant& owner = world.owner_of(target);
  if (owner.constraints().size() > 10)
    throw Error("oracle instance above desk scale: " +
                std::to_string(owner.constraints().size()) + " catalog formulas (max 10)");

  std::vector<EntityRef> distractors = entities;
  std::erase(distractors, target);

  OracleResult result;
  if (distractors.empty()) {
    result.discriminable = true;
    result.minimal_sets.push_back(SubDescription{});
    return result;
  }

  // Collect properties that hold for the target, with elimination bitmasks
  // over the distractor list.
  std::vector<std::uint64_t> masks;
  for (const BoundProperty& prop : candidate_pool(world, target)) {
    if (!(peek_probability(world, target, prop) > tau)) continue;
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < distractors.size(); ++i) {
      BoundProperty rebound{prop.formula, rebind(prop.bindings, target, distractors[i])};
      if (peek_probability(world, distractors[i], rebound) < tau)
        mask |= std::uint64_t{1} << i;
    }
    result.holding_pool.push_back(prop);
    masks.push_back(mask);
  }

  const std::uint64_t full = (std::uint64_t{1} << distractors.size()) - 1;
  std::uint64_t reachable = 0;
  for (std::uint64_t m : masks) reachable |= m;
  result.discriminable = reachable == full;
  if (!result.discriminable) return result;

  // Enumerate minimal covers: branch on the lowest uncovered distractor, try
  //each property that eliminates it, keep covers in which every member is
  // necessary.
  std::set<std::vector<std::size_t>> found;
  std::vector<std::size_t> chosen;
  auto search = [&](auto&& self, std::uint64_t covered) -> void {
    if (covered == full) {
      for (std::size_t member : chosen) {
        std::uint64_t without = 0;
        for (std::size_t other : chosen) {
          if (other != member) without |= masks[other];
        }
        if (without == full) return;  // member redundant: not a minimal cover
      }
      std::vector<std::size_t> canon = chosen;
      std::sort(canon.begin(), canon.end());
      found.insert(std::move(canon));
      return;
    }
    std::size_t lowest = 0;
    while (covered & (std::uint64_t{1} << lowest)) ++lowest;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (!(masks[i] & (std::uint64_t{1} << lowest))) continue;
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      chosen.push_back(i);
      self(self, covered | masks[i]);
      chosen.pop_back();
    }
  };
  search(search, 0);

  for (const std::vector<std::size_t>& combo : found) {
    SubDescription set;
    for (std::size_t i : combo) set.push_back(result.holding_pool[i]);
    result.minimal_sets.push_back(std::move(set));
  }
  std::sort(result.minimal_sets.begin(), result.minimal_sets.end(),
            [](const SubDescription& a, const SubDescription& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              return to_string(a) < to_string(b);
            });
  return result;
}

}  // namespace stmreg
