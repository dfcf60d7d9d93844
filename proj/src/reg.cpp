#include "stmreg/reg.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <set>

namespace stmreg {

namespace {

std::vector<EntityRef> distractors_of(const World& world, const EntityRef& target) {
  std::vector<EntityRef> distractors = world.all_entities();
  std::erase(distractors, target);
  return distractors;
}

bool uses_template(const SubDescription& sub, const Formula& formula) {
  return std::any_of(sub.begin(), sub.end(), [&](const BoundProperty& p) {
    return p.formula.predicate == formula.predicate && p.formula.arity() == formula.arity();
  });
}

void erase_all(std::vector<EntityRef>& from, const std::vector<EntityRef>& victims) {
  for (const EntityRef& v : victims) std::erase(from, v);
}

void validate_config(const RegConfig& config) {
  if (!(config.tau_dph > 0.0 && config.tau_dph < 1.0))
    throw Error("tau_dph must lie strictly between 0 and 1");
}

}  // namespace

bool RegResult::fully_discriminating() const {
  return std::all_of(unresolved.begin(), unresolved.end(),
                     [](const auto& kv) { return kv.second.empty(); });
}

std::vector<BoundProperty> order_by_catalog(std::vector<BoundProperty> props,
                                            const std::vector<Formula>& catalog) {
  auto rank = [&](const BoundProperty& p) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (catalog[i].predicate == p.formula.predicate &&
          catalog[i].arity() == p.formula.arity())
        return i;
    }
    return catalog.size();
  };
  std::stable_sort(props.begin(), props.end(),
                   [&](const BoundProperty& a, const BoundProperty& b) {
                     return rank(a) < rank(b);
                   });
  return props;
}

std::vector<Bindings> cross_bindings(const World& world, const Formula& formula,
                                     const Bindings& bindings, const EntityRef& target) {
  const std::vector<TypedVar> unbound = find_unbound(formula, bindings);
  const std::string& target_type = world.type_of(target);
  const std::vector<EntityRef> entities = world.all_entities();

  auto fillers_for = [&](const TypedVar& var) {
    std::vector<EntityRef> fillers;
    for (const EntityRef& e : entities) {
      if (e != target && world.type_of(e) == var.type) fillers.push_back(e);
    }
    return fillers;
  };

  std::vector<Bindings> out;
  for (const TypedVar& free_var : unbound) {
    if (free_var.type != target_type) continue;

    std::vector<TypedVar> others;
    for (const TypedVar& v : unbound) {
      if (v.name != free_var.name) others.push_back(v);
    }

    // Odometer over the other variables' fillers, declaration order outermost.
    std::vector<std::vector<EntityRef>> pools;
    pools.reserve(others.size());
    bool feasible = true;
    for (const TypedVar& v : others) {
      pools.push_back(fillers_for(v));
      if (pools.back().empty()) feasible = false;
    }
    if (!feasible) continue;

    std::vector<std::size_t> idx(others.size(), 0);
    bool done = false;
    while (!done) {
      Bindings grounded = bindings;
      for (std::size_t i = 0; i < others.size(); ++i)
        grounded[others[i].name] = pools[i][idx[i]];
      out.push_back(std::move(grounded));

      if (others.empty()) break;
      std::size_t pos = others.size();
      while (true) {
        if (pos == 0) {
          done = true;
          break;
        }
        --pos;
        if (++idx[pos] < pools[pos].size()) break;
        idx[pos] = 0;
      }
    }
  }
  return out;
}

double stm_apply(World& world, const EntityRef& x, const Formula& formula,
                 const Bindings& bindings) {
  Consultant& owner = world.owner_of(x);
  if (owner.stm_contains(x, BoundProperty{formula, bindings}, world.now())) {
    owner.counters().count_stm_hit();
    return 1.0;
  }
  Consultant& responder = world.consultant_for(x, formula);
  responder.counters().count_stm_miss();
  return responder.apply(formula, bindings);
}

StmStageResult sd_pia_stm_h(World& world, const EntityRef& target, const RegConfig& config) {
  validate_config(config);
  StmStageResult result;
  result.remaining = distractors_of(world, target);
  if (!config.stm_enabled) return result;

  Consultant& owner = world.owner_of(target);
  std::vector<BoundProperty> cached = owner.stm_contents(target, world.now());
  result.fetched = true;

  std::deque<BoundProperty> pending;
  for (BoundProperty& p : order_by_catalog(std::move(cached), owner.constraints()))
    pending.push_back(std::move(p));

  while (!result.remaining.empty() && !pending.empty()) {
    BoundProperty prop = std::move(pending.front());
    pending.pop_front();

    std::vector<EntityRef> eliminated;
    for (const EntityRef& x : result.remaining) {
      Bindings for_x = rebind(prop.bindings, target, x);
      if (stm_apply(world, x, prop.formula, for_x) < config.tau_dph)
        eliminated.push_back(x);
    }
    if (!eliminated.empty()) {
      add_property(result.partial, std::move(prop));
      erase_all(result.remaining, eliminated);
    }
  }
  return result;
}

SubDescription sd_pia_h(World& world, const EntityRef& target,
                        std::vector<EntityRef>& remaining, SubDescription partial,
                        const RegConfig& config) {
  validate_config(config);
  Consultant& owner = world.owner_of(target);

  std::deque<std::pair<Formula, Bindings>> pending;
  for (const Formula& f : owner.constraints()) {
    if (!uses_template(partial, f)) pending.emplace_back(f, Bindings{});
  }

  while (!remaining.empty() && !pending.empty()) {
    auto [formula, bindings] = std::move(pending.front());
    pending.pop_front();

    std::vector<TypedVar> unbound = find_unbound(formula, bindings);
    if (unbound.size() > 1) {
      // Expansions are considered before the rest of the catalog, keeping
      // their enumeration order.
      std::vector<Bindings> expansions = cross_bindings(world, formula, bindings, target);
      for (auto it = expansions.rbegin(); it != expansions.rend(); ++it)
        pending.emplace_front(formula, std::move(*it));
      continue;
    }
    assert(unbound.size() == 1);
    const std::string& free_var = unbound.front().name;

    Bindings target_bound = bindings;
    target_bound[free_var] = target;
    double p_target = world.consultant_for(target, formula).apply(formula, target_bound);
    if (!(p_target > config.tau_dph)) continue;

    BoundProperty held{formula, target_bound};
    if (config.populate_stm) world.owner_of(target).stm_insert(target, held, world.now());

    std::vector<EntityRef> eliminated;
    for (const EntityRef& x : remaining) {
      Bindings x_bound = bindings;
      x_bound[free_var] = x;
      if (world.consultant_for(x, formula).apply(formula, x_bound) < config.tau_dph)
        eliminated.push_back(x);
    }
    if (!eliminated.empty()) {
      add_property(partial, std::move(held));
      erase_all(remaining, eliminated);
    }
  }
  return partial;
}

RegResult sd_pia(World& world, const EntityRef& target, const RegConfig& config) {
  validate_config(config);
  world.owner_of(target);  // rejects unknown targets up front

  const auto before = world.counters_snapshot();
  RegResult result;

  std::deque<EntityRef> queue{target};
  std::set<EntityRef> scheduled{target};

  while (!queue.empty()) {
    EntityRef current = std::move(queue.front());
    queue.pop_front();

    StmStageResult stage = sd_pia_stm_h(world, current, config);
    if (config.stm_enabled) {
      ++result.stm_stage_calls;
      if (stage.fetched) ++result.stm_fetches;
    }

    std::vector<EntityRef> remaining = std::move(stage.remaining);
    SubDescription sub =
        sd_pia_h(world, current, remaining, std::move(stage.partial), config);

    result.unresolved[current] = std::move(remaining);
    for (const EntityRef& mentioned : entities_in(sub)) {
      if (scheduled.insert(mentioned).second) queue.push_back(mentioned);
    }
    result.description.add(current, std::move(sub));
  }

  result.counter_deltas = snapshot_delta(before, world.counters_snapshot());
  return result;
}

RegResult dist_pia(World& world, const EntityRef& target, const RegConfig& config) {
  RegConfig baseline = config;
  baseline.stm_enabled = false;
  baseline.populate_stm = false;
  return sd_pia(world, target, baseline);
}

}  // namespace stmreg
