#pragma once

#include "stmreg/consultant.hpp"
#include "stmreg/core.hpp"

#include <map>
#include <vector>

namespace stmreg {

struct RegConfig {
  // Threshold above which a property is treated as holding; strictly inside
  // (0,1).
  double tau_dph = 0.5;
  // Read path: consult STM buffers before LTM. Off for the baseline.
  bool stm_enabled = true;
  // Write path: cache properties as they are confirmed for a target.
  bool populate_stm = true;
};

struct RegResult {
  Description description;
  // Distractors that survived both stages, per described entity. Empty for an
  // entity exactly when its sub-description is fully discriminating.
  std::map<EntityRef, std::vector<EntityRef>> unresolved;
  std::map<std::string, CounterSnapshot> counter_deltas;
  // Instrumentation for the buffer's headline saving: the STM stage performs
  // one buffer fetch per invocation instead of one LTM query per catalog
  // entry.
  std::uint64_t stm_stage_calls = 0;
  std::uint64_t stm_fetches = 0;

  bool fully_discriminating() const;
};

// Stable sort by catalog preference rank. Predicates absent from the catalog
// sort after all listed ones and keep their relative (recency) order.
std::vector<BoundProperty> order_by_catalog(std::vector<BoundProperty> props,
                                            const std::vector<Formula>& catalog);

// All groundings of `formula` that fix every unbound variable except one of
// the target's type. Fillers are drawn from the entity domains in declaration
// order and never include the target itself. Result order: free-variable
// declaration order, then filler enumeration order.
std::vector<Bindings> cross_bindings(const World& world, const Formula& formula,
                                     const Bindings& bindings, const EntityRef& target);

// Distractor-side check: returns 1.0 straight from x's buffer on a hit
// (buffers store properties determined to hold, not probabilities), otherwise
// falls through to a single LTM query.
double stm_apply(World& world, const EntityRef& x, const Formula& formula,
                 const Bindings& bindings);

struct StmStageResult {
  SubDescription partial;
  std::vector<EntityRef> remaining;
  bool fetched = false;
};

// First stage: build a partial sub-description for `target` using only its
// cached properties, in catalog preference order. Cached properties are
// trusted to hold for the target; no target-side LTM check is made.
StmStageResult sd_pia_stm_h(World& world, const EntityRef& target, const RegConfig& config);

// Second stage: extend `partial` from the target consultant's catalog,
// skipping templates already used. Relational templates expand over
// cross-bindings before assessment; every assessed property is ground.
SubDescription sd_pia_h(World& world, const EntityRef& target,
                        std::vector<EntityRef>& remaining, SubDescription partial,
                        const RegConfig& config);

// Full run: describe `target`, then every entity its description mentions,
// breadth-first, each entity at most once.
RegResult sd_pia(World& world, const EntityRef& target, const RegConfig& config);

// Baseline: the same loop with the STM read and write paths switched off, so
// divergence can only come from the cache.
RegResult dist_pia(World& world, const EntityRef& target, const RegConfig& config);

}  // namespace stmreg
