#pragma once

#include "stmreg/consultant.hpp"
#include "stmreg/core.hpp"

#include <vector>

namespace stmreg {

struct OracleResult {
  // True when some property set over the target eliminates every distractor.
  bool discriminable = false;
  // All inclusion-minimal discriminating sets, sorted for stable output. For
  // a world with no distractors this is the single empty set.
  std::vector<SubDescription> minimal_sets;
  // Every ground property over the target that holds, preference order.
  SubDescription holding_pool;
};

// Exhaustive reference answer, reading fact tables directly so counters never
// move. Bounded to desk scale: at most 8 entities and 10 catalog formulas.
OracleResult brute_force_oracle(const World& world, const EntityRef& target, double tau);

// Direct fact-table check that `props` eliminates every distractor of
// `target` at threshold `tau`. Used to audit greedy output.
bool eliminates_all_distractors(const World& world, const EntityRef& target,
                                const SubDescription& props, double tau);

}  // namespace stmreg
