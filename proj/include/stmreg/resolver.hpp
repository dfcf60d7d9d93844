#pragma once

#include "stmreg/consultant.hpp"
#include "stmreg/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace stmreg {

// A conjunction of unary properties over one unbound target variable, e.g.
// tall(X), red(X), box(X). Relational properties are not resolvable here.
struct ResolutionQuery {
  std::string target_variable;
  std::vector<std::pair<Formula, Bindings>> properties;

  std::string str() const;
};

struct ResolutionResult {
  std::vector<EntityRef> candidates;
  bool ambiguous = false;  // more than one candidate
};

// Incremental filter resolution. Candidates start from the domains of every
// consultant advertising the first property's predicate; each property then
// prunes the survivors with one LTM query per candidate. An entity that
// passes a property gets it cached at that moment, so survivors of a prefix
// carry exactly that prefix in their buffers.
ResolutionResult resolve(World& world, const ResolutionQuery& query, double tau);

}  // namespace stmreg
