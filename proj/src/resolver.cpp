#include "stmreg/resolver.hpp"

#include <sstream>

namespace stmreg {

std::string ResolutionQuery::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < properties.size(); ++i) {
    if (i > 0) out << ',';
    out << properties[i].first.predicate << '(' << target_variable << ')';
  }
  return out.str();
}

ResolutionResult resolve(World& world, const ResolutionQuery& query, double tau) {
  if (query.properties.empty()) throw Error("empty resolution query");

  // Validate the whole conjunction before touching any knowledge base.
  for (const auto& [formula, base] : query.properties) {
    if (formula.arity() != 1)
      throw Error("relational property " + formula.str() + " is not resolvable");
    bool advertised = false;
    for (const auto& c : world.consultants())
      advertised = advertised || c->advertises(formula.predicate, formula.arity());
    if (!advertised)
      throw Error("predicate " + formula.predicate + "/1 is advertised by no consultant");
    if (!base.empty() && base.contains(formula.variables.front().name))
      throw Error("target variable of " + formula.str() + " is already bound");
  }

  const Formula& first = query.properties.front().first;
  std::vector<EntityRef> candidates;
  for (const auto& c : world.consultants()) {
    if (c->advertises(first.predicate, first.arity())) {
      const auto& domain = c->domain();
      candidates.insert(candidates.end(), domain.begin(), domain.end());
    }
  }

  for (const auto& [formula, base] : query.properties) {
    std::vector<EntityRef> survivors;
    for (const EntityRef& x : candidates) {
      Bindings bound = base;
      bound[formula.variables.front().name] = x;
      double p = world.consultant_for(x, formula).apply(formula, bound);
      if (p > tau) {
        survivors.push_back(x);
        // Determined to hold: cache it right now, not at the end of the
        // resolution.
        world.owner_of(x).stm_insert(x, BoundProperty{formula, bound}, world.now());
      }
    }
    candidates = std::move(survivors);
  }

  ResolutionResult result;
  result.ambiguous = candidates.size() > 1;
  result.candidates = std::move(candidates);
  return result;
}

}  // namespace stmreg
