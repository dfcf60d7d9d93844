#pragma once

#include "stmreg/scenario.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace testutil {

// Random single-consultant scenario: up to 6 entities, up to 8 unary
// predicates plus an optional binary one, fact probabilities drawn from
// {0, 0.3, 0.7, 1.0}.
inline stmreg::Scenario random_scenario(std::mt19937& rng) {
  stmreg::Scenario scenario;
  scenario.name = "random";
  scenario.types = {"object"};
  scenario.tau_dph = 0.5;

  std::uniform_int_distribution<int> entity_dist(1, 6);
  std::uniform_int_distribution<int> unary_dist(1, 8);
  std::uniform_int_distribution<int> coin(0, 1);
  const double prob_values[] = {0.0, 0.3, 0.7, 1.0};
  std::uniform_int_distribution<int> prob_dist(0, 3);

  stmreg::ConsultantDecl consultant;
  consultant.id = "objects";
  consultant.default_type = "object";

  int entities = entity_dist(rng);
  for (int i = 1; i <= entities; ++i)
    consultant.entities.push_back({static_cast<std::uint32_t>(i), "object", 0});

  int unary_count = unary_dist(rng);
  std::vector<stmreg::Formula> formulas;
  for (int i = 0; i < unary_count; ++i)
    formulas.push_back(stmreg::Formula{"p" + std::to_string(i), {{"X", "object"}}});
  bool with_binary = coin(rng) == 1;
  if (with_binary)
    formulas.push_back(stmreg::Formula{"rel", {{"X", "object"}, {"Y", "object"}}});
  std::shuffle(formulas.begin(), formulas.end(), rng);
  for (stmreg::Formula& f : formulas) consultant.catalog.push_back({std::move(f), {}, {}, 0});

  scenario.consultants.push_back(std::move(consultant));

  for (const stmreg::CatalogDecl& entry : scenario.consultants.front().catalog) {
    const stmreg::Formula& f = entry.formula;
    if (f.arity() == 1) {
      for (int i = 1; i <= entities; ++i) {
        double p = prob_values[prob_dist(rng)];
        if (p == 0.0) continue;
        stmreg::FactDecl fact;
        fact.prop.formula = f;
        fact.prop.bindings = {{"X", {"objects", static_cast<std::uint32_t>(i)}}};
        fact.probability = p;
        scenario.facts.push_back(std::move(fact));
      }
    } else {
      for (int a = 1; a <= entities; ++a) {
        for (int b = 1; b <= entities; ++b) {
          if (a == b) continue;
          double p = prob_values[prob_dist(rng)];
          if (p == 0.0) continue;
          stmreg::FactDecl fact;
          fact.prop.formula = f;
          fact.prop.bindings = {{"X", {"objects", static_cast<std::uint32_t>(a)}},
                                {"Y", {"objects", static_cast<std::uint32_t>(b)}}};
          fact.probability = p;
          scenario.facts.push_back(std::move(fact));
        }
      }
    }
  }
  return scenario;
}

inline std::vector<stmreg::EntityRef> scenario_entities(const stmreg::Scenario& scenario) {
  std::vector<stmreg::EntityRef> out;
  for (const auto& consultant : scenario.consultants) {
    for (const auto& entity : consultant.entities)
      out.push_back({consultant.id, entity.index});
  }
  return out;
}

}  // namespace testutil
