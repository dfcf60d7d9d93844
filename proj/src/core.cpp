#include "stmreg/core.hpp"

#include <algorithm>
#include <sstream>

namespace stmreg {

std::string EntityRef::str() const {
  return consultant_id + "_" + std::to_string(local_index);
}

bool Formula::has_variable(const std::string& name) const {
  return std::any_of(variables.begin(), variables.end(),
                     [&](const TypedVar& v) { return v.name == name; });
}

std::string Formula::str() const {
  std::ostringstream out;
  out << predicate << '(';
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (i > 0) out << ',';
    out << variables[i].name << ':' << variables[i].type;
  }
  out << ')';
  return out.str();
}

Bindings rebind(const Bindings& bindings, const EntityRef& from, const EntityRef& to) {
  Bindings result = bindings;
  for (auto& [var, entity] : result) {
    if (entity == from) entity = to;
  }
  return result;
}

std::vector<TypedVar> find_unbound(const Formula& formula, const Bindings& bindings) {
  std::vector<TypedVar> unbound;
  for (const TypedVar& v : formula.variables) {
    if (!bindings.contains(v.name)) unbound.push_back(v);
  }
  return unbound;
}

bool is_ground(const Formula& formula, const Bindings& bindings) {
  return find_unbound(formula, bindings).empty();
}

bool BoundProperty::references(const EntityRef& entity) const {
  return std::any_of(bindings.begin(), bindings.end(),
                     [&](const auto& kv) { return kv.second == entity; });
}

std::string BoundProperty::str() const {
  std::ostringstream out;
  out << formula.predicate << '(';
  for (std::size_t i = 0; i < formula.variables.size(); ++i) {
    if (i > 0) out << ',';
    auto it = bindings.find(formula.variables[i].name);
    if (it != bindings.end())
      out << it->second.str();
    else
      out << formula.variables[i].name;
  }
  out << ')';
  return out.str();
}

bool contains_property(const SubDescription& sub, const BoundProperty& prop) {
  return std::find(sub.begin(), sub.end(), prop) != sub.end();
}

void add_property(SubDescription& sub, BoundProperty prop) {
  if (!contains_property(sub, prop)) sub.push_back(std::move(prop));
}

std::vector<EntityRef> entities_in(const SubDescription& sub) {
  std::vector<EntityRef> seen;
  for (const BoundProperty& prop : sub) {
    for (const TypedVar& v : prop.formula.variables) {
      auto it = prop.bindings.find(v.name);
      if (it == prop.bindings.end()) continue;
      if (std::find(seen.begin(), seen.end(), it->second) == seen.end())
        seen.push_back(it->second);
    }
  }
  return seen;
}

std::string to_string(const SubDescription& sub) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (i > 0) out << ", ";
    out << sub[i].str();
  }
  out << '}';
  return out.str();
}

bool Description::contains(const EntityRef& entity) const {
  return find(entity) != nullptr;
}

const SubDescription* Description::find(const EntityRef& entity) const {
  for (const auto& [ref, sub] : entries) {
    if (ref == entity) return &sub;
  }
  return nullptr;
}

void Description::add(const EntityRef& entity, SubDescription sub) {
  entries.emplace_back(entity, std::move(sub));
}

}  // namespace stmreg
