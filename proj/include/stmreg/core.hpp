#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stmreg {

// Scripted simulation time. Advances only through explicit tick commands,
// never from the wall clock.
using Tick = std::uint64_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Globally unique entity identifier: the owning consultant plus a local index.
struct EntityRef {
  std::string consultant_id;
  std::uint32_t local_index = 0;

  auto operator<=>(const EntityRef&) const = default;

  // Canonical form, e.g. "objects_1".
  std::string str() const;
};

struct TypedVar {
  std::string name;
  std::string type;

  bool operator==(const TypedVar&) const = default;
};

// Atomic property template: predicate symbol plus an ordered, typed variable
// list. Arity is at least 1 and variable names are distinct.
struct Formula {
  std::string predicate;
  std::vector<TypedVar> variables;

  std::size_t arity() const { return variables.size(); }
  bool has_variable(const std::string& name) const;

  // e.g. "on(X:object,Y:object)"
  std::string str() const;
};

// Partial map from a formula's variable names to entities.
using Bindings = std::map<std::string, EntityRef>;

// Every entry bound to `from` is redirected to `to`; all other entries keep
// their value. `from` may be absent, in which case this is the identity.
Bindings rebind(const Bindings& bindings, const EntityRef& from, const EntityRef& to);

// Variables of `formula` that are absent from `bindings`, in declaration
// order.
std::vector<TypedVar> find_unbound(const Formula& formula, const Bindings& bindings);

bool is_ground(const Formula& formula, const Bindings& bindings);

// A formula together with (possibly partial) bindings. Identity is structural
// on (predicate, bindings); assessment probabilities are never part of it.
struct BoundProperty {
  Formula formula;
  Bindings bindings;

  bool ground() const { return is_ground(formula, bindings); }
  bool references(const EntityRef& entity) const;

  bool operator==(const BoundProperty& other) const {
    return formula.predicate == other.formula.predicate && bindings == other.bindings;
  }
  bool operator<(const BoundProperty& other) const {
    if (formula.predicate != other.formula.predicate)
      return formula.predicate < other.formula.predicate;
    return bindings < other.bindings;
  }

  // Canonical text: bound terms render as entity names, unbound ones as the
  // variable name, e.g. "red(objects_1)", "on(X,objects_3)".
  std::string str() const;
};

// One entity's chosen properties, in the order they were selected. Behaves as
// a set: add_property refuses structural duplicates.
using SubDescription = std::vector<BoundProperty>;

bool contains_property(const SubDescription& sub, const BoundProperty& prop);
void add_property(SubDescription& sub, BoundProperty prop);

// Entities referenced anywhere in the sub-description's bindings,
// first-appearance order.
std::vector<EntityRef> entities_in(const SubDescription& sub);

// "{box(objects_1), red(objects_1)}"
std::string to_string(const SubDescription& sub);

// Maps each described entity to its sub-description, in description order.
struct Description {
  std::vector<std::pair<EntityRef, SubDescription>> entries;

  bool contains(const EntityRef& entity) const;
  const SubDescription* find(const EntityRef& entity) const;
  void add(const EntityRef& entity, SubDescription sub);
};

}  // namespace stmreg
