#include "stmreg/consultant.hpp"

#include <algorithm>
#include <mutex>

namespace stmreg {

Consultant::Consultant(std::string id, std::string default_type, BufferConfig buffer_config,
                       const PredicateCategories* categories,
                       const std::map<std::string, Tick>* ttl_overrides)
    : id_(std::move(id)),
      default_type_(std::move(default_type)),
      stm_(buffer_config, categories, ttl_overrides) {}

void Consultant::add_entity(std::uint32_t local_index, std::string type) {
  EntityRef ref{id_, local_index};
  if (owns(ref)) throw Error("duplicate entity " + ref.str());
  domain_.push_back(ref);
  entity_types_.push_back(type.empty() ? default_type_ : std::move(type));
}

void Consultant::add_constraint(Formula formula) {
  if (formula.arity() == 0) throw Error("constraint " + formula.predicate + " has arity 0");
  for (std::size_t i = 0; i < formula.variables.size(); ++i) {
    for (std::size_t j = i + 1; j < formula.variables.size(); ++j) {
      if (formula.variables[i].name == formula.variables[j].name)
        throw Error("constraint " + formula.str() + " repeats variable " +
                    formula.variables[i].name);
    }
  }
  if (advertises(formula.predicate, formula.arity()))
    throw Error("consultant '" + id_ + "' already advertises " + formula.predicate + "/" +
                std::to_string(formula.arity()));
  catalog_.push_back(std::move(formula));
}

const Formula* Consultant::find_constraint(const std::string& predicate,
                                           std::size_t arity) const {
  for (const Formula& f : catalog_) {
    if (f.predicate == predicate && f.arity() == arity) return &f;
  }
  return nullptr;
}

bool Consultant::advertises(const std::string& predicate, std::size_t arity) const {
  return find_constraint(predicate, arity) != nullptr;
}

bool Consultant::owns(const EntityRef& entity) const {
  return std::find(domain_.begin(), domain_.end(), entity) != domain_.end();
}

const std::string& Consultant::entity_type(const EntityRef& entity) const {
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    if (domain_[i] == entity) return entity_types_[i];
  }
  throw Error("entity " + entity.str() + " is not in the domain of '" + id_ + "'");
}

Consultant::FactKey Consultant::key_for(const Formula& formula,
                                        const Bindings& bindings) const {
  FactKey key;
  key.predicate = formula.predicate;
  key.args.reserve(formula.variables.size());
  for (const TypedVar& v : formula.variables) {
    auto it = bindings.find(v.name);
    if (it == bindings.end())
      throw Error("non-ground bindings for " + formula.str() + ": missing " + v.name);
    key.args.push_back(it->second);
  }
  return key;
}

double Consultant::lookup(const FactKey& key) const {
  auto it = facts_.find(key);
  return it == facts_.end() ? 0.0 : it->second;
}

double Consultant::apply(const Formula& formula, const Bindings& bindings) {
  if (!advertises(formula.predicate, formula.arity()))
    throw Error("consultant '" + id_ + "' does not advertise " + formula.predicate + "/" +
                std::to_string(formula.arity()));
  FactKey key = key_for(formula, bindings);  // rejects non-ground queries
  double p;
  {
    std::shared_lock lock(mutex_);
    p = lookup(key);
  }
  counters_.count_ltm_query();
  if (observer_ && *observer_) (*observer_)(id_, BoundProperty{formula, bindings}, p);
  return p;
}

double Consultant::peek(const Formula& formula, const Bindings& bindings) const {
  FactKey key = key_for(formula, bindings);
  std::shared_lock lock(mutex_);
  return lookup(key);
}

void Consultant::impose(const Formula& formula, const Bindings& bindings,
                        double probability) {
  if (!advertises(formula.predicate, formula.arity()))
    throw Error("consultant '" + id_ + "' does not advertise " + formula.predicate + "/" +
                std::to_string(formula.arity()));
  if (probability < 0.0 || probability > 1.0)
    throw Error("probability out of range: " + std::to_string(probability));
  FactKey key = key_for(formula, bindings);
  std::unique_lock lock(mutex_);
  if (probability == 0.0)
    facts_.erase(key);
  else
    facts_[key] = probability;
}

std::vector<BoundProperty> Consultant::stm_contents(const EntityRef& entity,
                                                    Tick now) const {
  require_owned(entity);
  std::shared_lock lock(mutex_);
  return stm_.query(entity, now);
}

void Consultant::stm_insert(const EntityRef& entity, const BoundProperty& prop, Tick now) {
  require_owned(entity);
  if (!prop.ground())
    throw Error("cannot cache open property " + prop.str());
  if (!prop.references(entity))
    throw Error("cached property " + prop.str() + " does not mention " + entity.str());
  std::unique_lock lock(mutex_);
  stm_.insert(entity, prop, now);
}

bool Consultant::stm_contains(const EntityRef& entity, const BoundProperty& prop,
                              Tick now) const {
  require_owned(entity);
  std::shared_lock lock(mutex_);
  return stm_.contains(entity, prop, now);
}

void Consultant::require_owned(const EntityRef& entity) const {
  if (!owns(entity))
    throw Error("entity " + entity.str() + " is not in the domain of '" + id_ + "'");
}

Consultant& World::add_consultant(std::string id, std::string default_type,
                                  BufferConfig buffer_config) {
  if (find_consultant(id)) throw Error("duplicate consultant id '" + id + "'");
  consultants_.push_back(std::make_unique<Consultant>(
      std::move(id), std::move(default_type), buffer_config, &categories, &ttl_overrides));
  if (observer_) consultants_.back()->set_apply_observer(&observer_);
  return *consultants_.back();
}

Consultant* World::find_consultant(const std::string& id) {
  for (auto& c : consultants_) {
    if (c->id() == id) return c.get();
  }
  return nullptr;
}

const Consultant* World::find_consultant(const std::string& id) const {
  for (const auto& c : consultants_) {
    if (c->id() == id) return c.get();
  }
  return nullptr;
}

Consultant& World::owner_of(const EntityRef& entity) {
  Consultant* c = find_consultant(entity.consultant_id);
  if (!c || !c->owns(entity)) throw Error("unknown entity " + entity.str());
  return *c;
}

const Consultant& World::owner_of(const EntityRef& entity) const {
  const Consultant* c = find_consultant(entity.consultant_id);
  if (!c || !c->owns(entity)) throw Error("unknown entity " + entity.str());
  return *c;
}

Consultant& World::consultant_for(const EntityRef& subject, const Formula& formula) {
  Consultant& owner = owner_of(subject);
  if (owner.advertises(formula.predicate, formula.arity())) return owner;
  for (auto& c : consultants_) {
    if (c->advertises(formula.predicate, formula.arity())) return *c;
  }
  throw Error("no consultant advertises " + formula.predicate + "/" +
              std::to_string(formula.arity()));
}

const Consultant& World::consultant_for(const EntityRef& subject,
                                        const Formula& formula) const {
  return const_cast<World*>(this)->consultant_for(subject, formula);
}

Consultant& World::sole_advertiser(const std::string& predicate, std::size_t arity) {
  Consultant* found = nullptr;
  for (auto& c : consultants_) {
    if (!c->advertises(predicate, arity)) continue;
    if (found)
      throw Error("predicate " + predicate + "/" + std::to_string(arity) +
                  " is advertised by both '" + found->id() + "' and '" + c->id() + "'");
    found = c.get();
  }
  if (!found)
    throw Error("predicate " + predicate + "/" + std::to_string(arity) +
                " is advertised by no consultant");
  return *found;
}

std::vector<EntityRef> World::all_entities() const {
  std::vector<EntityRef> all;
  for (const auto& c : consultants_) {
    const auto& domain = c->domain();
    all.insert(all.end(), domain.begin(), domain.end());
  }
  return all;
}

const std::string& World::type_of(const EntityRef& entity) const {
  return owner_of(entity).entity_type(entity);
}

std::map<std::string, CounterSnapshot> World::counters_snapshot() const {
  std::map<std::string, CounterSnapshot> out;
  for (const auto& c : consultants_) out[c->id()] = c->counters().snapshot();
  return out;
}

void World::set_apply_observer(ApplyObserver observer) {
  observer_ = std::move(observer);
  for (auto& c : consultants_) c->set_apply_observer(&observer_);
}

std::map<std::string, CounterSnapshot> snapshot_delta(
    const std::map<std::string, CounterSnapshot>& before,
    const std::map<std::string, CounterSnapshot>& after) {
  std::map<std::string, CounterSnapshot> delta;
  for (const auto& [id, counters] : after) {
    auto it = before.find(id);
    delta[id] = it == before.end() ? counters : counters - it->second;
  }
  return delta;
}

}  // namespace stmreg
