#pragma once

#include "stmreg/core.hpp"
#include "stmreg/stm_buffer.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace stmreg {

struct CounterSnapshot {
  std::uint64_t ltm_queries = 0;
  std::uint64_t stm_hits = 0;
  std::uint64_t stm_misses = 0;

  bool operator==(const CounterSnapshot&) const = default;
  CounterSnapshot operator-(const CounterSnapshot& other) const {
    return {ltm_queries - other.ltm_queries, stm_hits - other.stm_hits,
            stm_misses - other.stm_misses};
  }
};

// Monotone per-consultant instrumentation. apply() is the only operation that
// advances ltm_queries; stm_misses counts buffer lookups that fell through to
// an LTM query.
class QueryCounter {
 public:
  void count_ltm_query() { ltm_queries_.fetch_add(1, std::memory_order_relaxed); }
  void count_stm_hit() { stm_hits_.fetch_add(1, std::memory_order_relaxed); }
  void count_stm_miss() { stm_misses_.fetch_add(1, std::memory_order_relaxed); }

  CounterSnapshot snapshot() const {
    return {ltm_queries_.load(std::memory_order_relaxed),
            stm_hits_.load(std::memory_order_relaxed),
            stm_misses_.load(std::memory_order_relaxed)};
  }

 private:
  std::atomic<std::uint64_t> ltm_queries_{0};
  std::atomic<std::uint64_t> stm_hits_{0};
  std::atomic<std::uint64_t> stm_misses_{0};
};

// Invoked on every LTM assessment; test instrumentation.
using ApplyObserver =
    std::function<void(const std::string& consultant_id, const BoundProperty& prop, double p)>;

// Facade over one knowledge source: an entity domain, a preference-ordered
// constraint catalog, probabilistic assessment against a fact table, and the
// per-entity STM buffers. Reads may run concurrently; mutations are
// serialized per consultant.
class Consultant {
 public:
  Consultant(std::string id, std::string default_type, BufferConfig buffer_config,
             const PredicateCategories* categories,
             const std::map<std::string, Tick>* ttl_overrides);

  const std::string& id() const { return id_; }
  const std::string& default_type() const { return default_type_; }
  const BufferConfig& buffer_config() const { return stm_.config(); }

  // Construction-time wiring; not part of the query surface.
  void add_entity(std::uint32_t local_index, std::string type);
  void add_constraint(Formula formula);

  const std::vector<EntityRef>& domain() const { return domain_; }
  const std::vector<Formula>& constraints() const { return catalog_; }
  const Formula* find_constraint(const std::string& predicate, std::size_t arity) const;
  bool advertises(const std::string& predicate, std::size_t arity) const;
  bool owns(const EntityRef& entity) const;
  const std::string& entity_type(const EntityRef& entity) const;

  // Probabilistic assessment of an advertised constraint; absent facts read
  // as 0.0. Counts exactly one ltm_query. Errors on a predicate this
  // consultant does not advertise or on non-ground bindings: both signal an
  // algorithm bug upstream.
  double apply(const Formula& formula, const Bindings& bindings);

  // Same lookup without counters or observer. For oracles and report checks
  // that must not perturb measurements.
  double peek(const Formula& formula, const Bindings& bindings) const;

  // Writes the fact table; probability 0.0 removes the fact. STM buffers are
  // deliberately left untouched, which is how stale-cache worlds arise.
  void impose(const Formula& formula, const Bindings& bindings, double probability);

  // Buffer contents for one entity, most recently refreshed first. No
  // counters move: this read is the cheap alternative to LTM queries.
  std::vector<BoundProperty> stm_contents(const EntityRef& entity, Tick now) const;

  void stm_insert(const EntityRef& entity, const BoundProperty& prop, Tick now);
  bool stm_contains(const EntityRef& entity, const BoundProperty& prop, Tick now) const;

  QueryCounter& counters() { return counters_; }
  const QueryCounter& counters() const { return counters_; }

  void set_apply_observer(const ApplyObserver* observer) { observer_ = observer; }

 private:
  struct FactKey {
    std::string predicate;
    std::vector<EntityRef> args;  // positional, variable declaration order
    auto operator<=>(const FactKey&) const = default;
  };

  FactKey key_for(const Formula& formula, const Bindings& bindings) const;
  double lookup(const FactKey& key) const;
  void require_owned(const EntityRef& entity) const;

  std::string id_;
  std::string default_type_;
  std::vector<EntityRef> domain_;
  std::vector<std::string> entity_types_;  // parallel to domain_
  std::vector<Formula> catalog_;
  std::map<FactKey, double> facts_;
  StmStore stm_;
  QueryCounter counters_;
  const ApplyObserver* observer_ = nullptr;
  mutable std::shared_mutex mutex_;
};

// The full set of consultants plus the scenario-scoped vocabulary they share.
// Owns the scripted clock. Not copyable: consultants keep pointers into the
// shared category and ttl tables.
class World {
 public:
  World() = default;
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  Tick now() const { return now_; }
  void advance(Tick ticks) { now_ += ticks; }

  Consultant& add_consultant(std::string id, std::string default_type,
                             BufferConfig buffer_config);

  const std::vector<std::unique_ptr<Consultant>>& consultants() const { return consultants_; }
  Consultant* find_consultant(const std::string& id);
  const Consultant* find_consultant(const std::string& id) const;

  Consultant& owner_of(const EntityRef& entity);
  const Consultant& owner_of(const EntityRef& entity) const;

  // Routes an assessment about `subject` to the consultant able to answer it:
  // the subject's owner when it advertises the predicate, otherwise the
  // first declared advertiser.
  Consultant& consultant_for(const EntityRef& subject, const Formula& formula);
  const Consultant& consultant_for(const EntityRef& subject, const Formula& formula) const;

  // The unique consultant advertising (predicate, arity); errors when none or
  // several do. Fact statements and impositions go through here.
  Consultant& sole_advertiser(const std::string& predicate, std::size_t arity);

  // The world model M: every consultant's domain, declaration order.
  std::vector<EntityRef> all_entities() const;
  const std::string& type_of(const EntityRef& entity) const;

  std::map<std::string, CounterSnapshot> counters_snapshot() const;

  void set_apply_observer(ApplyObserver observer);

  PredicateCategories categories;
  std::map<std::string, Tick> ttl_overrides;
  std::vector<std::string> type_alphabet;

 private:
  Tick now_ = 0;
  std::vector<std::unique_ptr<Consultant>> consultants_;
  ApplyObserver observer_;
};

std::map<std::string, CounterSnapshot> snapshot_delta(
    const std::map<std::string, CounterSnapshot>& before,
    const std::map<std::string, CounterSnapshot>& after);

}  // namespace stmreg
