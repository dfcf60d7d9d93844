#pragma once

#include "stmreg/core.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stmreg {

enum class BufferPolicy { capacity_fifo, capacity_lru, decay, interference };
enum class BufferScope { per_entity, per_consultant_global };

const char* to_string(BufferPolicy policy);
const char* to_string(BufferScope scope);
std::optional<BufferPolicy> parse_buffer_policy(const std::string& token);
std::optional<BufferScope> parse_buffer_scope(const std::string& token);

struct BufferConfig {
  BufferPolicy policy = BufferPolicy::capacity_fifo;
  std::size_t capacity = 7;  // capacity_fifo / capacity_lru / interference
  Tick ttl_ticks = 0;        // decay
  BufferScope scope = BufferScope::per_entity;
};

// Predicate -> category tag, declared per scenario. Drives the interference
// policy's similarity scoring.
struct PredicateCategories {
  std::map<std::string, std::string> by_predicate;

  const std::string* category_of(const std::string& predicate) const;
};

// Ordinal similarity: 3 same predicate, 2 same declared category, 1 same
// arity, 0 otherwise.
int similarity(const BoundProperty& a, const BoundProperty& b,
               const PredicateCategories& categories);

struct BufferEntry {
  BoundProperty prop;
  Tick inserted_at = 0;
  Tick last_refreshed = 0;
  // Sequence numbers disambiguate entries that share a tick.
  std::uint64_t insert_seq = 0;
  std::uint64_t refresh_seq = 0;
};

// All STM buffers of one consultant. per_entity scope bounds each entity's
// buffer independently; per_consultant_global bounds the sum of all of them.
class StmStore {
 public:
  StmStore() = default;
  StmStore(BufferConfig config, const PredicateCategories* categories,
           const std::map<std::string, Tick>* ttl_overrides);

  // Inserts or refreshes. A property already present is refreshed in place,
  // never duplicated. Capacity policies evict before inserting when full.
  void insert(const EntityRef& entity, const BoundProperty& prop, Tick now);

  // Live contents, most recently refreshed first. Under the decay policy
  // entries older than their ttl are gone.
  std::vector<BoundProperty> query(const EntityRef& entity, Tick now) const;

  bool contains(const EntityRef& entity, const BoundProperty& prop, Tick now) const;

  std::size_t live_size(const EntityRef& entity, Tick now) const;
  std::size_t live_total(Tick now) const;

  const BufferConfig& config() const { return config_; }

 private:
  Tick ttl_for(const BoundProperty& prop) const;
  bool expired(const BufferEntry& entry, Tick now) const;
  void purge_expired(Tick now);
  void evict_one(const EntityRef& entity, const BoundProperty& incoming);

  BufferConfig config_{};
  const PredicateCategories* categories_ = nullptr;
  const std::map<std::string, Tick>* ttl_overrides_ = nullptr;
  std::map<EntityRef, std::vector<BufferEntry>> buffers_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace stmreg
