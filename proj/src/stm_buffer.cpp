#include "stmreg/stm_buffer.hpp"

#include <algorithm>

namespace stmreg {

const char* to_string(BufferPolicy policy) {
  switch (policy) {
    case BufferPolicy::capacity_fifo: return "capacity_fifo";
    case BufferPolicy::capacity_lru: return "capacity_lru";
    case BufferPolicy::decay: return "decay";
    case BufferPolicy::interference: return "interference";
  }
  return "?";
}

const char* to_string(BufferScope scope) {
  return scope == BufferScope::per_entity ? "per_entity" : "per_consultant_global";
}

std::optional<BufferPolicy> parse_buffer_policy(const std::string& token) {
  if (token == "capacity_fifo") return BufferPolicy::capacity_fifo;
  if (token == "capacity_lru") return BufferPolicy::capacity_lru;
  if (token == "decay") return BufferPolicy::decay;
  if (token == "interference") return BufferPolicy::interference;
  return std::nullopt;
}

std::optional<BufferScope> parse_buffer_scope(const std::string& token) {
  if (token == "per_entity") return BufferScope::per_entity;
  if (token == "per_consultant_global") return BufferScope::per_consultant_global;
  return std::nullopt;
}

const std::string* PredicateCategories::category_of(const std::string& predicate) const {
  auto it = by_predicate.find(predicate);
  return it == by_predicate.end() ? nullptr : &it->second;
}

int similarity(const BoundProperty& a, const BoundProperty& b,
               const PredicateCategories& categories) {
  if (a.formula.predicate == b.formula.predicate) return 3;
  const std::string* ca = categories.category_of(a.formula.predicate);
  const std::string* cb = categories.category_of(b.formula.predicate);
  if (ca && cb && *ca == *cb) return 2;
  if (a.formula.arity() == b.formula.arity()) return 1;
  return 0;
}

StmStore::StmStore(BufferConfig config, const PredicateCategories* categories,
                   const std::map<std::string, Tick>* ttl_overrides)
    : config_(config), categories_(categories), ttl_overrides_(ttl_overrides) {
  if (config_.policy != BufferPolicy::decay && config_.capacity == 0)
    throw Error("buffer capacity must be positive");
}

Tick StmStore::ttl_for(const BoundProperty& prop) const {
  if (ttl_overrides_) {
    auto it = ttl_overrides_->find(prop.formula.predicate);
    if (it != ttl_overrides_->end()) return it->second;
  }
  return config_.ttl_ticks;
}

bool StmStore::expired(const BufferEntry& entry, Tick now) const {
  return config_.policy == BufferPolicy::decay &&
         now - entry.last_refreshed > ttl_for(entry.prop);
}

void StmStore::purge_expired(Tick now) {
  if (config_.policy != BufferPolicy::decay) return;
  for (auto& [entity, entries] : buffers_) {
    std::erase_if(entries, [&](const BufferEntry& e) { return expired(e, now); });
  }
}

void StmStore::insert(const EntityRef& entity, const BoundProperty& prop, Tick now) {
  // An expired entry must not be refreshable, so drop dead entries first.
  purge_expired(now);

  auto& entries = buffers_[entity];
  auto existing = std::find_if(entries.begin(), entries.end(),
                               [&](const BufferEntry& e) { return e.prop == prop; });
  if (existing != entries.end()) {
    existing->last_refreshed = now;
    existing->refresh_seq = next_seq_++;
    return;
  }

  if (config_.policy != BufferPolicy::decay) {
    if (config_.scope == BufferScope::per_entity) {
      while (entries.size() >= config_.capacity) evict_one(entity, prop);
    } else {
      while (live_total(now) >= config_.capacity) evict_one(entity, prop);
    }
  }

  std::uint64_t seq = next_seq_++;
  buffers_[entity].push_back(BufferEntry{prop, now, now, seq, seq});
}

void StmStore::evict_one(const EntityRef& entity, const BoundProperty& incoming) {
  // Candidate set depends on scope: just this entity's buffer, or every
  // buffer the consultant maintains.
  std::vector<std::pair<EntityRef, std::size_t>> candidates;
  if (config_.scope == BufferScope::per_entity) {
    const auto& entries = buffers_[entity];
    for (std::size_t i = 0; i < entries.size(); ++i) candidates.emplace_back(entity, i);
  } else {
    for (const auto& [ref, entries] : buffers_) {
      for (std::size_t i = 0; i < entries.size(); ++i) candidates.emplace_back(ref, i);
    }
  }
  if (candidates.empty()) return;

  auto entry_at = [&](const std::pair<EntityRef, std::size_t>& c) -> const BufferEntry& {
    return buffers_[c.first][c.second];
  };

  auto victim = candidates.front();
  switch (config_.policy) {
    case BufferPolicy::capacity_fifo:
      for (const auto& c : candidates) {
        if (entry_at(c).insert_seq < entry_at(victim).insert_seq) victim = c;
      }
      break;
    case BufferPolicy::capacity_lru:
      for (const auto& c : candidates) {
        if (entry_at(c).refresh_seq < entry_at(victim).refresh_seq) victim = c;
      }
      break;
    case BufferPolicy::interference: {
      static const PredicateCategories no_categories{};
      const PredicateCategories& cats = categories_ ? *categories_ : no_categories;
      auto score = [&](const BufferEntry& e) { return similarity(e.prop, incoming, cats); };
      for (const auto& c : candidates) {
        int sc = score(entry_at(c));
        int sv = score(entry_at(victim));
        // Most similar goes; ties fall to the oldest insertion.
        if (sc > sv || (sc == sv && entry_at(c).insert_seq < entry_at(victim).insert_seq))
          victim = c;
      }
      break;
    }
    case BufferPolicy::decay:
      return;  // unbounded
  }

  auto& entries = buffers_[victim.first];
  entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(victim.second));
}

std::vector<BoundProperty> StmStore::query(const EntityRef& entity, Tick now) const {
  auto it = buffers_.find(entity);
  if (it == buffers_.end()) return {};
  std::vector<const BufferEntry*> live;
  for (const BufferEntry& e : it->second) {
    if (!expired(e, now)) live.push_back(&e);
  }
  std::sort(live.begin(), live.end(), [](const BufferEntry* a, const BufferEntry* b) {
    return a->refresh_seq > b->refresh_seq;
  });
  std::vector<BoundProperty> out;
  out.reserve(live.size());
  for (const BufferEntry* e : live) out.push_back(e->prop);
  return out;
}

bool StmStore::contains(const EntityRef& entity, const BoundProperty& prop, Tick now) const {
  auto it = buffers_.find(entity);
  if (it == buffers_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(), [&](const BufferEntry& e) {
    return !expired(e, now) && e.prop == prop;
  });
}

std::size_t StmStore::live_size(const EntityRef& entity, Tick now) const {
  auto it = buffers_.find(entity);
  if (it == buffers_.end()) return 0;
  return static_cast<std::size_t>(
      std::count_if(it->second.begin(), it->second.end(),
                    [&](const BufferEntry& e) { return !expired(e, now); }));
}

std::size_t StmStore::live_total(Tick now) const {
  std::size_t total = 0;
  for (const auto& [entity, entries] : buffers_) {
    total += static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(),
                      [&](const BufferEntry& e) { return !expired(e, now); }));
  }
  return total;
}

}  // namespace stmreg
