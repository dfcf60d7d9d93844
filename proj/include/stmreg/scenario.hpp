#pragma once

#include "stmreg/consultant.hpp"
#include "stmreg/core.hpp"
#include "stmreg/resolver.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace stmreg {

// Load-time failure; the message carries "<scenario>:<line>:" context.
struct ScenarioError : Error {
  using Error::Error;
};

struct CatalogDecl {
  Formula formula;
  std::optional<std::string> category;
  std::optional<Tick> ttl;  // per-predicate decay override
  int line = 0;
};

struct EntityDecl {
  std::uint32_t index = 0;
  std::string type;  // empty -> consultant default
  int line = 0;
};

struct ConsultantDecl {
  std::string id;
  std::string default_type;  // empty -> consultant id
  std::optional<BufferConfig> buffer;
  std::vector<EntityDecl> entities;
  std::vector<CatalogDecl> catalog;
  int line = 0;
};

struct FactDecl {
  BoundProperty prop;
  double probability = 0.0;
  int line = 0;
};

// Assertion commands can be pinned to one comparison leg.
enum class LegFilter { any, sd_pia, dist_pia };

struct ScriptCommand {
  enum class Kind {
    resolve,
    describe,
    describe_ambiguous,
    tick,
    impose,
    assert_stm,
    assert_description,
    assert_ltm_queries,
  };

  Kind kind = Kind::resolve;
  int line = 0;
  std::string text;  // canonical rendering for reports
  LegFilter leg = LegFilter::any;

  ResolutionQuery query;             // resolve / describe_ambiguous
  EntityRef entity;                  // describe / assert_stm / assert_description
  Tick ticks = 0;                    // tick
  FactDecl fact;                     // impose
  std::vector<BoundProperty> props;  // assert_stm / assert_description
  std::string comparison;            // assert_ltm_queries: == != < <= > >=
  std::uint64_t count = 0;           // assert_ltm_queries
};

struct Scenario {
  std::string name;
  std::vector<std::string> types;
  std::vector<ConsultantDecl> consultants;
  std::vector<FactDecl> facts;
  double tau_dph = 0.5;
  std::optional<double> tau_resolve;
  std::optional<BufferConfig> default_buffer;
  std::vector<ScriptCommand> script;

  double resolve_tau() const { return tau_resolve.value_or(tau_dph); }
  BufferConfig buffer_for(const ConsultantDecl& consultant) const;
  std::size_t entity_count() const;

  // Canonical entity lookup by "consultantid_index" text.
  std::optional<EntityRef> find_entity(const std::string& canonical) const;
};

// Parses and fully validates; throws ScenarioError with line context.
Scenario parse_scenario(const std::string& text, const std::string& name);
Scenario load_scenario(const std::filesystem::path& path);

// Instantiates consultants, fact tables, categories, ttl overrides and
// buffers from a validated scenario.
std::unique_ptr<World> build_world(const Scenario& scenario);

}  // namespace stmreg
