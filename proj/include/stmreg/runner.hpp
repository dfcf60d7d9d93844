#pragma once

#include "stmreg/reg.hpp"
#include "stmreg/resolver.hpp"
#include "stmreg/scenario.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stmreg {

enum class RunMode { sd_pia, dist_pia, compare };

const char* to_string(RunMode mode);
std::optional<RunMode> parse_run_mode(const std::string& token);  // "sd-pia" ...

struct DescribeRecord {
  EntityRef target;
  Description description;
  std::map<EntityRef, std::vector<EntityRef>> unresolved;
  std::map<std::string, CounterSnapshot> deltas;
  std::uint64_t stm_stage_calls = 0;
  std::uint64_t stm_fetches = 0;
  std::uint64_t ltm_total = 0;
};

struct CommandRecord {
  std::size_t index = 0;  // 1-based position in the script
  int line = 0;
  std::string text;
  bool executed = true;  // leg-filtered assertions are recorded but skipped
  std::optional<ResolutionResult> resolution;
  std::vector<DescribeRecord> describes;
  std::map<std::string, CounterSnapshot> deltas;
  std::map<std::string, CounterSnapshot> cumulative;
  std::vector<std::string> notes;
};

struct LegReport {
  std::string algorithm;  // "sd_pia" or "dist_pia"
  std::vector<CommandRecord> commands;
  std::map<std::string, CounterSnapshot> totals;
  // LTM queries spent inside describe invocations, the comparison currency.
  std::uint64_t describe_ltm = 0;
  std::uint64_t stm_stage_calls = 0;
  std::uint64_t stm_fetches = 0;
  // Final sub-description per entity, for cross-leg comparison.
  std::map<EntityRef, SubDescription> final_descriptions;
  bool failed = false;
  std::string failure;
};

struct ComparisonBlock {
  std::uint64_t sd_describe_ltm = 0;
  std::uint64_t dist_describe_ltm = 0;
  std::uint64_t sd_stm_stage_calls = 0;
  std::uint64_t sd_stm_fetches = 0;

  struct Divergence {
    EntityRef entity;
    std::string sd_text;
    std::string dist_text;
  };
  std::vector<Divergence> divergences;

  bool descriptions_agree() const { return divergences.empty(); }
};

struct RunReport {
  std::string scenario;
  RunMode mode = RunMode::sd_pia;
  std::uint64_t seed = 0;
  double tau_dph = 0.5;
  double tau_resolve = 0.5;
  std::vector<LegReport> legs;  // one, or sd then dist in compare mode
  std::optional<ComparisonBlock> comparison;

  bool ok() const;
};

// Executes the scenario script. Compare mode runs both algorithms from
// freshly built worlds and adds the comparison block. The seed only pins the
// report for reproducibility; execution is deterministic regardless.
RunReport run_scenario(const Scenario& scenario, RunMode mode, std::uint64_t seed = 0);

std::string render_text(const RunReport& report);
std::string render_json(const RunReport& report);  // pretty-printed

}  // namespace stmreg
