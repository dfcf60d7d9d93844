#include "stmreg/runner.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace stmreg {

namespace {

std::string fmt_double(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

std::string entity_list(const std::vector<EntityRef>& entities) {
  if (entities.empty()) return "none";
  std::ostringstream out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (i > 0) out << ", ";
    out << entities[i].str();
  }
  return out.str();
}

// Order-insensitive canonical form used for assertions and leg comparison.
std::string canonical_set(const SubDescription& props) {
  std::vector<std::string> texts;
  texts.reserve(props.size());
  for (const BoundProperty& p : props) texts.push_back(p.str());
  std::sort(texts.begin(), texts.end());
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i > 0) out << ", ";
    out << texts[i];
  }
  out << '}';
  return out.str();
}

std::string counters_line(const std::map<std::string, CounterSnapshot>& counters,
                          bool as_delta) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [id, c] : counters) {
    if (!first) out << "; ";
    first = false;
    const char* sep = as_delta ? "+" : "=";
    out << id << " ltm" << sep << c.ltm_queries << " hit" << sep << c.stm_hits << " miss"
        << sep << c.stm_misses;
  }
  if (first) out << "none";
  return out.str();
}

std::uint64_t total_ltm(const std::map<std::string, CounterSnapshot>& counters) {
  std::uint64_t total = 0;
  for (const auto& [id, c] : counters) total += c.ltm_queries;
  return total;
}

struct AssertionFailure {
  std::string diff;
};

class LegRunner {
 public:
  LegRunner(const Scenario& scenario, bool stm_on) : scenario_(scenario) {
    leg_.algorithm = stm_on ? "sd_pia" : "dist_pia";
    world_ = build_world(scenario);
    config_.tau_dph = scenario.tau_dph;
    config_.stm_enabled = stm_on;
    config_.populate_stm = stm_on;
  }

  LegReport run() {
    std::size_t index = 0;
    for (const ScriptCommand& cmd : scenario_.script) {
      CommandRecord record;
      record.index = ++index;
      record.line = cmd.line;
      record.text = cmd.text;
      const auto before = world_->counters_snapshot();

      if (!applies_to_leg(cmd)) {
        record.executed = false;
        record.notes.push_back("skipped: pinned to the other leg");
      } else {
        try {
          execute(cmd, record);
        } catch (const AssertionFailure& failure) {
          record.notes.push_back("ASSERTION FAILED: " + failure.diff);
          leg_.failed = true;
          leg_.failure = "command " + std::to_string(record.index) + " (line " +
                         std::to_string(record.line) + "): " + failure.diff;
        } catch (const Error& error) {
          record.notes.push_back(std::string("ERROR: ") + error.what());
          leg_.failed = true;
          leg_.failure = "command " + std::to_string(record.index) + " (line " +
                         std::to_string(record.line) + "): " + error.what();
        }
      }

      record.deltas = snapshot_delta(before, world_->counters_snapshot());
      record.cumulative = world_->counters_snapshot();
      leg_.commands.push_back(std::move(record));
      if (leg_.failed) break;  // assertion failures abort the leg
    }
    leg_.totals = world_->counters_snapshot();
    return std::move(leg_);
  }

 private:
  bool applies_to_leg(const ScriptCommand& cmd) const {
    if (cmd.leg == LegFilter::any) return true;
    return (cmd.leg == LegFilter::sd_pia) == (leg_.algorithm == "sd_pia");
  }

  void execute(const ScriptCommand& cmd, CommandRecord& record) {
    switch (cmd.kind) {
      case ScriptCommand::Kind::resolve:
        record.resolution = resolve(*world_, cmd.query, scenario_.resolve_tau());
        break;
      case ScriptCommand::Kind::describe:
        record.describes.push_back(describe(cmd.entity));
        break;
      case ScriptCommand::Kind::describe_ambiguous: {
        record.resolution = resolve(*world_, cmd.query, scenario_.resolve_tau());
        for (const EntityRef& candidate : record.resolution->candidates)
          record.describes.push_back(describe(candidate));
        break;
      }
      case ScriptCommand::Kind::tick:
        world_->advance(cmd.ticks);
        record.notes.push_back("now=" + std::to_string(world_->now()));
        break;
      case ScriptCommand::Kind::impose: {
        Consultant& advertiser = world_->sole_advertiser(cmd.fact.prop.formula.predicate,
                                                         cmd.fact.prop.formula.arity());
        advertiser.impose(cmd.fact.prop.formula, cmd.fact.prop.bindings,
                          cmd.fact.probability);
        record.notes.push_back("imposed on " + advertiser.id());
        break;
      }
      case ScriptCommand::Kind::assert_stm: {
        SubDescription contents =
            world_->owner_of(cmd.entity).stm_contents(cmd.entity, world_->now());
        check_property_set("stm of " + cmd.entity.str(), cmd.props, contents, record);
        break;
      }
      case ScriptCommand::Kind::assert_description: {
        auto it = last_descriptions_.find(cmd.entity);
        if (it == last_descriptions_.end())
          throw AssertionFailure{cmd.entity.str() + " has not been described"};
        check_property_set("description of " + cmd.entity.str(), cmd.props, it->second,
                           record);
        break;
      }
      case ScriptCommand::Kind::assert_ltm_queries: {
        std::uint64_t actual = total_ltm(world_->counters_snapshot());
        bool pass = cmd.comparison == "==" ? actual == cmd.count
                    : cmd.comparison == "!=" ? actual != cmd.count
                    : cmd.comparison == "<"  ? actual < cmd.count
                    : cmd.comparison == "<=" ? actual <= cmd.count
                    : cmd.comparison == ">"  ? actual > cmd.count
                                             : actual >= cmd.count;
        if (!pass)
          throw AssertionFailure{"ltm_queries " + std::to_string(actual) + " violates " +
                                 cmd.comparison + " " + std::to_string(cmd.count)};
        record.notes.push_back("assert ok: ltm_queries=" + std::to_string(actual) + " " +
                               cmd.comparison + " " + std::to_string(cmd.count));
        break;
      }
    }
  }

  void check_property_set(const std::string& what, const std::vector<BoundProperty>& expected,
                          const SubDescription& actual, CommandRecord& record) const {
    std::string want = canonical_set(expected);
    std::string got = canonical_set(actual);
    if (want != got)
      throw AssertionFailure{what + ": expected " + want + " got " + got};
    record.notes.push_back("assert ok: " + what + " = " + got);
  }

  DescribeRecord describe(const EntityRef& target) {
    RegResult result = config_.stm_enabled ? sd_pia(*world_, target, config_)
                                           : dist_pia(*world_, target, config_);
    DescribeRecord record;
    record.target = target;
    record.unresolved = result.unresolved;
    record.deltas = result.counter_deltas;
    record.stm_stage_calls = result.stm_stage_calls;
    record.stm_fetches = result.stm_fetches;
    record.ltm_total = total_ltm(result.counter_deltas);

    for (const auto& [entity, sub] : result.description.entries) {
      last_descriptions_[entity] = sub;
      leg_.final_descriptions[entity] = sub;
    }
    leg_.describe_ltm += record.ltm_total;
    leg_.stm_stage_calls += record.stm_stage_calls;
    leg_.stm_fetches += record.stm_fetches;
    record.description = std::move(result.description);
    return record;
  }

  const Scenario& scenario_;
  std::unique_ptr<World> world_;
  RegConfig config_;
  LegReport leg_;
  std::map<EntityRef, SubDescription> last_descriptions_;
};

}  // namespace

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::sd_pia: return "sd_pia";
    case RunMode::dist_pia: return "dist_pia";
    case RunMode::compare: return "compare";
  }
  return "?";
}

std::optional<RunMode> parse_run_mode(const std::string& token) {
  if (token == "sd-pia" || token == "sd_pia") return RunMode::sd_pia;
  if (token == "dist-pia" || token == "dist_pia") return RunMode::dist_pia;
  if (token == "compare") return RunMode::compare;
  return std::nullopt;
}

bool RunReport::ok() const {
  return std::none_of(legs.begin(), legs.end(),
                      [](const LegReport& leg) { return leg.failed; });
}

RunReport run_scenario(const Scenario& scenario, RunMode mode, std::uint64_t seed) {
  RunReport report;
  report.scenario = scenario.name;
  report.mode = mode;
  report.seed = seed;
  report.tau_dph = scenario.tau_dph;
  report.tau_resolve = scenario.resolve_tau();

  if (mode == RunMode::sd_pia || mode == RunMode::compare)
    report.legs.push_back(LegRunner(scenario, true).run());
  if (mode == RunMode::dist_pia || mode == RunMode::compare)
    report.legs.push_back(LegRunner(scenario, false).run());

  if (mode == RunMode::compare) {
    const LegReport& sd = report.legs[0];
    const LegReport& dist = report.legs[1];
    ComparisonBlock block;
    block.sd_describe_ltm = sd.describe_ltm;
    block.dist_describe_ltm = dist.describe_ltm;
    block.sd_stm_stage_calls = sd.stm_stage_calls;
    block.sd_stm_fetches = sd.stm_fetches;

    std::set<EntityRef> described;
    for (const auto& [entity, sub] : sd.final_descriptions) described.insert(entity);
    for (const auto& [entity, sub] : dist.final_descriptions) described.insert(entity);
    for (const EntityRef& entity : described) {
      auto in_sd = sd.final_descriptions.find(entity);
      auto in_dist = dist.final_descriptions.find(entity);
      std::string sd_text =
          in_sd == sd.final_descriptions.end() ? "(not described)" : canonical_set(in_sd->second);
      std::string dist_text = in_dist == dist.final_descriptions.end()
                                  ? "(not described)"
                                  : canonical_set(in_dist->second);
      if (sd_text != dist_text)
        block.divergences.push_back({entity, sd_text, dist_text});
    }
    report.comparison = std::move(block);
  }
  return report;
}

namespace {

void render_describe(std::ostream& out, const DescribeRecord& record) {
  out << "    describe " << record.target.str() << ":\n";
  for (const auto& [entity, sub] : record.description.entries) {
    out << "      " << entity.str() << ": " << to_string(sub);
    auto it = record.unresolved.find(entity);
    out << " | unresolved: "
        << (it == record.unresolved.end() ? "none" : entity_list(it->second)) << "\n";
  }
  out << "      stm stage: calls=" << record.stm_stage_calls
      << " fetches=" << record.stm_fetches << "\n";
  out << "      queries: " << counters_line(record.deltas, true) << "\n";
}

void render_leg(std::ostream& out, const LegReport& leg) {
  out << "=== leg " << leg.algorithm << " ===\n\n";
  for (const CommandRecord& cmd : leg.commands) {
    out << "[" << cmd.index << "] (line " << cmd.line << ") " << cmd.text << "\n";
    if (cmd.resolution) {
      out << "    candidates: " << entity_list(cmd.resolution->candidates) << "\n";
      out << "    ambiguous: " << (cmd.resolution->ambiguous ? "yes" : "no") << "\n";
    }
    for (const DescribeRecord& d : cmd.describes) render_describe(out, d);
    for (const std::string& note : cmd.notes) out << "    " << note << "\n";
    out << "    queries: " << counters_line(cmd.deltas, true) << " | cum "
        << counters_line(cmd.cumulative, false) << "\n";
  }
  out << "\nleg totals: describe_ltm=" << leg.describe_ltm
      << " stm_stage_calls=" << leg.stm_stage_calls << " stm_fetches=" << leg.stm_fetches
      << "\n";
  out << "counters: " << counters_line(leg.totals, false) << "\n";
  out << "status: " << (leg.failed ? "FAILED: " + leg.failure : "ok") << "\n\n";
}

}  // namespace

std::string render_text(const RunReport& report) {
  std::ostringstream out;
  out << "scenario: " << report.scenario << "\n";
  out << "mode: " << to_string(report.mode) << "\n";
  out << "seed: " << report.seed << "\n";
  out << "tau_dph: " << fmt_double(report.tau_dph) << "\n";
  out << "tau_resolve: " << fmt_double(report.tau_resolve) << "\n";
  out << "note: query counts are measurements of this artifact, not published figures\n";
  out << "\n";
  for (const LegReport& leg : report.legs) render_leg(out, leg);

  if (report.comparison) {
    const ComparisonBlock& c = *report.comparison;
    out << "=== comparison ===\n";
    out << "describe ltm_queries: sd_pia=" << c.sd_describe_ltm
        << " dist_pia=" << c.dist_describe_ltm;
    if (c.dist_describe_ltm >= c.sd_describe_ltm)
      out << " saved=" << c.dist_describe_ltm - c.sd_describe_ltm;
    else
      out << " overhead=" << c.sd_describe_ltm - c.dist_describe_ltm;
    out << "\n";
    out << "sd stm stage: calls=" << c.sd_stm_stage_calls << " fetches=" << c.sd_stm_fetches
        << "\n";
    if (c.divergences.empty()) {
      out << "descriptions: agree\n";
    } else {
      out << "descriptions: DIVERGE\n";
      for (const auto& d : c.divergences) {
        out << "  " << d.entity.str() << ": sd_pia=" << d.sd_text
            << " dist_pia=" << d.dist_text << "\n";
      }
    }
    out << "\n";
  }
  out << "result: " << (report.ok() ? "ok" : "FAILED") << "\n";
  return out.str();
}

namespace {

using nlohmann::json;

json counters_json(const std::map<std::string, CounterSnapshot>& counters) {
  json out = json::object();
  for (const auto& [id, c] : counters) {
    out[id] = {{"ltm_queries", c.ltm_queries},
               {"stm_hits", c.stm_hits},
               {"stm_misses", c.stm_misses}};
  }
  return out;
}

json describe_json(const DescribeRecord& record) {
  json desc = json::object();
  for (const auto& [entity, sub] : record.description.entries) {
    json props = json::array();
    for (const BoundProperty& p : sub) props.push_back(p.str());
    desc[entity.str()] = props;
  }
  json unresolved = json::object();
  for (const auto& [entity, survivors] : record.unresolved) {
    json list = json::array();
    for (const EntityRef& e : survivors) list.push_back(e.str());
    unresolved[entity.str()] = list;
  }
  return {{"target", record.target.str()},
          {"description", desc},
          {"unresolved", unresolved},
          {"stm_stage_calls", record.stm_stage_calls},
          {"stm_fetches", record.stm_fetches},
          {"ltm_total", record.ltm_total},
          {"queries", counters_json(record.deltas)}};
}

}  // namespace

std::string render_json(const RunReport& report) {
  json root;
  root["scenario"] = report.scenario;
  root["mode"] = to_string(report.mode);
  root["seed"] = report.seed;
  root["tau_dph"] = report.tau_dph;
  root["tau_resolve"] = report.tau_resolve;
  root["note"] = "query counts are measurements of this artifact, not published figures";

  json legs = json::array();
  for (const LegReport& leg : report.legs) {
    json commands = json::array();
    for (const CommandRecord& cmd : leg.commands) {
      json c;
      c["index"] = cmd.index;
      c["line"] = cmd.line;
      c["text"] = cmd.text;
      c["executed"] = cmd.executed;
      if (cmd.resolution) {
        json candidates = json::array();
        for (const EntityRef& e : cmd.resolution->candidates) candidates.push_back(e.str());
        c["resolution"] = {{"candidates", candidates},
                           {"ambiguous", cmd.resolution->ambiguous}};
      }
      if (!cmd.describes.empty()) {
        json describes = json::array();
        for (const DescribeRecord& d : cmd.describes) describes.push_back(describe_json(d));
        c["describes"] = describes;
      }
      if (!cmd.notes.empty()) c["notes"] = cmd.notes;
      c["queries"] = counters_json(cmd.deltas);
      c["cumulative"] = counters_json(cmd.cumulative);
      commands.push_back(std::move(c));
    }
    legs.push_back({{"algorithm", leg.algorithm},
                    {"commands", commands},
                    {"totals", counters_json(leg.totals)},
                    {"describe_ltm", leg.describe_ltm},
                    {"stm_stage_calls", leg.stm_stage_calls},
                    {"stm_fetches", leg.stm_fetches},
                    {"failed", leg.failed},
                    {"failure", leg.failure}});
  }
  root["legs"] = legs;

  if (report.comparison) {
    const ComparisonBlock& c = *report.comparison;
    json divergences = json::array();
    for (const auto& d : c.divergences) {
      divergences.push_back(
          {{"entity", d.entity.str()}, {"sd_pia", d.sd_text}, {"dist_pia", d.dist_text}});
    }
    root["comparison"] = {{"sd_describe_ltm", c.sd_describe_ltm},
                          {"dist_describe_ltm", c.dist_describe_ltm},
                          {"sd_stm_stage_calls", c.sd_stm_stage_calls},
                          {"sd_stm_fetches", c.sd_stm_fetches},
                          {"descriptions_agree", c.descriptions_agree()},
                          {"divergences", divergences}};
  }
  root["ok"] = report.ok();
  return root.dump(2) + "\n";
}

}  // namespace stmreg
