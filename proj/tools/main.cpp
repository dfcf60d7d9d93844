#include "stmreg/oracle.hpp"
#include "stmreg/runner.hpp"
#include "stmreg/scenario.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

bool valid_tau(double tau) { return tau > 0.0 && tau < 1.0; }

int run_command(const std::string& file, const std::string& mode_token,
                const double* tau_override, std::uint64_t seed, const std::string& format,
                const std::string& out_path) {
  auto mode = stmreg::parse_run_mode(mode_token);
  if (!mode) {
    std::cerr << "unknown mode '" << mode_token << "' (sd-pia, dist-pia, compare)\n";
    return 2;
  }
  stmreg::Scenario scenario = stmreg::load_scenario(file);
  if (tau_override) {
    if (!valid_tau(*tau_override)) {
      std::cerr << "--tau must lie strictly between 0 and 1\n";
      return 2;
    }
    scenario.tau_dph = *tau_override;
  }

  stmreg::RunReport report = stmreg::run_scenario(scenario, *mode, seed);
  std::string rendered =
      format == "json" ? stmreg::render_json(report) : stmreg::render_text(report);

  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 2;
    }
    out << rendered;
  }
  return report.ok() ? 0 : 1;
}

int validate_command(const std::string& file) {
  stmreg::Scenario scenario = stmreg::load_scenario(file);
  std::cout << "ok: " << scenario.name << " (" << scenario.consultants.size()
            << " consultants, " << scenario.entity_count() << " entities, "
            << scenario.facts.size() << " facts, " << scenario.script.size()
            << " script commands)\n";
  return 0;
}

int oracle_command(const std::string& file, const std::string& target_name,
                   const double* tau) {
  stmreg::Scenario scenario = stmreg::load_scenario(file);
  auto target = scenario.find_entity(target_name);
  if (!target) {
    std::cerr << "unknown entity '" << target_name << "'\n";
    return 2;
  }
  if (tau && !valid_tau(*tau)) {
    std::cerr << "--tau must lie strictly between 0 and 1\n";
    return 2;
  }
  auto world = stmreg::build_world(scenario);
  double threshold = tau ? *tau : scenario.tau_dph;
  stmreg::OracleResult result = stmreg::brute_force_oracle(*world, *target, threshold);

  std::cout << "scenario: " << scenario.name << "\n";
  std::cout << "target: " << target->str() << "\n";
  std::cout << "discriminable: " << (result.discriminable ? "yes" : "no") << "\n";
  std::cout << "holding properties:\n";
  if (result.holding_pool.empty()) std::cout << "  (none)\n";
  for (const stmreg::BoundProperty& p : result.holding_pool)
    std::cout << "  " << p.str() << "\n";
  std::cout << "minimal discriminating sets:\n";
  if (result.minimal_sets.empty()) std::cout << "  (none)\n";
  for (const stmreg::SubDescription& set : result.minimal_sets)
    std::cout << "  " << stmreg::to_string(set) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stmreg - short-term-memory augmented referring expression generation"};
  app.require_subcommand(1);

  std::string file;
  std::string mode = "sd-pia";
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string out_path;
  std::string target;

  CLI::App* run = app.add_subcommand("run", "run a scenario script");
  run->add_option("file", file, "scenario file")->required();
  run->add_option("--mode", mode, "sd-pia, dist-pia or compare");
  CLI::Option* run_tau = run->add_option("--tau", tau, "override tau_dph");
  run->add_option("--seed", seed, "seed recorded in the report");
  run->add_option("--report", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  run->add_option("--out", out_path, "write the report to a file");

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("file", file, "scenario file")->required();

  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive discriminating-set search");
  oracle->add_option("file", file, "scenario file")->required();
  oracle->add_option("--target", target, "entity to describe, e.g. objects_1")->required();
  CLI::Option* oracle_tau = oracle->add_option("--tau", tau, "override tau_dph");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(file, mode, run_tau->count() ? &tau : nullptr, seed, format,
                         out_path);
    if (validate->parsed()) return validate_command(file);
    if (oracle->parsed())
      return oracle_command(file, target, oracle_tau->count() ? &tau : nullptr);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  }
  return 2;
}
