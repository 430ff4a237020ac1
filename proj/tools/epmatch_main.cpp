#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epmatch/run_io.hpp"

namespace {

void add_common_options(CLI::App* cmd, epmatch::RunConfig* cfg,
                        std::string* config_path) {
  cmd->add_option("--scenario", cfg->scenario, "Scenario name: sp or ht");
  cmd->add_option("--mode", cfg->mode, "Control mode: none, potential or full");
  cmd->add_option("--dt", [cfg](const CLI::results_t& r) {
    cfg->dt = std::stod(r[0]);
    return true;
  }, "Integrator step size");
  cmd->add_option("--t-end", [cfg](const CLI::results_t& r) {
    cfg->t_end = std::stod(r[0]);
    return true;
  }, "Simulation horizon");
  cmd->add_option("--rho", [cfg](const CLI::results_t& r) {
    cfg->rho = std::stod(r[0]);
    return true;
  }, "Kinetic shaping parameter");
  cmd->add_option("--c", cfg->c, "Auxiliary-invariant weight");
  cmd->add_option("--out", cfg->out_dir, "Output directory");
  cmd->add_option("--config", *config_path, "Flat key = value config file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and stabilization toolkit for a top on a movable base"};
  app.require_subcommand(1);

  epmatch::RunConfig cfg;
  std::string config_path;

  CLI::App* sim = app.add_subcommand("simulate", "Integrate a scenario and write CSV");
  add_common_options(sim, &cfg, &config_path);
  sim->add_flag("--renormalize-gamma", cfg.renormalize_gamma,
                "Project Gamma back to unit length each step");
  sim->add_flag("--gnuplot", cfg.gnuplot, "Also write a gnuplot script");

  CLI::App* match = app.add_subcommand(
      "match-check", "Verify the shaping conditions and the two dynamics routes");
  add_common_options(match, &cfg, &config_path);

  CLI::App* stab = app.add_subcommand(
      "stability", "First variation, Hessian and definiteness verdict");
  add_common_options(stab, &cfg, &config_path);
  stab->add_flag("--grid", cfg.grid, "Scan the (rho, c) grid and write CSV");

  CLI::App* inv = app.add_subcommand("invariants", "Report invariant drifts");
  add_common_options(inv, &cfg, &config_path);

  CLI::App* cmp = app.add_subcommand("compare", "Compare two trajectory CSV files");
  std::string csv_a, csv_b;
  cmp->add_option("csv_a", csv_a, "First trajectory")->required();
  cmp->add_option("csv_b", csv_b, "Second trajectory")->required();

  // Apply the config file before parsing so explicit flags override it.
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        cfg.apply_config_file(argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        cfg.apply_config_file(arg.substr(9));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (sim->parsed()) return epmatch::cmd_simulate(cfg);
  if (match->parsed()) return epmatch::cmd_match_check(cfg);
  if (stab->parsed()) return epmatch::cmd_stability(cfg);
  if (inv->parsed()) return epmatch::cmd_invariants(cfg);
  if (cmp->parsed()) return epmatch::cmd_compare(csv_a, csv_b);
  std::cerr << "error: no command given\n";
  return 1;
}
