#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "epmatch/scenarios.hpp"

namespace epmatch {

/// Everything a CLI command needs: scenario selection, overrides, integrator
/// settings, and output locations. Values resolve as defaults, then config
/// file, then explicit flags.
struct RunConfig {
  std::string scenario{"sp"};
  std::string mode{"full"};
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> rho;
  double c{1.0};
  std::string out_dir{"."};
  bool renormalize_gamma{false};
  bool grid{false};
  bool gnuplot{false};

  // Parameter overrides (dotted keys in the config file).
  std::optional<double> m, big_m, l, g, i1, i2, i3;
  std::optional<bool> degenerate;

  /// Applies `key = value` lines from a flat config file. Throws
  /// std::invalid_argument on unknown keys or malformed lines.
  void apply_config_file(const std::string& path);

  /// Scenario with overrides applied and parameters validated.
  Scenario resolve_scenario() const;
  IntegratorConfig resolve_integrator(const Scenario& sc) const;
};

ControlMode mode_by_name(const std::string& name);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

/// Drift and deviation summary of a finished run.
struct RunSummary {
  double e0_drift{0.0};
  double e_aux_drift{0.0};
  Vec3 casimir_drift{Vec3::Zero()};
  double omega3_drift{0.0};
  double gamma_norm_drift{0.0};
  double max_equilibrium_deviation{0.0};
  double height_quadratic_coeff{0.0};
  bool free_fall{false};
};

RunSummary summarize(const Trajectory& traj, const Scenario& scenario);
void print_summary(std::ostream& os, const RunSummary& summary,
                   const Scenario& scenario, const IntegratorConfig& config);

// Command entry points; each returns a process exit code and reports errors
// as a single "error: ..." line on stderr.
int cmd_simulate(const RunConfig& config);
int cmd_match_check(const RunConfig& config);
int cmd_stability(const RunConfig& config);
int cmd_invariants(const RunConfig& config);
int cmd_compare(const std::string& csv_a, const std::string& csv_b);

}  // namespace epmatch
