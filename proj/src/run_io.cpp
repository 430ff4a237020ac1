#include "epmatch/run_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace epmatch {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
  size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric value for " + key + ": '" + value + "'");
  }
  if (pos != value.size())
    throw std::invalid_argument("bad numeric value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw std::invalid_argument("bad boolean value for " + key + ": '" + value + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

void RunConfig::apply_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not of the form key = value");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));

    if (key == "scenario") scenario = value;
    else if (key == "mode") mode = value;
    else if (key == "dt") dt = parse_double(key, value);
    else if (key == "t_end") t_end = parse_double(key, value);
    else if (key == "rho") rho = parse_double(key, value);
    else if (key == "c") c = parse_double(key, value);
    else if (key == "out") out_dir = value;
    else if (key == "renormalize_gamma") renormalize_gamma = parse_bool(key, value);
    else if (key == "grid") grid = parse_bool(key, value);
    else if (key == "gnuplot") gnuplot = parse_bool(key, value);
    else if (key == "params.m") m = parse_double(key, value);
    else if (key == "params.M") big_m = parse_double(key, value);
    else if (key == "params.l") l = parse_double(key, value);
    else if (key == "params.g") g = parse_double(key, value);
    else if (key == "params.I1") i1 = parse_double(key, value);
    else if (key == "params.I2") i2 = parse_double(key, value);
    else if (key == "params.I3") i3 = parse_double(key, value);
    else if (key == "params.degenerate") degenerate = parse_bool(key, value);
    else
      throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ControlMode mode_by_name(const std::string& name) {
  if (name == "none") return ControlMode::None;
  if (name == "potential") return ControlMode::PotentialOnly;
  if (name == "full") return ControlMode::Full;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected none, potential or full)");
}

Scenario RunConfig::resolve_scenario() const {
  Scenario sc = scenario_by_name(scenario);
  sc.mode = mode_by_name(mode);

  if (m) sc.params.top_mass = *m;
  if (big_m) sc.params.base_mass = *big_m;
  if (l) sc.params.length = *l;
  if (g) sc.params.gravity = *g;
  if (degenerate) sc.params.degenerate = *degenerate;
  if (sc.params.degenerate && !i1 && !i2) {
    // pendulum inertia follows the bob mass and rod length
    const double ml2 = sc.params.top_mass * sc.params.length * sc.params.length;
    sc.params.inertia = Vec3(ml2, ml2, 0.0);
  }
  if (i1) sc.params.inertia.x() = *i1;
  if (i2) sc.params.inertia.y() = *i2;
  if (i3) sc.params.inertia.z() = *i3;
  if (rho) sc.rho = *rho;
  if (t_end) sc.t_end = *t_end;
  sc.params.validate();
  return sc;
}

IntegratorConfig RunConfig::resolve_integrator(const Scenario& sc) const {
  IntegratorConfig cfg;
  cfg.dt = dt.value_or(1e-3);
  cfg.t_end = t_end.value_or(sc.t_end);
  cfg.renormalize_gamma = renormalize_gamma;
  cfg.validate();
  return cfg;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "t,Omega1,Omega2,Omega3,v1,v2,v3,Gamma1,Gamma2,Gamma3,h,"
         "u1,u2,u3,E0,E_aux,C1,C2,C3,Omega3_inv\n";
  for (const auto& s : traj.samples) {
    const ReducedState& x = s.state;
    out << fmt(s.t) << ',' << fmt(x.omega.x()) << ',' << fmt(x.omega.y()) << ','
        << fmt(x.omega.z()) << ',' << fmt(x.v.x()) << ',' << fmt(x.v.y()) << ','
        << fmt(x.v.z()) << ',' << fmt(x.gamma.x()) << ',' << fmt(x.gamma.y()) << ','
        << fmt(x.gamma.z()) << ',' << fmt(x.height) << ',' << fmt(s.u.x()) << ','
        << fmt(s.u.y()) << ',' << fmt(s.u.z()) << ',' << fmt(s.e0) << ','
        << fmt(s.e_aux) << ',' << fmt(s.casimirs.x()) << ',' << fmt(s.casimirs.y())
        << ',' << fmt(s.casimirs.z()) << ',' << fmt(s.omega3) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv '" + path + "'");

  Trajectory traj;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string field;
    double v[20];
    for (int i = 0; i < 20; ++i) {
      if (!std::getline(row, field, ','))
        throw std::runtime_error("short row in '" + path + "'");
      v[i] = parse_double("csv field", trim(field));
    }
    TrajectorySample s;
    s.t = v[0];
    s.state.omega = Vec3(v[1], v[2], v[3]);
    s.state.v = Vec3(v[4], v[5], v[6]);
    s.state.gamma = Vec3(v[7], v[8], v[9]);
    s.state.height = v[10];
    s.u = Vec3(v[11], v[12], v[13]);
    s.e0 = v[14];
    s.e_aux = v[15];
    s.casimirs = Vec3(v[16], v[17], v[18]);
    s.omega3 = v[19];
    traj.samples.push_back(s);
  }
  if (traj.samples.size() >= 2)
    traj.dt = traj.samples[1].t - traj.samples[0].t;
  return traj;
}

namespace {

double relative_drift(const Trajectory& traj,
                      const std::function<double(const TrajectorySample&)>& get) {
  const double base = get(traj.samples.front());
  const double scale = std::abs(base) > 1e-12 ? std::abs(base) : 1.0;
  double worst = 0.0;
  for (const auto& s : traj.samples) worst = std::max(worst, std::abs(get(s) - base));
  return worst / scale;
}

}  // namespace

RunSummary summarize(const Trajectory& traj, const Scenario& scenario) {
  RunSummary out;
  if (traj.samples.empty()) return out;
  out.e0_drift = relative_drift(traj, [](const TrajectorySample& s) { return s.e0; });
  out.e_aux_drift =
      relative_drift(traj, [](const TrajectorySample& s) { return s.e_aux; });
  for (int i = 0; i < 3; ++i)
    out.casimir_drift(i) = relative_drift(
        traj, [i](const TrajectorySample& s) { return s.casimirs(i); });
  out.omega3_drift =
      relative_drift(traj, [](const TrajectorySample& s) { return s.omega3; });

  const ReducedState eq = upright_equilibrium(
      scenario.kind, scenario.kind == ScenarioKind::HeavyTop
                         ? traj.samples.front().state.omega.z()
                         : 0.0);
  for (const auto& s : traj.samples) {
    out.gamma_norm_drift =
        std::max(out.gamma_norm_drift, std::abs(s.state.gamma.norm() - 1.0));
    const double dev = std::sqrt((s.state.omega - eq.omega).squaredNorm() +
                                 (s.state.v - eq.v).squaredNorm() +
                                 (s.state.gamma - eq.gamma).squaredNorm());
    out.max_equilibrium_deviation = std::max(out.max_equilibrium_deviation, dev);
  }

  // Least-squares quadratic fit of the base height flags free fall.
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d moments = Eigen::Vector3d::Zero();
  for (const auto& s : traj.samples) {
    const Eigen::Vector3d basis(1.0, s.t, s.t * s.t);
    normal += basis * basis.transpose();
    moments += basis * s.state.height;
  }
  const Eigen::Vector3d coeffs = normal.ldlt().solve(moments);
  out.height_quadratic_coeff = coeffs(2);
  out.free_fall = coeffs(2) < -0.25 * scenario.params.gravity;
  return out;
}

void print_summary(std::ostream& os, const RunSummary& summary,
                   const Scenario& scenario, const IntegratorConfig& config) {
  os << "scenario = " << scenario.name << "\n"
     << "mode = " << to_string(scenario.mode) << "\n"
     << "dt = " << fmt(config.dt) << "\n"
     << "t_end = " << fmt(config.t_end) << "\n"
     << "E0_drift = " << fmt(summary.e0_drift) << "\n"
     << "E_aux_drift = " << fmt(summary.e_aux_drift) << "\n"
     << "C1_drift = " << fmt(summary.casimir_drift.x()) << "\n"
     << "C2_drift = " << fmt(summary.casimir_drift.y()) << "\n"
     << "C3_drift = " << fmt(summary.casimir_drift.z()) << "\n"
     << "Omega3_drift = " << fmt(summary.omega3_drift) << "\n"
     << "gamma_norm_drift = " << fmt(summary.gamma_norm_drift) << "\n"
     << "max_equilibrium_deviation = " << fmt(summary.max_equilibrium_deviation)
     << "\n"
     << "height_quadratic_coeff = " << fmt(summary.height_quadratic_coeff) << "\n"
     << "free_fall = " << (summary.free_fall ? "yes" : "no") << "\n";
}

namespace {

void write_gnuplot_script(const std::string& dir) {
  std::ofstream out(dir + "/plot.gp");
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set term pngcairo size 900,600\n"
      << "set output 'omega.png'\n"
      << "plot 'trajectory.csv' using 1:2 with lines, '' using 1:3 with lines, "
         "'' using 1:4 with lines\n"
      << "set output 'v.png'\n"
      << "plot 'trajectory.csv' using 1:5 with lines, '' using 1:6 with lines, "
         "'' using 1:7 with lines\n"
      << "set output 'gamma.png'\n"
      << "plot 'trajectory.csv' using 1:8 with lines, '' using 1:9 with lines, "
         "'' using 1:10 with lines\n";
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return out;
}

std::vector<double> geomspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double ratio = std::pow(hi / lo, 1.0 / (n - 1));
  double x = lo;
  for (int i = 0; i < n; ++i, x *= ratio) out[i] = x;
  return out;
}

double rho_upper_bound(const SystemParams& params, ScenarioKind kind) {
  if (kind == ScenarioKind::SphericalPendulum) return params.top_mass;
  return params.top_mass * params.top_mass * params.length * params.length /
         params.inertia.x();
}

}  // namespace

int cmd_simulate(const RunConfig& config) {
  return guarded([&]() {
    const Scenario sc = config.resolve_scenario();
    const IntegratorConfig icfg = config.resolve_integrator(sc);
    const Trajectory traj = simulate(sc, icfg);

    std::filesystem::create_directories(config.out_dir);
    write_trajectory_csv(config.out_dir + "/trajectory.csv", traj);

    const RunSummary summary = summarize(traj, sc);
    print_summary(std::cout, summary, sc, icfg);
    std::ofstream sfile(config.out_dir + "/summary.txt");
    print_summary(sfile, summary, sc, icfg);
    if (config.gnuplot) write_gnuplot_script(config.out_dir);
    std::cout << "rows = " << traj.samples.size() << "\n"
              << "wrote " << config.out_dir << "/trajectory.csv\n";
    return 0;
  });
}

int cmd_match_check(const RunConfig& config) {
  return guarded([&]() {
    Scenario sc = config.resolve_scenario();
    sc.mode = ControlMode::Full;
    const IntegratorConfig icfg = config.resolve_integrator(sc);

    const ShapingGains gains = solve_matching(sc.params, sc.rho);
    const MatchingResiduals residuals = verify_matching(sc.params, gains);
    const bool metric_pd =
        MetricTensor::shaped(sc.params, sc.rho).positive_definite();

    std::cout << "rho = " << fmt(sc.rho) << "\n"
              << "k = " << fmt(gains.k) << "\n"
              << "MC1_residual = " << fmt(residuals.mc1) << "\n"
              << "MC2_residual = " << fmt(residuals.mc2) << "\n"
              << "MC3_residual = " << fmt(residuals.mc3) << "\n"
              << "Delta_residual = " << fmt(residuals.delta) << "\n"
              << "shaped_metric_positive_definite = " << (metric_pd ? "yes" : "no")
              << "\n";
    if (gains.kinetic_shaping_off)
      std::cout << "note = rho equals the total mass; kinetic shaping force is "
                   "identically zero\n";

    const Trajectory matched = simulate(sc, icfg);
    const Trajectory implicit_route = simulate_implicit(sc, icfg);
    const double deviation = compare_trajectories(matched, implicit_route).max();
    std::cout << "matched_vs_implicit_deviation = " << fmt(deviation) << "\n";

    const bool pass = residuals.max() < 1e-12 && deviation < 1e-9;
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
  });
}

int cmd_stability(const RunConfig& config) {
  return guarded([&]() {
    const Scenario sc = config.resolve_scenario();
    const ShapingGains gains = solve_matching(sc.params, sc.rho);
    const ReducedState eq = upright_equilibrium(
        sc.kind,
        sc.kind == ScenarioKind::HeavyTop ? sc.initial.omega.z() : 0.0);

    const EnergyCasimirJet jet =
        first_variation_solve(sc.params, gains, eq, config.c, sc.kind);
    const HessianReport report =
        hessian_definiteness(sc.params, gains, jet, eq, sc.kind);

    std::cout << "scenario = " << sc.name << "\n"
              << "rho = " << fmt(sc.rho) << "\n"
              << "c = " << fmt(config.c) << "\n"
              << "D2Phi = " << fmt(jet.d_phi.y()) << "\n"
              << "D3Phi = " << fmt(jet.d_phi.z()) << "\n";
    if (sc.kind == ScenarioKind::HeavyTop)
      std::cout << "phi_prime = " << fmt(jet.phi_prime) << "\n";
    std::cout << "equilibrium_gradient_norm = "
              << fmt(jet.equilibrium_gradient_norm) << "\n";

    std::cout << "hessian =\n";
    for (int i = 0; i < report.hessian.rows(); ++i) {
      for (int j = 0; j < report.hessian.cols(); ++j)
        std::cout << (j ? "," : "") << fmt(report.hessian(i, j));
      std::cout << "\n";
    }
    std::cout << "leading_minors =";
    for (int i = 0; i < report.leading_minors.size(); ++i)
      std::cout << " " << fmt(report.leading_minors(i));
    std::cout << "\n"
              << "verdict = "
              << (report.positive_definite ? "STABLE" : "NOT-DEFINITE") << "\n";

    if (config.grid) {
      const double rho_max = rho_upper_bound(sc.params, sc.kind);
      const std::vector<double> rho_grid =
          linspace(0.05 * rho_max, 1.4 * rho_max, 20);
      const std::vector<double> c_grid = geomspace(0.25, 100.0, 20);
      const auto cells = stability_region(sc.params, sc.kind, rho_grid, c_grid);

      std::filesystem::create_directories(config.out_dir);
      const std::string path = config.out_dir + "/stability_region.csv";
      std::ofstream out(path);
      out << "rho,c,definite\n";
      int stable_count = 0;
      for (const auto& cell : cells) {
        out << fmt(cell.rho) << ',' << fmt(cell.c) << ','
            << (cell.definite ? 1 : 0) << '\n';
        if (cell.definite) ++stable_count;
      }
      std::cout << "grid_cells = " << cells.size() << "\n"
                << "grid_stable = " << stable_count << "\n"
                << "wrote " << path << "\n";

      int stable_c_here = 0;
      for (double c : c_grid) {
        try {
          const EnergyCasimirJet j =
              first_variation_solve(sc.params, gains, eq, c, sc.kind);
          if (hessian_definiteness(sc.params, gains, j, eq, sc.kind)
                  .positive_definite)
            ++stable_c_here;
        } catch (const std::exception&) {
        }
      }
      std::cout << "stable_c_count_at_rho = " << stable_c_here << "\n";
    }
    return 0;
  });
}

int cmd_invariants(const RunConfig& config) {
  return guarded([&]() {
    const Scenario sc = config.resolve_scenario();
    const IntegratorConfig icfg = config.resolve_integrator(sc);
    const Trajectory traj = simulate(sc, icfg);
    print_summary(std::cout, summarize(traj, sc), sc, icfg);
    return 0;
  });
}

int cmd_compare(const std::string& csv_a, const std::string& csv_b) {
  return guarded([&]() {
    const Trajectory a = read_trajectory_csv(csv_a);
    const Trajectory b = read_trajectory_csv(csv_b);
    const TrajectoryDeviation dev = compare_trajectories(a, b);
    std::cout << "omega_deviation = " << fmt(dev.omega) << "\n"
              << "v_deviation = " << fmt(dev.v) << "\n"
              << "gamma_deviation = " << fmt(dev.gamma) << "\n"
              << "height_deviation = " << fmt(dev.height) << "\n"
              << "max_deviation = " << fmt(dev.max()) << "\n";
    return 0;
  });
}

}  // namespace epmatch
