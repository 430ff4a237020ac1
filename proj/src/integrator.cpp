#include "epmatch/integrator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace epmatch {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be non-negative");
}

std::string to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::None: return "none";
    case ControlMode::PotentialOnly: return "potential";
    case ControlMode::Full: return "full";
  }
  return "unknown";
}

std::vector<AlgebraElement> Trajectory::body_velocities() const {
  std::vector<AlgebraElement> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.state.omega, s.state.v});
  return out;
}

namespace {

template <typename Rhs, typename Control>
Trajectory run(const Scenario& scenario, const IntegratorConfig& config,
               const Rhs& rhs, const Control& control) {
  config.validate();
  scenario.params.validate();
  const ShapingGains gains = solve_matching(scenario.params, scenario.rho);

  const long steps = std::lround(config.t_end / config.dt);

  Trajectory traj;
  traj.dt = config.dt;
  traj.samples.reserve(static_cast<size_t>(steps) + 1);

  ReducedState state = scenario.initial;
  for (long i = 0;; ++i) {
    const double t = static_cast<double>(i) * config.dt;
    TrajectorySample sample;
    sample.t = t;
    sample.state = state;
    sample.u = control(state);
    sample.e0 = energy_controlled(scenario.params, gains, state);
    sample.e_aux = aux_invariant(scenario.params, gains, state, scenario.kind);
    sample.casimirs = casimir_invariants(scenario.params, gains, state);
    sample.omega3 = omega3_invariant(state);
    traj.samples.push_back(sample);

    if (i == steps) break;
    state = rk4_step(rhs, state, config.dt);
    if (config.renormalize_gamma) state.gamma.normalize();
    if (!state.finite()) {
      std::ostringstream msg;
      msg << "non-finite state at t = " << t + config.dt;
      throw std::runtime_error(msg.str());
    }
  }
  return traj;
}

}  // namespace

Trajectory simulate(const Scenario& scenario, const IntegratorConfig& config) {
  IntegratorConfig cfg = config;
  if (cfg.t_end == 0.0) cfg.t_end = scenario.t_end;
  Scenario sc = scenario;
  sc.t_end = cfg.t_end;

  switch (scenario.mode) {
    case ControlMode::None: {
      const EpDynamics dyn(scenario.params);
      return run(
          sc, cfg, [&](const ReducedState& s) { return dyn.rhs(s, Vec3::Zero()); },
          [](const ReducedState&) { return Vec3::Zero(); });
    }
    case ControlMode::PotentialOnly: {
      const EpDynamics dyn(scenario.params);
      const SystemParams& p = scenario.params;
      return run(
          sc, cfg,
          [&](const ReducedState& s) {
            return dyn.rhs(s, potential_shaping_force(p, s.gamma));
          },
          [&](const ReducedState& s) { return potential_shaping_force(p, s.gamma); });
    }
    case ControlMode::Full: {
      const ShapingGains gains = solve_matching(scenario.params, scenario.rho);
      const ClosedLoopDynamics dyn(scenario.params, gains);
      return run(
          sc, cfg, [&](const ReducedState& s) { return dyn.rhs(s); },
          [&](const ReducedState& s) { return dyn.control(s); });
    }
  }
  throw std::invalid_argument("unknown control mode");
}

Trajectory simulate_implicit(const Scenario& scenario, const IntegratorConfig& config) {
  IntegratorConfig cfg = config;
  if (cfg.t_end == 0.0) cfg.t_end = scenario.t_end;
  Scenario sc = scenario;
  sc.t_end = cfg.t_end;

  const ShapingGains gains = solve_matching(scenario.params, scenario.rho);
  const ImplicitControlDynamics dyn(scenario.params, gains);
  const ClosedLoopDynamics loop(scenario.params, gains);
  return run(
      sc, cfg, [&](const ReducedState& s) { return dyn.rhs(s); },
      [&](const ReducedState& s) { return loop.control(s); });
}

std::vector<Vec3> kinetic_control_series(const Trajectory& traj,
                                         const SystemParams& params,
                                         const ShapingGains& gains) {
  const ClosedLoopDynamics dyn(params, gains);
  std::vector<Vec3> out;
  out.reserve(traj.samples.size());
  for (const auto& sample : traj.samples) {
    const ReducedState ds = dyn.rhs(sample.state);
    out.push_back(kinetic_shaping_force(params, gains, sample.state, ds.v));
  }
  return out;
}

double TrajectoryDeviation::max() const {
  return std::max({omega, v, gamma, height});
}

TrajectoryDeviation compare_trajectories(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument("trajectories have different lengths");
  if (std::abs(a.dt - b.dt) > 1e-15 * std::max(a.dt, b.dt))
    throw std::invalid_argument("trajectories have different grids");

  TrajectoryDeviation dev;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    const ReducedState& x = a.samples[i].state;
    const ReducedState& y = b.samples[i].state;
    dev.omega = std::max(dev.omega, (x.omega - y.omega).cwiseAbs().maxCoeff());
    dev.v = std::max(dev.v, (x.v - y.v).cwiseAbs().maxCoeff());
    dev.gamma = std::max(dev.gamma, (x.gamma - y.gamma).cwiseAbs().maxCoeff());
    dev.height = std::max(dev.height, std::abs(x.height - y.height));
  }
  return dev;
}

}  // namespace epmatch
