#pragma once

#include <string>
#include <vector>

#include "epmatch/stability.hpp"

namespace epmatch {

struct IntegratorConfig {
  double dt{1e-3};
  double t_end{0.0};
  bool renormalize_gamma{false};  // off by default so drift stays observable

  void validate() const;
};

enum class ControlMode { None, PotentialOnly, Full };

std::string to_string(ControlMode mode);

struct Scenario {
  std::string name;
  ScenarioKind kind{ScenarioKind::SphericalPendulum};
  SystemParams params;
  double rho{0.0};
  ReducedState initial;
  ControlMode mode{ControlMode::Full};
  double t_end{0.0};
};

/// Classical fourth-order Runge-Kutta step. Throws if the result is not
/// finite.
template <typename Rhs>
ReducedState rk4_step(const Rhs& rhs, const ReducedState& s, double dt) {
  const ReducedState k1 = rhs(s);
  const ReducedState k2 = rhs(s + (0.5 * dt) * k1);
  const ReducedState k3 = rhs(s + (0.5 * dt) * k2);
  const ReducedState k4 = rhs(s + dt * k3);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct TrajectorySample {
  double t{0.0};
  ReducedState state;
  Vec3 u{Vec3::Zero()};
  double e0{0.0};
  double e_aux{0.0};
  Vec3 casimirs{Vec3::Zero()};
  double omega3{0.0};
};

struct Trajectory {
  double dt{0.0};
  std::vector<TrajectorySample> samples;

  std::vector<AlgebraElement> body_velocities() const;
};

/// Integrates the scenario on the uniform grid, logging the control force
/// and every invariant per sample. Throws std::runtime_error naming the time
/// if the state stops being finite.
Trajectory simulate(const Scenario& scenario, const IntegratorConfig& config);

/// Full-control trajectory computed through the implicit-force route; used to
/// cross-check the matched closed loop.
Trajectory simulate_implicit(const Scenario& scenario, const IntegratorConfig& config);

/// Kinetic shaping force along a closed-loop trajectory, one value per sample.
std::vector<Vec3> kinetic_control_series(const Trajectory& traj,
                                         const SystemParams& params,
                                         const ShapingGains& gains);

struct TrajectoryDeviation {
  double omega{0.0};
  double v{0.0};
  double gamma{0.0};
  double height{0.0};

  double max() const;
};

/// Supremum deviations per state field; requires identical grids.
TrajectoryDeviation compare_trajectories(const Trajectory& a, const Trajectory& b);

}  // namespace epmatch
