#pragma once

#include "epmatch/dynamics.hpp"

namespace epmatch {

/// Gains of the kinetic/potential shaping controller. Produced by
/// solve_matching; tau maps body angular velocity into the translational
/// velocity shift, sigma is defined through its inverse (metric inverse
/// difference), and k = rho - total mass scales the kinetic shaping force.
struct ShapingGains {
  double rho{0.0};
  double k{0.0};
  Mat3 rho_mat{Mat3::Zero()};
  Mat3 tau{Mat3::Zero()};
  Mat3 sigma{Mat3::Zero()};
  /// Set when rho equals the total mass: the kinetic shaping force vanishes
  /// identically and sigma has no finite representation (it is unused then).
  bool kinetic_shaping_off{false};
};

/// Residuals of the algebraic conditions the gains must satisfy; all are
/// identically zero for gains produced by solve_matching.
struct MatchingResiduals {
  double mc1{0.0};
  double mc2{0.0};
  double mc3{0.0};
  double delta{0.0};

  double max() const;
};

/// Computes the shaping gains for a scalar rho. Rejects rho = 0 (no inverse).
ShapingGains solve_matching(const SystemParams& params, double rho);

/// Evaluates the matching residuals from the generic matrix conditions.
MatchingResiduals verify_matching(const SystemParams& params, const ShapingGains& gains);

/// Kinetic energy of the shaped system, evaluated by the explicit three-term
/// construction (base energy at shifted velocity, sigma-tau quadratic, metric
/// correction).
double controlled_kinetic(const SystemParams& params, const ShapingGains& gains,
                          const Vec3& omega, const Vec3& v);

/// Shaped Lagrangian: controlled kinetic energy minus the top potential.
double controlled_lagrangian(const SystemParams& params, const ShapingGains& gains,
                             const ReducedState& s);

/// Gravity-cancelling base force, m_total * g * Gamma.
Vec3 potential_shaping_force(const SystemParams& params, const Vec3& gamma);

/// Kinetic shaping force given the base acceleration along the closed loop.
Vec3 kinetic_shaping_force(const SystemParams& params, const ShapingGains& gains,
                           const ReducedState& s, const Vec3& v_dot);

/// Closed-loop dynamics: the free equations of the shaped Lagrangian with the
/// advected vertical direction (height integrated alongside for logging).
class ClosedLoopDynamics {
 public:
  ClosedLoopDynamics(const SystemParams& params, const ShapingGains& gains);

  ReducedState rhs(const ReducedState& s) const;

  /// Total base force realizing the closed loop at this state (kinetic plus
  /// potential shaping).
  Vec3 control(const ReducedState& s) const;

  const MetricTensor& metric() const { return metric_; }

 private:
  SystemParams params_;
  ShapingGains gains_;
  MetricTensor metric_;
};

/// Same trajectories by a different route: the controlled equations of the
/// original Lagrangian with the acceleration-dependent part of the force
/// folded into the mass matrix. Used to cross-check ClosedLoopDynamics.
class ImplicitControlDynamics {
 public:
  ImplicitControlDynamics(const SystemParams& params, const ShapingGains& gains);

  ReducedState rhs(const ReducedState& s) const;

 private:
  SystemParams params_;
  ShapingGains gains_;
  MetricTensor base_metric_;
  MetricTensor shaped_metric_;
};

ReducedState closed_loop_rhs(const SystemParams& params, const ShapingGains& gains,
                             const ReducedState& s);

}  // namespace epmatch
