#pragma once

#include <vector>

#include <Eigen/Dense>

#include "epmatch/geometry.hpp"

namespace epmatch {

/// Which of the two built-in systems a computation refers to.
enum class ScenarioKind { SphericalPendulum, HeavyTop };

/// Physical parameters of the top-on-base system.
///
/// In degenerate mode the top carries no spin about its axis: the third
/// inertia component is zero, the third angular-velocity component is removed
/// from the dynamics, and the axis must be e3.
struct SystemParams {
  double top_mass{0.0};   // kg
  double base_mass{0.0};  // kg
  double length{0.0};     // pivot-to-center-of-mass distance, m
  Vec3 axis{0.0, 0.0, 1.0};
  Vec3 inertia{Vec3::Zero()};  // principal moments (I1, I2, I3)
  double gravity{9.8};
  bool degenerate{false};

  double total_mass() const { return top_mass + base_mass; }

  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;
};

struct Momenta {
  Vec3 mu{Vec3::Zero()};
  Vec3 p{Vec3::Zero()};
};

/// Kinetic metric on body velocities (Omega, v), stored prefactored.
///
/// Block form: [[I, m l hat(chi)], [-m l hat(chi), m_t * Id]] where m_t is
/// the translational mass (total mass for the plain system, the shaping
/// parameter rho for the matched one). Degenerate mode works with the 5x5
/// restriction that deletes the Omega3 row and column.
class MetricTensor {
 public:
  /// Metric of the uncontrolled system; rejects non-positive-definite
  /// parameter combinations.
  static MetricTensor kinetic(const SystemParams& params);

  /// Metric of the matched system: translational block rho * Id. Only
  /// invertibility is required; definiteness is reported, not enforced.
  static MetricTensor shaped(const SystemParams& params, double rho);

  bool degenerate() const { return degenerate_; }

  /// The active matrix (5x5 in degenerate mode, 6x6 otherwise).
  const Eigen::MatrixXd& active_matrix() const { return mat_; }

  Momenta apply(const Vec3& omega, const Vec3& v) const;

  /// Solves metric * (omega_dot; v_dot) = (rhs_mu; rhs_p) with one step of
  /// iterative refinement. Degenerate mode pins omega_dot.z() to zero.
  void solve(const Vec3& rhs_mu, const Vec3& rhs_p, Vec3* omega_dot,
             Vec3* v_dot) const;

  bool positive_definite() const { return positive_definite_; }

 private:
  MetricTensor(const SystemParams& params, double translational_mass,
               bool require_definite);

  Eigen::MatrixXd mat_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool degenerate_{false};
  bool positive_definite_{false};
};

/// Reduced state: body velocities plus the advected vertical direction and
/// base height. Omega.z() stays zero in degenerate mode.
struct ReducedState {
  Vec3 omega{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Vec3 gamma{Vec3::Zero()};
  double height{0.0};

  bool finite() const;
};

// Vector-space operations used by the integrator.
ReducedState operator+(const ReducedState& a, const ReducedState& b);
ReducedState operator*(double s, const ReducedState& a);

/// Kinetic energy of the uncontrolled system.
double kinetic_energy(const SystemParams& params, const Vec3& omega, const Vec3& v);

/// Reduced Lagrangian: kinetic energy minus g * (m l chi, m_total) . (Gamma, h).
double reduced_lagrangian(const SystemParams& params, const ReducedState& s);

/// Lagrangian on group x body-velocity x advected parameter; depends on g
/// only through g^T a.
double extended_lagrangian(const SystemParams& params, const GroupElement& g,
                           const AlgebraElement& xi, const DualVector4& a);

/// Energy of the uncontrolled system (conserved when u = 0).
double free_energy(const SystemParams& params, const ReducedState& s);

Momenta momenta(const SystemParams& params, const ReducedState& s);

/// Equations of motion with an applied base force u, plus the advection of
/// (Gamma, h). Returned object holds time derivatives in the state fields.
class EpDynamics {
 public:
  explicit EpDynamics(const SystemParams& params);

  ReducedState rhs(const ReducedState& s, const Vec3& u) const;

  const SystemParams& params() const { return params_; }
  const MetricTensor& metric() const { return metric_; }

 private:
  SystemParams params_;
  MetricTensor metric_;
};

/// Convenience wrapper constructing the metric on the fly.
ReducedState ep_rhs(const SystemParams& params, const ReducedState& s, const Vec3& u);

/// Integrates g_dot = g xi(t) through body velocities sampled at spacing dt,
/// starting from g0. The rotation is projected back onto the rotation group
/// after every step. Returns one group element per sample.
std::vector<GroupElement> reconstruct(const std::vector<AlgebraElement>& xi,
                                      double dt, const GroupElement& g0);

}  // namespace epmatch
