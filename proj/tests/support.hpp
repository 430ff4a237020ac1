#pragma once

#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "epmatch/integrator.hpp"
#include "epmatch/scenarios.hpp"

namespace epmatch::testing {

inline Vec3 random_vec3(std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return Vec3(dist(rng), dist(rng), dist(rng));
}

inline Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline GroupElement random_group_element(std::mt19937& rng) {
  return {random_rotation(rng), random_vec3(rng)};
}

inline AlgebraElement random_algebra_element(std::mt19937& rng) {
  return {random_vec3(rng), random_vec3(rng)};
}

inline Vector4 random_vector4(std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  return {random_vec3(rng), dist(rng)};
}

inline DualVector4 random_dual_vector4(std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  return {random_vec3(rng), dist(rng)};
}

/// Pose whose advected data matches the given state: the rotation carries the
/// tilted vertical back to e3 and the base sits at the stored height.
inline GroupElement pose_for_state(const ReducedState& s) {
  GroupElement g;
  g.rotation =
      Eigen::Quaterniond::FromTwoVectors(s.gamma, Vec3::UnitZ()).toRotationMatrix();
  g.translation = Vec3(0.0, 0.0, s.height);
  return g;
}

/// Component-wise cross product, independent of any library code.
inline Vec3 cross_oracle(const Vec3& a, const Vec3& b) {
  return Vec3(a.y() * b.z() - a.z() * b.y(),
              a.z() * b.x() - a.x() * b.z(),
              a.x() * b.y() - a.y() * b.x());
}

/// Rotation by angle about an axis via the Eigen angle-axis path.
inline Mat3 rodrigues_oracle(double angle, const Vec3& axis) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// State of the stand-alone spherical pendulum used as the reduction oracle.
struct PendulumState {
  double omega1{0.0};
  double omega2{0.0};
  Vec3 gamma{Vec3::Zero()};
};

/// Pendulum equations with gravity constant g_eff: the angular velocity sees
/// only the tilt, and the vertical direction is advected.
inline PendulumState pendulum_rhs(const PendulumState& s, double g_eff, double l) {
  PendulumState ds;
  ds.omega1 = g_eff * s.gamma.y() / l;
  ds.omega2 = -g_eff * s.gamma.x() / l;
  ds.gamma = s.gamma.cross(Vec3(s.omega1, s.omega2, 0.0));
  return ds;
}

inline PendulumState pendulum_rk4_step(const PendulumState& s, double g_eff,
                                       double l, double dt) {
  const auto axpy = [](const PendulumState& a, double c, const PendulumState& b) {
    return PendulumState{a.omega1 + c * b.omega1, a.omega2 + c * b.omega2,
                         a.gamma + c * b.gamma};
  };
  const PendulumState k1 = pendulum_rhs(s, g_eff, l);
  const PendulumState k2 = pendulum_rhs(axpy(s, 0.5 * dt, k1), g_eff, l);
  const PendulumState k3 = pendulum_rhs(axpy(s, 0.5 * dt, k2), g_eff, l);
  const PendulumState k4 = pendulum_rhs(axpy(s, dt, k3), g_eff, l);
  PendulumState out = s;
  out = axpy(out, dt / 6.0, k1);
  out = axpy(out, dt / 3.0, k2);
  out = axpy(out, dt / 3.0, k3);
  out = axpy(out, dt / 6.0, k4);
  return out;
}

/// Replays a logged force series through the open-loop equations. Uses
/// double-width RK4 macro steps so the stage times land on the sample grid;
/// returns the states at even sample indices (including the initial one).
inline std::vector<ReducedState> replay_open_loop(const SystemParams& params,
                                                  const std::vector<Vec3>& u,
                                                  const ReducedState& initial,
                                                  double dt) {
  const EpDynamics dyn(params);
  std::vector<ReducedState> out;
  out.push_back(initial);
  ReducedState s = initial;
  const double h = 2.0 * dt;
  for (size_t i = 0; i + 2 < u.size(); i += 2) {
    const ReducedState k1 = dyn.rhs(s, u[i]);
    const ReducedState k2 = dyn.rhs(s + (0.5 * h) * k1, u[i + 1]);
    const ReducedState k3 = dyn.rhs(s + (0.5 * h) * k2, u[i + 1]);
    const ReducedState k4 = dyn.rhs(s + h * k3, u[i + 2]);
    s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(s);
  }
  return out;
}

}  // namespace epmatch::testing
