#include "epmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epmatch {

namespace {

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

// Translational-rotational coupling block of the kinetic metric, lower left.
Mat3 coupling_lower(const SystemParams& params) {
  return -params.top_mass * params.length * hat(params.axis);
}

}  // namespace

double MatchingResiduals::max() const {
  return std::max({mc1, mc2, mc3, delta});
}

ShapingGains solve_matching(const SystemParams& params, double rho) {
  if (!std::isfinite(rho) || rho == 0.0)
    throw std::invalid_argument("rho must be finite and nonzero");
  const double mt = params.total_mass();
  // Values within rounding of the total mass are snapped to it; sigma has no
  // finite representation there and the shaping force degenerates to zero.
  if (std::abs(rho - mt) <= 1e-12 * mt) rho = mt;

  ShapingGains g;
  g.rho = rho;
  g.k = rho - mt;
  g.rho_mat = rho * Mat3::Identity();
  g.tau = (1.0 / rho - 1.0 / mt) * coupling_lower(params);
  if (rho == mt) {
    g.kinetic_shaping_off = true;
    g.sigma = Mat3::Zero();
  } else {
    g.sigma = (1.0 / (1.0 / mt - 1.0 / rho)) * Mat3::Identity();
  }
  return g;
}

MatchingResiduals verify_matching(const SystemParams& params, const ShapingGains& gains) {
  const double mt = params.total_mass();
  const Mat3 g_tt = mt * Mat3::Identity();
  const Mat3 g_lower = coupling_lower(params);

  MatchingResiduals r;
  r.mc1 = max_abs(gains.rho_mat - g_tt - gains.k * Mat3::Identity());
  const Mat3 inv_diff = gains.rho_mat.inverse() - g_tt.inverse();
  r.mc2 = max_abs(gains.tau - inv_diff * g_lower);
  if (gains.kinetic_shaping_off) {
    r.mc3 = max_abs(g_tt.inverse() - gains.rho_mat.inverse());
  } else {
    r.mc3 = max_abs(gains.sigma.inverse() -
                    (g_tt.inverse() - gains.rho_mat.inverse()));
  }
  r.delta = max_abs(gains.rho_mat * (g_tt.inverse() * g_lower + gains.tau) - g_lower);
  return r;
}

double controlled_kinetic(const SystemParams& params, const ShapingGains& gains,
                          const Vec3& omega, const Vec3& v) {
  const Vec3 tau_omega = gains.tau * omega;
  const double shifted = kinetic_energy(params, omega, v + tau_omega);
  const double sigma_term = 0.5 * tau_omega.dot(gains.sigma * tau_omega);

  const double mt = params.total_mass();
  const Mat3 correction = gains.rho_mat - mt * Mat3::Identity();
  const Vec3 shift2 = v + ((1.0 / mt) * coupling_lower(params) + gains.tau) * omega;
  const double correction_term = 0.5 * shift2.dot(correction * shift2);

  return shifted + sigma_term + correction_term;
}

double controlled_lagrangian(const SystemParams& params, const ShapingGains& gains,
                             const ReducedState& s) {
  return controlled_kinetic(params, gains, s.omega, s.v) -
         params.top_mass * params.gravity * params.length * params.axis.dot(s.gamma);
}

Vec3 potential_shaping_force(const SystemParams& params, const Vec3& gamma) {
  return params.total_mass() * params.gravity * gamma;
}

Vec3 kinetic_shaping_force(const SystemParams& params, const ShapingGains& gains,
                           const ReducedState& s, const Vec3& v_dot) {
  return (params.total_mass() - gains.rho) * (v_dot - s.v.cross(s.omega));
}

ClosedLoopDynamics::ClosedLoopDynamics(const SystemParams& params,
                                       const ShapingGains& gains)
    : params_(params), gains_(gains),
      metric_(MetricTensor::shaped(params, gains.rho)) {
  params_.validate();
}

ReducedState ClosedLoopDynamics::rhs(const ReducedState& s) const {
  const AlgebraElement xi{s.omega, s.v};
  const Momenta m = metric_.apply(s.omega, s.v);
  DualAlgebraElement force = ad_star(xi, {m.mu, m.p});
  force.mu +=
      (-params_.top_mass * params_.gravity * params_.length * params_.axis)
          .cross(s.gamma);

  ReducedState ds;
  metric_.solve(force.mu, force.p, &ds.omega, &ds.v);
  ds.gamma = s.gamma.cross(s.omega);
  ds.height = s.v.dot(s.gamma);
  return ds;
}

Vec3 ClosedLoopDynamics::control(const ReducedState& s) const {
  const ReducedState ds = rhs(s);
  return kinetic_shaping_force(params_, gains_, s, ds.v) +
         potential_shaping_force(params_, s.gamma);
}

ImplicitControlDynamics::ImplicitControlDynamics(const SystemParams& params,
                                                 const ShapingGains& gains)
    : params_(params), gains_(gains),
      base_metric_(MetricTensor::kinetic(params)),
      shaped_metric_(MetricTensor::shaped(params, gains.rho)) {
  params_.validate();
}

ReducedState ImplicitControlDynamics::rhs(const ReducedState& s) const {
  const AlgebraElement xi{s.omega, s.v};
  const Momenta m = base_metric_.apply(s.omega, s.v);
  DualAlgebraElement force = ad_star(xi, {m.mu, m.p});
  force.mu +=
      (-params_.top_mass * params_.gravity * params_.length * params_.axis)
          .cross(s.gamma);
  // Gravity on the base and the potential shaping force cancel exactly; the
  // velocity-dependent part of the kinetic shaping force stays, while its
  // acceleration-dependent part is absorbed by the shaped mass matrix.
  const Vec3 base_gravity = -params_.total_mass() * params_.gravity * s.gamma;
  force.p += base_gravity + potential_shaping_force(params_, s.gamma);
  force.p += (gains_.rho - params_.total_mass()) * s.v.cross(s.omega);

  ReducedState ds;
  shaped_metric_.solve(force.mu, force.p, &ds.omega, &ds.v);
  ds.gamma = s.gamma.cross(s.omega);
  ds.height = s.v.dot(s.gamma);
  return ds;
}

ReducedState closed_loop_rhs(const SystemParams& params, const ShapingGains& gains,
                             const ReducedState& s) {
  return ClosedLoopDynamics(params, gains).rhs(s);
}

}  // namespace epmatch
