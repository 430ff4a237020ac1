#include "epmatch/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace epmatch {

void SystemParams::validate() const {
  if (!(top_mass > 0.0)) throw std::invalid_argument("top mass must be positive");
  if (!(base_mass > 0.0)) throw std::invalid_argument("base mass must be positive");
  if (std::abs(axis.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("axis must be a unit vector");
  if (inertia.minCoeff() < 0.0)
    throw std::invalid_argument("inertia components must be non-negative");
  if (degenerate) {
    if (inertia.z() != 0.0)
      throw std::invalid_argument("degenerate mode requires I3 = 0");
    if (axis != Vec3::UnitZ())
      throw std::invalid_argument("degenerate mode requires axis = e3");
  }
  if (!std::isfinite(length) || !std::isfinite(gravity))
    throw std::invalid_argument("length and gravity must be finite");
}

MetricTensor::MetricTensor(const SystemParams& params, double translational_mass,
                           bool require_definite)
    : degenerate_(params.degenerate) {
  const Mat3 coupling = params.top_mass * params.length * hat(params.axis);
  Eigen::Matrix<double, 6, 6> full;
  full.topLeftCorner<3, 3>() = params.inertia.asDiagonal();
  full.topRightCorner<3, 3>() = coupling;
  full.bottomLeftCorner<3, 3>() = -coupling;
  full.bottomRightCorner<3, 3>() = translational_mass * Mat3::Identity();

  if (degenerate_) {
    mat_.resize(5, 5);
    int rows[5] = {0, 1, 3, 4, 5};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) mat_(i, j) = full(rows[i], rows[j]);
  } else {
    mat_ = full;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(mat_);
  positive_definite_ = (llt.info() == Eigen::Success);
  if (require_definite && !positive_definite_)
    throw std::invalid_argument("kinetic metric is not positive definite");

  lu_.compute(mat_);
  if (lu_.rcond() < 1e-14)
    throw std::invalid_argument("kinetic metric is numerically singular");
}

MetricTensor MetricTensor::kinetic(const SystemParams& params) {
  return MetricTensor(params, params.total_mass(), true);
}

MetricTensor MetricTensor::shaped(const SystemParams& params, double rho) {
  if (!std::isfinite(rho) || rho == 0.0)
    throw std::invalid_argument("shaping parameter rho must be finite and nonzero");
  return MetricTensor(params, rho, false);
}

Momenta MetricTensor::apply(const Vec3& omega, const Vec3& v) const {
  Momenta out;
  if (degenerate_) {
    Eigen::Matrix<double, 5, 1> vel;
    vel << omega.x(), omega.y(), v;
    const Eigen::Matrix<double, 5, 1> mom = mat_ * vel;
    out.mu = Vec3(mom(0), mom(1), 0.0);
    out.p = mom.tail<3>();
  } else {
    Eigen::Matrix<double, 6, 1> vel;
    vel << omega, v;
    const Eigen::Matrix<double, 6, 1> mom = mat_ * vel;
    out.mu = mom.head<3>();
    out.p = mom.tail<3>();
  }
  return out;
}

void MetricTensor::solve(const Vec3& rhs_mu, const Vec3& rhs_p, Vec3* omega_dot,
                         Vec3* v_dot) const {
  Eigen::VectorXd b(mat_.rows());
  if (degenerate_) {
    b << rhs_mu.x(), rhs_mu.y(), rhs_p;
  } else {
    b << rhs_mu, rhs_p;
  }
  Eigen::VectorXd x = lu_.solve(b);
  x += lu_.solve(b - mat_ * x);
  if (degenerate_) {
    *omega_dot = Vec3(x(0), x(1), 0.0);
    *v_dot = x.tail<3>();
  } else {
    *omega_dot = x.head<3>();
    *v_dot = x.tail<3>();
  }
}

bool ReducedState::finite() const {
  return omega.allFinite() && v.allFinite() && gamma.allFinite() &&
         std::isfinite(height);
}

ReducedState operator+(const ReducedState& a, const ReducedState& b) {
  return {a.omega + b.omega, a.v + b.v, a.gamma + b.gamma, a.height + b.height};
}

ReducedState operator*(double s, const ReducedState& a) {
  return {s * a.omega, s * a.v, s * a.gamma, s * a.height};
}

double kinetic_energy(const SystemParams& params, const Vec3& omega, const Vec3& v) {
  const double rotational = 0.5 * omega.dot(params.inertia.asDiagonal() * omega);
  const double translational = 0.5 * params.total_mass() * v.squaredNorm();
  const double coupling =
      params.top_mass * params.length * v.dot(omega.cross(params.axis));
  return rotational + translational + coupling;
}

double reduced_lagrangian(const SystemParams& params, const ReducedState& s) {
  const double potential =
      params.gravity * (params.top_mass * params.length * params.axis.dot(s.gamma) +
                        params.total_mass() * s.height);
  return kinetic_energy(params, s.omega, s.v) - potential;
}

double extended_lagrangian(const SystemParams& params, const GroupElement& g,
                           const AlgebraElement& xi, const DualVector4& a) {
  // g^T a in the 4x4 representation.
  const Vec3 vec = g.rotation.transpose() * a.vec;
  const double s = g.translation.dot(a.vec) + a.s;
  const double potential =
      params.gravity *
      (params.top_mass * params.length * params.axis.dot(vec) + params.total_mass() * s);
  return kinetic_energy(params, xi.omega, xi.v) - potential;
}

double free_energy(const SystemParams& params, const ReducedState& s) {
  const double potential =
      params.gravity * (params.top_mass * params.length * params.axis.dot(s.gamma) +
                        params.total_mass() * s.height);
  return kinetic_energy(params, s.omega, s.v) + potential;
}

Momenta momenta(const SystemParams& params, const ReducedState& s) {
  return MetricTensor::kinetic(params).apply(s.omega, s.v);
}

EpDynamics::EpDynamics(const SystemParams& params)
    : params_(params), metric_(MetricTensor::kinetic(params)) {
  params_.validate();
}

ReducedState EpDynamics::rhs(const ReducedState& s, const Vec3& u) const {
  const AlgebraElement xi{s.omega, s.v};
  const Momenta m = metric_.apply(s.omega, s.v);
  DualAlgebraElement force = ad_star(xi, {m.mu, m.p});

  const Vector4 dl_dadvected{
      -params_.top_mass * params_.gravity * params_.length * params_.axis,
      -params_.total_mass() * params_.gravity};
  const DualAlgebraElement grav =
      diamond(dl_dadvected, DualVector4{s.gamma, s.height});
  force.mu += grav.mu;
  force.p += grav.p + u;

  ReducedState ds;
  metric_.solve(force.mu, force.p, &ds.omega, &ds.v);
  const DualVector4 advection = lambda_prime_star(xi, {s.gamma, s.height});
  ds.gamma = advection.vec;
  ds.height = advection.s;
  return ds;
}

ReducedState ep_rhs(const SystemParams& params, const ReducedState& s, const Vec3& u) {
  return EpDynamics(params).rhs(s, u);
}

namespace {

// Body velocity at sample position x (in index units) by cubic interpolation
// through four consecutive samples starting at j0.
AlgebraElement interpolate4(const std::vector<AlgebraElement>& xi, int j0, double x) {
  double w[4];
  const double r = x - j0;
  w[0] = -(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0;
  w[1] = r * (r - 2.0) * (r - 3.0) / 2.0;
  w[2] = -r * (r - 1.0) * (r - 3.0) / 2.0;
  w[3] = r * (r - 1.0) * (r - 2.0) / 6.0;
  AlgebraElement out;
  for (int k = 0; k < 4; ++k) {
    out.omega += w[k] * xi[j0 + k].omega;
    out.v += w[k] * xi[j0 + k].v;
  }
  return out;
}

struct PoseDerivative {
  Mat3 r_dot;
  Vec3 y_dot;
};

PoseDerivative pose_rhs(const Mat3& r, const AlgebraElement& xi) {
  return {r * hat(xi.omega), r * xi.v};
}

}  // namespace

std::vector<GroupElement> reconstruct(const std::vector<AlgebraElement>& xi,
                                      double dt, const GroupElement& g0) {
  std::vector<GroupElement> out;
  out.reserve(xi.size());
  out.push_back(g0);
  if (xi.size() < 2) return out;

  const int n = static_cast<int>(xi.size());
  Mat3 r = g0.rotation;
  Vec3 y = g0.translation;
  for (int i = 0; i + 1 < n; ++i) {
    AlgebraElement mid;
    if (n >= 4) {
      int j0 = std::max(0, std::min(i - 1, n - 4));
      mid = interpolate4(xi, j0, i + 0.5);
    } else {
      mid.omega = 0.5 * (xi[i].omega + xi[i + 1].omega);
      mid.v = 0.5 * (xi[i].v + xi[i + 1].v);
    }

    const PoseDerivative k1 = pose_rhs(r, xi[i]);
    const PoseDerivative k2 = pose_rhs(r + 0.5 * dt * k1.r_dot, mid);
    const PoseDerivative k3 = pose_rhs(r + 0.5 * dt * k2.r_dot, mid);
    const PoseDerivative k4 = pose_rhs(r + dt * k3.r_dot, xi[i + 1]);
    y += (dt / 6.0) * (k1.y_dot + 2.0 * k2.y_dot + 2.0 * k3.y_dot + k4.y_dot);
    r += (dt / 6.0) * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot);
    r = polar_orthonormalize(r);
    out.push_back({r, y});
  }
  return out;
}

}  // namespace epmatch
