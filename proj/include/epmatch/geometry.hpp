#pragma once

#include <Eigen/Dense>

namespace epmatch {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Skew-symmetric matrix of u, so that hat(u) * w == u.cross(w).
Mat3 hat(const Vec3& u);

/// Inverse of hat (takes the skew part as-is, no symmetrization).
Vec3 vee(const Mat3& m);

/// Rigid motion (R, y) acting on R^3 as x -> R x + y.
struct GroupElement {
  Mat3 rotation{Mat3::Identity()};
  Vec3 translation{Vec3::Zero()};

  static GroupElement identity() { return {}; }

  /// Max deviation of R from a proper rotation (orthogonality and det).
  double rotation_defect() const;
};

/// Body velocity (Omega, v): angular velocity and base velocity, body frame.
struct AlgebraElement {
  Vec3 omega{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
};

/// Momentum pair (mu, p): angular and linear momentum, body frame.
struct DualAlgebraElement {
  Vec3 mu{Vec3::Zero()};
  Vec3 p{Vec3::Zero()};
};

/// Element (w, w_scalar) of R^4 split into vector and scalar parts.
struct Vector4 {
  Vec3 vec{Vec3::Zero()};
  double s{0.0};
};

/// Element (a, a_scalar) of the dual of R^4, identified via the dot product.
struct DualVector4 {
  Vec3 vec{Vec3::Zero()};
  double s{0.0};
};

double pairing(const DualVector4& a, const Vector4& w);
double pairing(const DualAlgebraElement& m, const AlgebraElement& xi);

GroupElement group_mul(const GroupElement& g1, const GroupElement& g2);
GroupElement group_inv(const GroupElement& g);

/// Exponential of (Omega, v): Rodrigues rotation plus the closed-form
/// translation map.
GroupElement group_exp(const AlgebraElement& xi);

/// g acting on R^4 as a 4x4 matrix: (R w + w_s y, w_s).
Vector4 act_on_r4(const GroupElement& g, const Vector4& w);

/// Induced action on the dual, g^{-T} a = (R a, -y . (R a) + a_s).
DualVector4 dual_act_on_r4(const GroupElement& g, const DualVector4& a);

/// Infinitesimal action xi w = (Omega x w + w_s v, 0).
Vector4 lambda_prime(const AlgebraElement& xi, const Vector4& w);

/// Dual infinitesimal action xi^T a = (a x Omega, v . a).
DualVector4 lambda_prime_star(const AlgebraElement& xi, const DualVector4& a);

/// Diamond operator, (w, w_s) diamond (a, a_s) = (w x a, w_s a).
DualAlgebraElement diamond(const Vector4& w, const DualVector4& a);

/// Coadjoint action: (mu x Omega + p x v, p x Omega).
DualAlgebraElement ad_star(const AlgebraElement& xi, const DualAlgebraElement& m);

/// Bracket on the rigid-motion algebra:
/// (Omega1 x Omega2, Omega1 x v2 - Omega2 x v1).
AlgebraElement algebra_bracket(const AlgebraElement& x1, const AlgebraElement& x2);

struct SemidirectElementR4 {
  AlgebraElement xi;
  Vector4 w;
};

struct SemidirectElementR3 {
  AlgebraElement xi;
  Vec3 w{Vec3::Zero()};
};

SemidirectElementR4 bracket_semidirect_r4(const SemidirectElementR4& x1,
                                          const SemidirectElementR4& x2);

SemidirectElementR3 bracket_semidirect_r3(const SemidirectElementR3& x1,
                                          const SemidirectElementR3& x2);

/// Nearest rotation matrix in the Frobenius sense (polar factor).
Mat3 polar_orthonormalize(const Mat3& m);

}  // namespace epmatch
