#include "epmatch/geometry.hpp"

#include <cmath>

namespace epmatch {

Mat3 hat(const Vec3& u) {
  Mat3 m;
  m << 0.0, -u.z(), u.y(),
       u.z(), 0.0, -u.x(),
       -u.y(), u.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

double GroupElement::rotation_defect() const {
  const Mat3 defect = rotation.transpose() * rotation - Mat3::Identity();
  const double ortho = defect.cwiseAbs().maxCoeff();
  const double det = std::abs(rotation.determinant() - 1.0);
  return std::max(ortho, det);
}

double pairing(const DualVector4& a, const Vector4& w) {
  return a.vec.dot(w.vec) + a.s * w.s;
}

double pairing(const DualAlgebraElement& m, const AlgebraElement& xi) {
  return m.mu.dot(xi.omega) + m.p.dot(xi.v);
}

GroupElement group_mul(const GroupElement& g1, const GroupElement& g2) {
  return {g1.rotation * g2.rotation, g1.rotation * g2.translation + g1.translation};
}

GroupElement group_inv(const GroupElement& g) {
  const Mat3 rt = g.rotation.transpose();
  return {rt, -(rt * g.translation)};
}

GroupElement group_exp(const AlgebraElement& xi) {
  const double theta = xi.omega.norm();
  const Mat3 k = hat(xi.omega);
  const Mat3 k2 = k * k;
  double a, b, c;  // coefficients of K, K^2 in R and V
  if (theta < 1e-8) {
    // series in theta^2, accurate to machine precision below the cutoff
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (1.0 - a) / (theta * theta);
  }
  const Mat3 rot = Mat3::Identity() + a * k + b * k2;
  const Mat3 v_map = Mat3::Identity() + b * k + c * k2;
  return {rot, v_map * xi.v};
}

Vector4 act_on_r4(const GroupElement& g, const Vector4& w) {
  return {g.rotation * w.vec + w.s * g.translation, w.s};
}

DualVector4 dual_act_on_r4(const GroupElement& g, const DualVector4& a) {
  const Vec3 ra = g.rotation * a.vec;
  return {ra, -g.translation.dot(ra) + a.s};
}

Vector4 lambda_prime(const AlgebraElement& xi, const Vector4& w) {
  return {xi.omega.cross(w.vec) + w.s * xi.v, 0.0};
}

DualVector4 lambda_prime_star(const AlgebraElement& xi, const DualVector4& a) {
  return {a.vec.cross(xi.omega), xi.v.dot(a.vec)};
}

DualAlgebraElement diamond(const Vector4& w, const DualVector4& a) {
  return {w.vec.cross(a.vec), w.s * a.vec};
}

DualAlgebraElement ad_star(const AlgebraElement& xi, const DualAlgebraElement& m) {
  return {m.mu.cross(xi.omega) + m.p.cross(xi.v), m.p.cross(xi.omega)};
}

AlgebraElement algebra_bracket(const AlgebraElement& x1, const AlgebraElement& x2) {
  return {x1.omega.cross(x2.omega),
          x1.omega.cross(x2.v) - x2.omega.cross(x1.v)};
}

SemidirectElementR4 bracket_semidirect_r4(const SemidirectElementR4& x1,
                                          const SemidirectElementR4& x2) {
  SemidirectElementR4 out;
  out.xi = algebra_bracket(x1.xi, x2.xi);
  const Vector4 a = lambda_prime(x1.xi, x2.w);
  const Vector4 b = lambda_prime(x2.xi, x1.w);
  out.w = {a.vec - b.vec, 0.0};
  return out;
}

SemidirectElementR3 bracket_semidirect_r3(const SemidirectElementR3& x1,
                                          const SemidirectElementR3& x2) {
  SemidirectElementR3 out;
  out.xi = algebra_bracket(x1.xi, x2.xi);
  out.w = x1.xi.omega.cross(x2.w) - x2.xi.omega.cross(x1.w);
  return out;
}

Mat3 polar_orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace epmatch
