#ifndef PULSEFORGE_QUAT4D_HPP
#define PULSEFORGE_QUAT4D_HPP

// Unit quaternions and isoclinic rotations of R^4.
//
// Storage order is (w, x, y, z) everywhere. A general SO(4) element is the
// product L(q) R(p) of a left-isoclinic and a right-isoclinic matrix; the two
// factors commute.

#include <cmath>

#include <Eigen/Dense>

namespace pulseforge::quat4d {

struct UnitQuaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Eigen::Vector4d as_vector() const { return {w, x, y, z}; }
};

/// Generalized hyperspherical angles. gamma is not clamped to [0, pi]: pulse
/// schedules continue it monotonically for multi-cycle rotations.
struct SphericalAngles {
  double gamma = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

struct Rotation4 {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();

  Eigen::Vector4d apply(const Eigen::Vector4d& v) const { return m * v; }

  friend Rotation4 operator*(const Rotation4& a, const Rotation4& b) { return {a.m * b.m}; }
};

inline UnitQuaternion quat_from_angles(const SphericalAngles& a) {
  const double sg = std::sin(a.gamma);
  const double st = std::sin(a.theta);
  return {std::cos(a.gamma), sg * std::cos(a.theta), sg * st * std::cos(a.phi),
          sg * st * std::sin(a.phi)};
}

inline Rotation4 left_isoclinic(const UnitQuaternion& q) {
  Rotation4 r;
  // clang-format off
  r.m << q.w, -q.x, -q.y, -q.z,
         q.x,  q.w, -q.z,  q.y,
         q.y,  q.z,  q.w, -q.x,
         q.z, -q.y,  q.x,  q.w;
  // clang-format on
  return r;
}

inline Rotation4 right_isoclinic(const UnitQuaternion& p) {
  Rotation4 r;
  // clang-format off
  r.m << p.w, -p.x, -p.y, -p.z,
         p.x,  p.w,  p.z, -p.y,
         p.y, -p.z,  p.w,  p.x,
         p.z,  p.y, -p.x,  p.w;
  // clang-format on
  return r;
}

inline Rotation4 rotation_from_pair(const UnitQuaternion& q, const UnitQuaternion& p) {
  return left_isoclinic(q) * right_isoclinic(p);
}

}  // namespace pulseforge::quat4d

#endif
