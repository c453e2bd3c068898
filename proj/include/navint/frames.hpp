#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace navint {

/// Standard gravity, treated as constant over the local operating area.
constexpr double kGravityMps2 = 9.80665;

/// Gravity expressed in the local north-east-down frame (down is positive).
inline Eigen::Vector3d gravity_ned() { return {0.0, 0.0, kGravityMps2}; }

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// Exponential map: rotation vector to unit quaternion.
inline Eigen::Quaterniond quat_from_rotvec(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
    q.normalize();
    return q;
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotvec / angle));
}

/// Logarithm map: unit quaternion to rotation vector (shortest path).
inline Eigen::Vector3d rotvec_from_quat(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) {
    q.coeffs() *= -1.0;
  }
  const Eigen::AngleAxisd aa(q);
  return aa.angle() * aa.axis();
}

/// Right Jacobian of SO(3): relates a perturbation of the rotation vector to
/// the resulting body-frame perturbation of the rotation it generates.
inline Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  const Eigen::Matrix3d w = skew(rotvec);
  if (angle < 1e-6) {
    return Eigen::Matrix3d::Identity() - 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double a2 = angle * angle;
  return Eigen::Matrix3d::Identity() - ((1.0 - std::cos(angle)) / a2) * w +
         ((angle - std::sin(angle)) / (a2 * angle)) * w * w;
}

struct Geodetic {
  double lat_rad = 0.0;
  double lon_rad = 0.0;
  double alt_m = 0.0;
};

/// WGS-84 geodetic coordinates to earth-centred earth-fixed position.
inline Eigen::Vector3d ecef_from_geodetic(const Geodetic& g) {
  constexpr double kSemiMajor = 6378137.0;
  constexpr double kFlattening = 1.0 / 298.257223563;
  const double e2 = kFlattening * (2.0 - kFlattening);
  const double sin_lat = std::sin(g.lat_rad);
  const double cos_lat = std::cos(g.lat_rad);
  const double n = kSemiMajor / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
  return {(n + g.alt_m) * cos_lat * std::cos(g.lon_rad),
          (n + g.alt_m) * cos_lat * std::sin(g.lon_rad),
          (n * (1.0 - e2) + g.alt_m) * sin_lat};
}

/// Rotation taking local north-east-down vectors to earth-fixed vectors at
/// the given geodetic location.
inline Eigen::Matrix3d ecef_from_ned_rotation(const Geodetic& g) {
  const double sl = std::sin(g.lat_rad), cl = std::cos(g.lat_rad);
  const double so = std::sin(g.lon_rad), co = std::cos(g.lon_rad);
  Eigen::Matrix3d c;
  // Columns: north, east, down expressed in the earth-fixed frame.
  c << -sl * co, -so, -cl * co,
       -sl * so,  co, -cl * so,
        cl,      0.0, -sl;
  return c;
}

/// Local-tangent navigation frame anchored at a fixed geodetic origin. The
/// rotation is frozen at the origin (flat-earth assumption over the small
/// operating area), which keeps earth-fixed and local coordinates affinely
/// related and exactly invertible.
class LocalFrame {
 public:
  static LocalFrame from_geodetic(const Geodetic& origin) {
    LocalFrame f;
    f.origin_ecef_ = ecef_from_geodetic(origin);
    f.c_en_ = ecef_from_ned_rotation(origin);
    return f;
  }

  const Eigen::Vector3d& origin_ecef() const { return origin_ecef_; }
  const Eigen::Matrix3d& rotation_ecef_from_ned() const { return c_en_; }

  Eigen::Vector3d ned_from_ecef(const Eigen::Vector3d& p_ecef) const {
    return c_en_.transpose() * (p_ecef - origin_ecef_);
  }
  Eigen::Vector3d ecef_from_ned(const Eigen::Vector3d& p_ned) const {
    return origin_ecef_ + c_en_ * p_ned;
  }
  Eigen::Vector3d rotate_ned_to_ecef(const Eigen::Vector3d& v) const { return c_en_ * v; }
  Eigen::Vector3d rotate_ecef_to_ned(const Eigen::Vector3d& v) const {
    return c_en_.transpose() * v;
  }

 private:
  Eigen::Vector3d origin_ecef_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d c_en_ = Eigen::Matrix3d::Identity();
};

/// Quaternion for a pure yaw (heading) rotation, body to local frame.
inline Eigen::Quaterniond quat_from_yaw(double yaw_rad) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw_rad, Eigen::Vector3d::UnitZ()));
}

/// Heading angle of a body-to-local quaternion (ZYX convention).
inline double yaw_from_quat(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d c = q.toRotationMatrix();
  return std::atan2(c(1, 0), c(0, 0));
}

}  // namespace navint
