#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "navint/frames.hpp"
#include "navint/nav_types.hpp"

namespace navint {

/// First-order Gauss-Markov decay over one step (deterministic part only).
inline Eigen::Vector3d bias_propagate(const Eigen::Vector3d& bias, double tau_s, double dt) {
  if (!(tau_s > 0.0)) {
    throw std::invalid_argument("bias_propagate: correlation time must be positive");
  }
  return bias * std::exp(-dt / tau_s);
}

/// Inertial mechanization over one IMU interval: bias-compensated rates drive
/// the attitude through the quaternion exponential, the specific force is
/// rotated with the pre-update attitude and gravity-corrected, position uses
/// the velocity trapezoid, and the clock pair integrates its own ramp.
inline MainState strapdown_propagate(const MainState& s, const ImuSample& imu, double dt,
                                     const LocalFrame& frame, double tau_accel_s,
                                     double tau_gyro_s) {
  if (!(dt > 0.0 && dt <= 0.1)) {
    throw std::invalid_argument("strapdown_propagate: dt must be in (0, 0.1] s");
  }
  MainState out = s;
  const Eigen::Vector3d omega = imu.angular_rate - s.gyro_bias;
  const Eigen::Vector3d force = imu.specific_force - s.accel_bias;

  const Eigen::Vector3d accel_ned = s.att_bn * force + gravity_ned();
  out.vel_ned = s.vel_ned + accel_ned * dt;
  out.pos_ecef = s.pos_ecef + frame.rotate_ned_to_ecef(0.5 * (s.vel_ned + out.vel_ned) * dt);
  out.att_bn = (s.att_bn * quat_from_rotvec(omega * dt)).normalized();
  out.accel_bias = bias_propagate(s.accel_bias, tau_accel_s, dt);
  out.gyro_bias = bias_propagate(s.gyro_bias, tau_gyro_s, dt);
  out.clock_bias_m = s.clock_bias_m + s.clock_drift_mps * dt;
  return out;
}

/// Constant-velocity propagation of the reduced state (no inertial aiding).
inline FallbackState uniform_propagate(const FallbackState& s, double dt,
                                       const LocalFrame& frame) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("uniform_propagate: dt must be positive");
  }
  FallbackState out = s;
  out.pos_ecef = s.pos_ecef + frame.rotate_ned_to_ecef(s.vel_ned * dt);
  out.clock_bias_m = s.clock_bias_m + s.clock_drift_mps * dt;
  return out;
}

struct BodyKinematics {
  Eigen::Vector3d pos_ecef = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel_ned = Eigen::Vector3d::Zero();
};

/// Antenna-referenced position/velocity to the body reference point, given
/// the lever arm from body origin to antenna in body coordinates. The
/// velocity term removes the rotation-induced component omega x L.
inline BodyKinematics lever_arm_transform(const MainState& s, const Eigen::Vector3d& gyro_rate,
                                          const Eigen::Vector3d& lever_arm_b,
                                          const LocalFrame& frame) {
  const Eigen::Vector3d omega = gyro_rate - s.gyro_bias;
  BodyKinematics out;
  const Eigen::Vector3d arm_ned = s.att_bn * lever_arm_b;
  out.pos_ecef = s.pos_ecef - frame.rotate_ned_to_ecef(arm_ned);
  out.vel_ned = s.vel_ned - s.att_bn * omega.cross(lever_arm_b);
  return out;
}

}  // namespace navint
