#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "navint/frames.hpp"
#include "navint/nav_types.hpp"
#include "navint/robust_filter.hpp"
#include "navint/strapdown.hpp"

namespace navint {

/// Pack an IMU sample as the 6-vector input consumed by the main model.
inline Eigen::VectorXd imu_input(const ImuSample& imu) {
  Eigen::VectorXd u(6);
  u.segment<3>(0) = imu.specific_force;
  u.segment<3>(3) = imu.angular_rate;
  return u;
}

inline ImuSample imu_from_input(const Eigen::VectorXd& u, double t = 0.0) {
  if (u.size() != 6) {
    throw std::invalid_argument("imu_from_input: expected 6 elements");
  }
  ImuSample s;
  s.t = t;
  s.specific_force = u.segment<3>(0);
  s.angular_rate = u.segment<3>(3);
  return s;
}

/// Error-space difference a minus b for the main state: local-frame position
/// and velocity deltas, the left attitude error angle, bias and clock deltas.
inline Eigen::VectorXd local_error_main(const MainState& a, const MainState& b,
                                        const LocalFrame& frame) {
  Eigen::VectorXd e(main_err::kDim);
  e.segment<3>(main_err::kPos) = frame.rotate_ecef_to_ned(a.pos_ecef - b.pos_ecef);
  e.segment<3>(main_err::kVel) = a.vel_ned - b.vel_ned;
  e.segment<3>(main_err::kAtt) = rotvec_from_quat(a.att_bn * b.att_bn.conjugate());
  e.segment<3>(main_err::kAccelBias) = a.accel_bias - b.accel_bias;
  e.segment<3>(main_err::kGyroBias) = a.gyro_bias - b.gyro_bias;
  e(main_err::kClockBias) = a.clock_bias_m - b.clock_bias_m;
  e(main_err::kClockDrift) = a.clock_drift_mps - b.clock_drift_mps;
  return e;
}

inline Eigen::VectorXd local_error_fallback(const FallbackState& a, const FallbackState& b,
                                            const LocalFrame& frame) {
  Eigen::VectorXd e(fallback_err::kDim);
  e.segment<3>(fallback_err::kPos) = frame.rotate_ecef_to_ned(a.pos_ecef - b.pos_ecef);
  e.segment<3>(fallback_err::kVel) = a.vel_ned - b.vel_ned;
  e(fallback_err::kClockBias) = a.clock_bias_m - b.clock_bias_m;
  e(fallback_err::kClockDrift) = a.clock_drift_mps - b.clock_drift_mps;
  return e;
}

/// Apply an error-space correction to the main state. Position corrections
/// are local-frame, attitude corrections are left rotation-vector updates.
inline MainState retract_main(const MainState& s, const Eigen::VectorXd& delta,
                              const LocalFrame& frame) {
  if (delta.size() != main_err::kDim) {
    throw std::invalid_argument("retract_main: expected 17 elements");
  }
  MainState out = s;
  out.pos_ecef += frame.rotate_ned_to_ecef(delta.segment<3>(main_err::kPos));
  out.vel_ned += delta.segment<3>(main_err::kVel);
  out.att_bn = (quat_from_rotvec(delta.segment<3>(main_err::kAtt)) * s.att_bn).normalized();
  out.accel_bias += delta.segment<3>(main_err::kAccelBias);
  out.gyro_bias += delta.segment<3>(main_err::kGyroBias);
  out.clock_bias_m += delta(main_err::kClockBias);
  out.clock_drift_mps += delta(main_err::kClockDrift);
  return out;
}

inline FallbackState retract_fallback(const FallbackState& s, const Eigen::VectorXd& delta,
                                      const LocalFrame& frame) {
  if (delta.size() != fallback_err::kDim) {
    throw std::invalid_argument("retract_fallback: expected 8 elements");
  }
  FallbackState out = s;
  out.pos_ecef += frame.rotate_ned_to_ecef(delta.segment<3>(fallback_err::kPos));
  out.vel_ned += delta.segment<3>(fallback_err::kVel);
  out.clock_bias_m += delta(fallback_err::kClockBias);
  out.clock_drift_mps += delta(fallback_err::kClockDrift);
  return out;
}

/// Discrete error-state transition and noise-injection Jacobians of the
/// strapdown step. C is the pre-update body-to-local rotation; attitude noise
/// enters through the post-update rotation and the exponential's right
/// Jacobian, matching the quaternion-increment convention exactly.
inline void main_error_jacobians(const MainState& s, const ImuSample& imu, double dt,
                                 const NoiseParams& np, Eigen::MatrixXd& f_jac,
                                 Eigen::MatrixXd& g_jac) {
  using namespace main_err;
  const Eigen::Matrix3d c = s.att_bn.toRotationMatrix();
  const Eigen::Vector3d omega = imu.angular_rate - s.gyro_bias;
  const Eigen::Vector3d force = imu.specific_force - s.accel_bias;
  const Eigen::Matrix3d force_skew = skew(c * force);
  const Eigen::Matrix3d c_post =
      (s.att_bn * quat_from_rotvec(omega * dt)).toRotationMatrix();
  const Eigen::Matrix3d att_gain = c_post * so3_right_jacobian(omega * dt) * dt;
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();

  f_jac = Eigen::MatrixXd::Identity(kDim, kDim);
  f_jac.block<3, 3>(kPos, kVel) = eye * dt;
  f_jac.block<3, 3>(kPos, kAtt) = -force_skew * (0.5 * dt * dt);
  f_jac.block<3, 3>(kPos, kAccelBias) = -c * (0.5 * dt * dt);
  f_jac.block<3, 3>(kVel, kAtt) = -force_skew * dt;
  f_jac.block<3, 3>(kVel, kAccelBias) = -c * dt;
  f_jac.block<3, 3>(kAtt, kGyroBias) = -att_gain;
  f_jac.block<3, 3>(kAccelBias, kAccelBias) = eye * std::exp(-dt / np.accel_bias.tau_s);
  f_jac.block<3, 3>(kGyroBias, kGyroBias) = eye * std::exp(-dt / np.gyro_bias.tau_s);
  f_jac(kClockBias, kClockDrift) = dt;

  // Noise order: accel white, gyro white, accel-bias drive, gyro-bias drive,
  // clock-bias white, clock-drift walk.
  g_jac = Eigen::MatrixXd::Zero(kDim, 14);
  g_jac.block<3, 3>(kPos, 0) = c * (0.5 * dt * dt);
  g_jac.block<3, 3>(kVel, 0) = c * dt;
  g_jac.block<3, 3>(kAtt, 3) = att_gain;
  g_jac.block<3, 3>(kAccelBias, 6) = eye;
  g_jac.block<3, 3>(kGyroBias, 9) = eye;
  g_jac(kClockBias, 12) = 1.0;
  g_jac(kClockDrift, 13) = 1.0;
}

/// Per-step process noise of the main model. Sensor noise is per sample at
/// the configured IMU rate; bias drives use the exact discrete first-order
/// Gauss-Markov variance.
inline Eigen::MatrixXd main_process_noise(const NoiseParams& np, double dt) {
  Eigen::VectorXd d(14);
  d.segment<3>(0).setConstant(np.accel_noise_std * np.accel_noise_std);
  d.segment<3>(3).setConstant(np.gyro_noise_std * np.gyro_noise_std);
  const double acc_drive =
      np.accel_bias.sigma_ss * np.accel_bias.sigma_ss *
      (1.0 - std::exp(-2.0 * dt / np.accel_bias.tau_s));
  const double gyr_drive =
      np.gyro_bias.sigma_ss * np.gyro_bias.sigma_ss *
      (1.0 - std::exp(-2.0 * dt / np.gyro_bias.tau_s));
  d.segment<3>(6).setConstant(acc_drive);
  d.segment<3>(9).setConstant(gyr_drive);
  d(12) = np.clock_bias_noise_m * np.clock_bias_noise_m;
  d(13) = np.clock_drift_noise_mps * np.clock_drift_noise_mps;
  return d.asDiagonal();
}

inline void fallback_error_jacobians(double dt, Eigen::MatrixXd& f_jac,
                                     Eigen::MatrixXd& g_jac) {
  using namespace fallback_err;
  f_jac = Eigen::MatrixXd::Identity(kDim, kDim);
  f_jac.block<3, 3>(kPos, kVel) = Eigen::Matrix3d::Identity() * dt;
  f_jac(kClockBias, kClockDrift) = dt;

  // Noise order: pseudo-acceleration (local frame), clock-bias white,
  // clock-drift walk.
  g_jac = Eigen::MatrixXd::Zero(kDim, 5);
  g_jac.block<3, 3>(kPos, 0) = Eigen::Matrix3d::Identity() * (0.5 * dt * dt);
  g_jac.block<3, 3>(kVel, 0) = Eigen::Matrix3d::Identity() * dt;
  g_jac(kClockBias, 3) = 1.0;
  g_jac(kClockDrift, 4) = 1.0;
}

/// The fallback pseudo-acceleration is a density (variance grows linearly in
/// time), so the per-step variance divides by dt.
inline Eigen::MatrixXd fallback_process_noise(const NoiseParams& np, double dt) {
  Eigen::VectorXd d(5);
  d.segment<3>(0) = np.fallback_accel_sigma.cwiseAbs2() / dt;
  d(3) = np.clock_bias_noise_m * np.clock_bias_noise_m;
  d(4) = np.clock_drift_noise_mps * np.clock_drift_noise_mps;
  return d.asDiagonal();
}

/// Tightly-coupled inertial model wired for the filter core.
inline FilterModel make_main_model(const LocalFrame& frame, const NoiseParams& np) {
  FilterModel m;
  m.state_dim = MainState::kVectorSize;
  m.error_dim = main_err::kDim;
  m.noise_dim = 14;
  m.predict = [frame, np](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt) {
    const MainState s = MainState::from_vector(x);
    return strapdown_propagate(s, imu_from_input(u), dt, frame, np.accel_bias.tau_s,
                               np.gyro_bias.tau_s)
        .to_vector();
  };
  m.jacobians = [np](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt,
                     Eigen::MatrixXd& f, Eigen::MatrixXd& g) {
    main_error_jacobians(MainState::from_vector(x), imu_from_input(u), dt, np, f, g);
  };
  m.process_noise = [np](double dt) { return main_process_noise(np, dt); };
  m.retract = [frame](const Eigen::VectorXd& x, const Eigen::VectorXd& delta) {
    return retract_main(MainState::from_vector(x), delta, frame).to_vector();
  };
  m.predict_noisy = [frame, np](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& w, double dt) {
    if (w.size() != 14) {
      throw std::invalid_argument("main predict_noisy: expected 14 disturbances");
    }
    ImuSample imu = imu_from_input(u);
    imu.specific_force += w.segment<3>(0);
    imu.angular_rate += w.segment<3>(3);
    MainState s = strapdown_propagate(MainState::from_vector(x), imu, dt, frame,
                                      np.accel_bias.tau_s, np.gyro_bias.tau_s);
    s.accel_bias += w.segment<3>(6);
    s.gyro_bias += w.segment<3>(9);
    s.clock_bias_m += w(12);
    s.clock_drift_mps += w(13);
    return s.to_vector();
  };
  return m;
}

/// Constant-velocity model for GNSS-only operation.
inline FilterModel make_fallback_model(const LocalFrame& frame, const NoiseParams& np) {
  FilterModel m;
  m.state_dim = FallbackState::kVectorSize;
  m.error_dim = fallback_err::kDim;
  m.noise_dim = 5;
  m.predict = [frame](const Eigen::VectorXd& x, const Eigen::VectorXd&, double dt) {
    return uniform_propagate(FallbackState::from_vector(x), dt, frame).to_vector();
  };
  m.jacobians = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double dt,
                   Eigen::MatrixXd& f, Eigen::MatrixXd& g) {
    fallback_error_jacobians(dt, f, g);
  };
  m.process_noise = [np](double dt) { return fallback_process_noise(np, dt); };
  m.retract = [frame](const Eigen::VectorXd& x, const Eigen::VectorXd& delta) {
    return retract_fallback(FallbackState::from_vector(x), delta, frame).to_vector();
  };
  m.predict_noisy = [frame](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                            const Eigen::VectorXd& w, double dt) {
    if (w.size() != 5) {
      throw std::invalid_argument("fallback predict_noisy: expected 5 disturbances");
    }
    FallbackState s = FallbackState::from_vector(x);
    s.pos_ecef += frame.rotate_ned_to_ecef(s.vel_ned * dt + w.segment<3>(0) * (0.5 * dt * dt));
    s.vel_ned += w.segment<3>(0) * dt;
    s.clock_bias_m += s.clock_drift_mps * dt + w(3);
    s.clock_drift_mps += w(4);
    return s.to_vector();
  };
  return m;
}

}  // namespace navint
