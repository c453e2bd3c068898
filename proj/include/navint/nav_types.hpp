#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "navint/frames.hpp"

namespace navint {

struct ImuSample {
  double t = 0.0;
  Eigen::Vector3d specific_force = Eigen::Vector3d::Zero();  // m/s^2, body frame
  Eigen::Vector3d angular_rate = Eigen::Vector3d::Zero();    // rad/s, body frame
};

/// One satellite's observables at a GNSS epoch. Correction terms (satellite
/// clock, ionosphere, troposphere, multipath) default to zero for a simulated
/// constellation that does not model them.
struct GnssObservation {
  int sat_id = 0;
  Eigen::Vector3d sat_pos_ecef = Eigen::Vector3d::Zero();
  Eigen::Vector3d sat_vel_ned = Eigen::Vector3d::Zero();
  double pseudorange_m = 0.0;
  double deltarange_mps = 0.0;
  double cn0_dbhz = 45.0;
  double sat_clock_m = 0.0;
  double iono_m = 0.0;
  double tropo_m = 0.0;
  double multipath_m = 0.0;

  double correction_sum_m() const { return sat_clock_m + iono_m + tropo_m + multipath_m; }

  void validate() const {
    if (!(cn0_dbhz >= 10.0 && cn0_dbhz <= 60.0)) {
      throw std::invalid_argument("GnssObservation: carrier-to-noise ratio out of range");
    }
    if (!(pseudorange_m > 0.0)) {
      throw std::invalid_argument("GnssObservation: pseudorange must be positive");
    }
  }
};

/// Driver inputs sampled alongside the IMU: motor current, steering angle at
/// the front axle, and measured longitudinal speed.
struct ControlSample {
  double t = 0.0;
  double motor_current_a = 0.0;
  double steer_rad = 0.0;
  double speed_mps = 0.0;
};

/// Full navigation state of the main tightly-coupled filter. Position is the
/// antenna point in earth-fixed coordinates; velocity is in the local frame;
/// attitude maps body vectors into the local frame.
struct MainState {
  Eigen::Vector3d pos_ecef = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel_ned = Eigen::Vector3d::Zero();
  Eigen::Quaterniond att_bn = Eigen::Quaterniond::Identity();
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  double clock_bias_m = 0.0;
  double clock_drift_mps = 0.0;

  static constexpr int kVectorSize = 18;

  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd x(kVectorSize);
    x.segment<3>(0) = pos_ecef;
    x.segment<3>(3) = vel_ned;
    x(6) = att_bn.w();
    x(7) = att_bn.x();
    x(8) = att_bn.y();
    x(9) = att_bn.z();
    x.segment<3>(10) = accel_bias;
    x.segment<3>(13) = gyro_bias;
    x(16) = clock_bias_m;
    x(17) = clock_drift_mps;
    return x;
  }

  static MainState from_vector(const Eigen::VectorXd& x) {
    if (x.size() != kVectorSize) {
      throw std::invalid_argument("MainState: vector must have 18 elements");
    }
    MainState s;
    s.pos_ecef = x.segment<3>(0);
    s.vel_ned = x.segment<3>(3);
    s.att_bn = Eigen::Quaterniond(x(6), x(7), x(8), x(9)).normalized();
    s.accel_bias = x.segment<3>(10);
    s.gyro_bias = x.segment<3>(13);
    s.clock_bias_m = x(16);
    s.clock_drift_mps = x(17);
    return s;
  }
};

/// Reduced state for the aiding-free fallback filter: antenna position,
/// velocity, and the receiver clock pair.
struct FallbackState {
  Eigen::Vector3d pos_ecef = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel_ned = Eigen::Vector3d::Zero();
  double clock_bias_m = 0.0;
  double clock_drift_mps = 0.0;

  static constexpr int kVectorSize = 8;

  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd x(kVectorSize);
    x.segment<3>(0) = pos_ecef;
    x.segment<3>(3) = vel_ned;
    x(6) = clock_bias_m;
    x(7) = clock_drift_mps;
    return x;
  }

  static FallbackState from_vector(const Eigen::VectorXd& x) {
    if (x.size() != kVectorSize) {
      throw std::invalid_argument("FallbackState: vector must have 8 elements");
    }
    FallbackState s;
    s.pos_ecef = x.segment<3>(0);
    s.vel_ned = x.segment<3>(3);
    s.clock_bias_m = x(6);
    s.clock_drift_mps = x(7);
    return s;
  }
};

/// Error-state index layout of the main filter (local-frame position error,
/// velocity error, attitude error angle, sensor biases, receiver clock).
namespace main_err {
constexpr int kPos = 0;
constexpr int kVel = 3;
constexpr int kAtt = 6;
constexpr int kAccelBias = 9;
constexpr int kGyroBias = 12;
constexpr int kClockBias = 15;
constexpr int kClockDrift = 16;
constexpr int kDim = 17;
}  // namespace main_err

namespace fallback_err {
constexpr int kPos = 0;
constexpr int kVel = 3;
constexpr int kClockBias = 6;
constexpr int kClockDrift = 7;
constexpr int kDim = 8;
}  // namespace fallback_err

struct GaussMarkovParams {
  double tau_s = 3600.0;   // correlation time
  double sigma_ss = 0.0;   // steady-state standard deviation
};

/// Stochastic model shared by the estimator and the measurement synthesis:
/// per-sample sensor noise levels, bias dynamics, receiver clock noise, and
/// the initial uncertainty assigned to each state block.
struct NoiseParams {
  // GNSS observable noise scale factors (carrier-to-noise driven).
  double c_rho_m = 60.0;
  double c_d_mps = 2.0;

  // Inertial per-sample noise (at the nominal IMU rate).
  double accel_noise_std = 0.15;          // m/s^2
  double gyro_noise_std = 0.002;          // rad/s

  GaussMarkovParams accel_bias{600.0, 0.1};                    // m/s^2
  GaussMarkovParams gyro_bias{600.0, 0.01 * M_PI / 180.0};     // rad/s

  // Receiver clock: white position-equivalent noise on the bias state and a
  // random walk on the drift state, both per propagation step.
  double clock_bias_noise_m = 0.02;
  double clock_drift_noise_mps = 0.001;

  // Fallback filter pseudo-acceleration density (north, east, down).
  Eigen::Vector3d fallback_accel_sigma{0.3, 0.3, 0.1};  // m/s^2 / sqrt(s)

  // Initial standard deviations.
  Eigen::Vector3d sigma0_pos{0.1, 0.1, 0.2};            // m
  double sigma0_vel = 1.0;                              // m/s
  double sigma0_att_rad = 5.0 * M_PI / 180.0;
  double sigma0_accel_bias = 0.1;                       // m/s^2
  double sigma0_gyro_bias = 0.01 * M_PI / 180.0;        // rad/s
  double sigma0_clock_bias_m = 10.0;
  double sigma0_clock_drift_mps = 10.0;

  void validate() const {
    const bool ok = c_rho_m > 0 && c_d_mps > 0 && accel_noise_std > 0 && gyro_noise_std > 0 &&
                    accel_bias.tau_s > 0 && gyro_bias.tau_s > 0 && accel_bias.sigma_ss >= 0 &&
                    gyro_bias.sigma_ss >= 0 && clock_bias_noise_m > 0 &&
                    clock_drift_noise_mps > 0 && fallback_accel_sigma.minCoeff() > 0 &&
                    sigma0_pos.minCoeff() > 0 && sigma0_vel > 0 && sigma0_att_rad > 0 &&
                    sigma0_accel_bias > 0 && sigma0_gyro_bias > 0 && sigma0_clock_bias_m > 0 &&
                    sigma0_clock_drift_mps > 0;
    if (!ok) {
      throw std::invalid_argument("NoiseParams: all scales must be positive");
    }
  }

  /// Initial error-state covariance of the main filter.
  Eigen::MatrixXd initial_covariance_main() const {
    Eigen::VectorXd d(main_err::kDim);
    d.segment<3>(main_err::kPos) = sigma0_pos;
    d.segment<3>(main_err::kVel).setConstant(sigma0_vel);
    d.segment<3>(main_err::kAtt).setConstant(sigma0_att_rad);
    d.segment<3>(main_err::kAccelBias).setConstant(sigma0_accel_bias);
    d.segment<3>(main_err::kGyroBias).setConstant(sigma0_gyro_bias);
    d(main_err::kClockBias) = sigma0_clock_bias_m;
    d(main_err::kClockDrift) = sigma0_clock_drift_mps;
    return d.cwiseAbs2().asDiagonal();
  }

  Eigen::MatrixXd initial_covariance_fallback() const {
    Eigen::VectorXd d(fallback_err::kDim);
    d.segment<3>(fallback_err::kPos) = sigma0_pos;
    d.segment<3>(fallback_err::kVel).setConstant(sigma0_vel);
    d(fallback_err::kClockBias) = sigma0_clock_bias_m;
    d(fallback_err::kClockDrift) = sigma0_clock_drift_mps;
    return d.cwiseAbs2().asDiagonal();
  }
};

}  // namespace navint
