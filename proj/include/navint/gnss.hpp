#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "navint/frames.hpp"
#include "navint/nav_types.hpp"
#include "navint/robust_filter.hpp"

namespace navint {

struct ObservableSigmas {
  double pseudorange_m = 0.0;
  double deltarange_mps = 0.0;
};

/// Carrier-to-noise driven standard deviations: sigma = C * 10^(-cn0/20).
inline ObservableSigmas sigma_epsilon(double cn0_dbhz, double c_rho_m, double c_d_mps) {
  if (!(cn0_dbhz >= 10.0 && cn0_dbhz <= 60.0)) {
    throw std::invalid_argument("sigma_epsilon: carrier-to-noise ratio out of range");
  }
  const double attenuation = std::pow(10.0, -cn0_dbhz / 20.0);
  return {c_rho_m * attenuation, c_d_mps * attenuation};
}

/// Geometric range plus receiver clock bias plus the modelled corrections.
inline double predict_pseudorange(const Eigen::Vector3d& antenna_ecef, double clock_bias_m,
                                  const GnssObservation& obs) {
  const double range = (obs.sat_pos_ecef - antenna_ecef).norm();
  if (!(range > 1000.0)) {
    throw std::invalid_argument("predict_pseudorange: satellite unrealistically close");
  }
  return range + clock_bias_m + obs.correction_sum_m();
}

/// Range rate along the line of sight plus receiver clock drift. Satellite
/// velocity is given in the local frame; the unit line-of-sight vector is
/// rotated into it so everything contracts in one frame.
inline double predict_deltarange(const Eigen::Vector3d& antenna_ecef,
                                 const Eigen::Vector3d& vel_ned, double clock_drift_mps,
                                 const GnssObservation& obs, const LocalFrame& frame) {
  const Eigen::Vector3d los_ecef = obs.sat_pos_ecef - antenna_ecef;
  const double range = los_ecef.norm();
  if (!(range > 1000.0)) {
    throw std::invalid_argument("predict_deltarange: satellite unrealistically close");
  }
  const Eigen::Vector3d u_ned = frame.rotate_ecef_to_ned(los_ecef / range);
  return u_ned.dot(obs.sat_vel_ned - vel_ned) + clock_drift_mps;
}

/// Unit line-of-sight (antenna to satellite) in the local frame.
inline Eigen::Vector3d line_of_sight_ned(const Eigen::Vector3d& antenna_ecef,
                                         const GnssObservation& obs, const LocalFrame& frame) {
  const Eigen::Vector3d los_ecef = obs.sat_pos_ecef - antenna_ecef;
  return frame.rotate_ecef_to_ned(los_ecef.normalized());
}

/// Stacked measurement bundle for the main filter: all pseudoranges first,
/// then all deltaranges. Rows are expressed in the 17-dimensional error
/// space; a pseudorange feels position and clock bias, a deltarange feels
/// velocity, clock drift, and (through the line-of-sight direction swinging
/// with position) a small position term.
inline Measurement assemble_measurement_main(const MainState& s,
                                             const std::vector<GnssObservation>& obs,
                                             const NoiseParams& noise,
                                             const LocalFrame& frame) {
  if (obs.empty()) {
    throw std::invalid_argument("assemble_measurement_main: no observations");
  }
  const int ns = static_cast<int>(obs.size());
  Measurement m;
  m.observed.resize(2 * ns);
  m.predicted.resize(2 * ns);
  m.jacobian = Eigen::MatrixXd::Zero(2 * ns, main_err::kDim);
  m.noise = Eigen::MatrixXd::Zero(2 * ns, 2 * ns);
  for (int i = 0; i < ns; ++i) {
    obs[static_cast<size_t>(i)].validate();
    const auto& o = obs[static_cast<size_t>(i)];
    const double range = (o.sat_pos_ecef - s.pos_ecef).norm();
    const Eigen::Vector3d u = line_of_sight_ned(s.pos_ecef, o, frame);
    const auto sig = sigma_epsilon(o.cn0_dbhz, noise.c_rho_m, noise.c_d_mps);

    m.observed(i) = o.pseudorange_m;
    m.predicted(i) = predict_pseudorange(s.pos_ecef, s.clock_bias_m, o);
    m.jacobian.block<1, 3>(i, main_err::kPos) = -u.transpose();
    m.jacobian(i, main_err::kClockBias) = 1.0;
    m.noise(i, i) = sig.pseudorange_m * sig.pseudorange_m;

    const int j = ns + i;
    m.observed(j) = o.deltarange_mps;
    m.predicted(j) = predict_deltarange(s.pos_ecef, s.vel_ned, s.clock_drift_mps, o, frame);
    const Eigen::Vector3d v_rel = o.sat_vel_ned - s.vel_ned;
    m.jacobian.block<1, 3>(j, main_err::kPos) =
        -((v_rel - u * u.dot(v_rel)) / range).transpose();
    m.jacobian.block<1, 3>(j, main_err::kVel) = -u.transpose();
    m.jacobian(j, main_err::kClockDrift) = 1.0;
    m.noise(j, j) = sig.deltarange_mps * sig.deltarange_mps;
  }
  return m;
}

/// Same structure in the fallback filter's 8-dimensional error space.
inline Measurement assemble_measurement_fallback(const FallbackState& s,
                                                 const std::vector<GnssObservation>& obs,
                                                 const NoiseParams& noise,
                                                 const LocalFrame& frame) {
  if (obs.empty()) {
    throw std::invalid_argument("assemble_measurement_fallback: no observations");
  }
  const int ns = static_cast<int>(obs.size());
  Measurement m;
  m.observed.resize(2 * ns);
  m.predicted.resize(2 * ns);
  m.jacobian = Eigen::MatrixXd::Zero(2 * ns, fallback_err::kDim);
  m.noise = Eigen::MatrixXd::Zero(2 * ns, 2 * ns);
  for (int i = 0; i < ns; ++i) {
    obs[static_cast<size_t>(i)].validate();
    const auto& o = obs[static_cast<size_t>(i)];
    const double range = (o.sat_pos_ecef - s.pos_ecef).norm();
    const Eigen::Vector3d u = line_of_sight_ned(s.pos_ecef, o, frame);
    const auto sig = sigma_epsilon(o.cn0_dbhz, noise.c_rho_m, noise.c_d_mps);

    m.observed(i) = o.pseudorange_m;
    m.predicted(i) = predict_pseudorange(s.pos_ecef, s.clock_bias_m, o);
    m.jacobian.block<1, 3>(i, fallback_err::kPos) = -u.transpose();
    m.jacobian(i, fallback_err::kClockBias) = 1.0;
    m.noise(i, i) = sig.pseudorange_m * sig.pseudorange_m;

    const int j = ns + i;
    m.observed(j) = o.deltarange_mps;
    m.predicted(j) = predict_deltarange(s.pos_ecef, s.vel_ned, s.clock_drift_mps, o, frame);
    const Eigen::Vector3d v_rel = o.sat_vel_ned - s.vel_ned;
    m.jacobian.block<1, 3>(j, fallback_err::kPos) =
        -((v_rel - u * u.dot(v_rel)) / range).transpose();
    m.jacobian.block<1, 3>(j, fallback_err::kVel) = -u.transpose();
    m.jacobian(j, fallback_err::kClockDrift) = 1.0;
    m.noise(j, j) = sig.deltarange_mps * sig.deltarange_mps;
  }
  return m;
}

/// Dilution-of-precision scalar from unit line-of-sight geometry (position
/// plus clock part), used to validate simulated constellations.
inline double position_dop(const Eigen::Vector3d& antenna_ecef,
                           const std::vector<GnssObservation>& obs, const LocalFrame& frame) {
  if (obs.size() < 4) {
    throw std::invalid_argument("position_dop: need at least four satellites");
  }
  Eigen::MatrixXd a(obs.size(), 4);
  for (size_t i = 0; i < obs.size(); ++i) {
    a.block<1, 3>(static_cast<int>(i), 0) =
        -line_of_sight_ned(antenna_ecef, obs[i], frame).transpose();
    a(static_cast<int>(i), 3) = 1.0;
  }
  const Eigen::Matrix4d info = a.transpose() * a;
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(info);
  if (!lu.isInvertible()) {
    return std::numeric_limits<double>::infinity();  // degenerate geometry
  }
  const Eigen::Matrix4d cov = lu.inverse();
  return std::sqrt(cov(0, 0) + cov(1, 1) + cov(2, 2));
}

}  // namespace navint
