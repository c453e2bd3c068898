#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "navint/frames.hpp"
#include "navint/nav_types.hpp"
#include "navint/scenario.hpp"
#include "navint/strapdown.hpp"

namespace navint {

/// Kinematic ground truth at one instant: planar course in the local frame,
/// level attitude, heading along the velocity.
struct TruthSample {
  double t = 0.0;
  Eigen::Vector3d pos_ned = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel_ned = Eigen::Vector3d::Zero();
  double yaw_rad = 0.0;
  double speed_mps = 0.0;
  double accel_long_mps2 = 0.0;
  double yaw_rate_radps = 0.0;
};

inline Eigen::Quaterniond truth_attitude(const TruthSample& s) {
  return quat_from_yaw(s.yaw_rad);
}

/// Closed-form course evaluation. Segments are compiled into a table of
/// entry states once; sampling any time is then O(log segments).
class TruthSampler {
 public:
  explicit TruthSampler(const ScenarioConfig& cfg) {
    double t = 0.0;
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    double yaw = cfg.initial_yaw_rad;
    double speed = cfg.segments.empty() ? 0.0 : cfg.segments.front().entry_speed(0.0);
    for (const auto& seg : cfg.segments) {
      if (std::abs(seg.entry_speed(speed) - speed) > 1e-9) {
        throw std::invalid_argument("TruthSampler: course speed is discontinuous");
      }
      entries_.push_back({seg, t, p, yaw, speed});
      const Entry& e = entries_.back();
      t += seg.duration_s;
      p = position_in(e, seg.duration_s);
      yaw = yaw_in(e, seg.duration_s);
      speed = seg.exit_speed(speed);
    }
    duration_ = t;
    end_ = {TrajectorySegment::dwell(1.0), t, p, yaw, speed};
  }

  double duration_s() const { return duration_; }

  TruthSample at(double t) const {
    t = std::clamp(t, 0.0, duration_);
    const Entry& e = locate(t);
    const double tau = t - e.t0;
    const double yaw = yaw_in(e, tau);
    const double speed = speed_in(e, tau);
    const Eigen::Vector2d pos = position_in(e, tau);

    TruthSample out;
    out.t = t;
    out.pos_ned = {pos.x(), pos.y(), 0.0};
    out.vel_ned = {speed * std::cos(yaw), speed * std::sin(yaw), 0.0};
    out.yaw_rad = yaw;
    out.speed_mps = speed;
    switch (e.seg.kind) {
      case TrajectorySegment::Kind::kRamp:
        out.accel_long_mps2 = (e.seg.speed_mps - e.v0) / e.seg.duration_s;
        break;
      case TrajectorySegment::Kind::kArc:
        out.yaw_rate_radps =
            (e.seg.angle_rad > 0.0 ? 1.0 : -1.0) * e.seg.speed_mps / e.seg.radius_m;
        break;
      default:
        break;
    }
    return out;
  }

 private:
  struct Entry {
    TrajectorySegment seg;
    double t0 = 0.0;
    Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
    double yaw0 = 0.0;
    double v0 = 0.0;
  };

  const Entry& locate(double t) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
      if (t >= it->t0) {
        return *it;
      }
    }
    return entries_.front();
  }

  static Eigen::Vector2d heading(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }
  static Eigen::Vector2d rightward(double yaw) { return {-std::sin(yaw), std::cos(yaw)}; }

  static double yaw_in(const Entry& e, double tau) {
    if (e.seg.kind != TrajectorySegment::Kind::kArc) {
      return e.yaw0;
    }
    const double omega =
        (e.seg.angle_rad > 0.0 ? 1.0 : -1.0) * e.seg.speed_mps / e.seg.radius_m;
    return e.yaw0 + omega * tau;
  }

  static double speed_in(const Entry& e, double tau) {
    switch (e.seg.kind) {
      case TrajectorySegment::Kind::kDwell:
        return 0.0;
      case TrajectorySegment::Kind::kRamp:
        return e.v0 + (e.seg.speed_mps - e.v0) / e.seg.duration_s * tau;
      default:
        return e.seg.speed_mps;
    }
  }

  static Eigen::Vector2d position_in(const Entry& e, double tau) {
    switch (e.seg.kind) {
      case TrajectorySegment::Kind::kDwell:
        return e.p0;
      case TrajectorySegment::Kind::kRamp: {
        const double a = (e.seg.speed_mps - e.v0) / e.seg.duration_s;
        return e.p0 + heading(e.yaw0) * (e.v0 * tau + 0.5 * a * tau * tau);
      }
      case TrajectorySegment::Kind::kStraight:
        return e.p0 + heading(e.yaw0) * (e.seg.speed_mps * tau);
      case TrajectorySegment::Kind::kArc: {
        const double sgn = e.seg.angle_rad > 0.0 ? 1.0 : -1.0;
        const double omega = sgn * e.seg.speed_mps / e.seg.radius_m;
        const Eigen::Vector2d center = e.p0 + sgn * e.seg.radius_m * rightward(e.yaw0);
        return center - sgn * e.seg.radius_m * rightward(e.yaw0 + omega * tau);
      }
    }
    return e.p0;
  }

  std::vector<Entry> entries_;
  Entry end_;
  double duration_ = 0.0;
};

/// Independent, reproducible random substreams derived from one scenario
/// seed, so adding draws to one sensor never shifts another sensor's stream.
namespace rng_stream {
constexpr std::uint64_t kImu = 1;
constexpr std::uint64_t kAccelBias = 2;
constexpr std::uint64_t kGyroBias = 3;
constexpr std::uint64_t kClock = 4;
constexpr std::uint64_t kGnss = 5;
constexpr std::uint64_t kControls = 6;
constexpr std::uint64_t kBurst = 7;
constexpr std::uint64_t kInit = 8;
}  // namespace rng_stream

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t tag) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(tag)));
}

/// Gaussian sampler with optional clamping at a fixed sigma multiple (the
/// bounded-noise mode protection-level containment tests rely on).
class GaussianDraw {
 public:
  GaussianDraw(std::mt19937_64 engine, bool bounded, double bound_sigma)
      : engine_(std::move(engine)), bounded_(bounded), bound_(bound_sigma) {}

  double operator()(double sigma) {
    double x = normal_(engine_) * sigma;
    if (bounded_) {
      x = std::clamp(x, -bound_ * sigma, bound_ * sigma);
    }
    return x;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  bool bounded_;
  double bound_;
};

/// Everything a pipeline run consumes: the truth it is judged against, the
/// bias/clock paths behind the sensed data, and the sensor streams. IMU and
/// control sample k covers the step from epoch k to k+1.
struct SensorStreams {
  std::vector<TruthSample> truth;                  // epochs 0..n
  std::vector<Eigen::Vector3d> accel_bias_truth;   // epochs 0..n
  std::vector<Eigen::Vector3d> gyro_bias_truth;
  std::vector<double> clock_bias_truth;
  std::vector<double> clock_drift_truth;
  std::vector<ImuSample> imu;                      // samples 0..n-1
  std::vector<ControlSample> controls;             // samples 0..n-1
  std::vector<int> gnss_epoch;                     // epoch indices with observations
  std::vector<std::vector<GnssObservation>> gnss;  // parallel to gnss_epoch
};

/// Deterministic synthesis of all streams from one configuration. The IMU is
/// the exact discrete inverse of the strapdown step (per-step velocity and
/// attitude increments), so integrating a noise-free stream re-tracks truth.
inline SensorStreams synthesize(const ScenarioConfig& cfg) {
  cfg.validate();
  const LocalFrame frame = LocalFrame::from_geodetic(cfg.origin);
  const TruthSampler sampler(cfg);
  const double dt = cfg.imu_dt();
  const int n = cfg.imu_epochs();
  const int decim = cfg.gnss_decimation();
  const bool quiet = cfg.noise_free;

  GaussianDraw imu_noise(substream(cfg.seed, rng_stream::kImu), cfg.bounded_noise,
                         cfg.bound_sigma);
  GaussianDraw accel_bias_noise(substream(cfg.seed, rng_stream::kAccelBias), cfg.bounded_noise,
                                cfg.bound_sigma);
  GaussianDraw gyro_bias_noise(substream(cfg.seed, rng_stream::kGyroBias), cfg.bounded_noise,
                               cfg.bound_sigma);
  GaussianDraw clock_noise(substream(cfg.seed, rng_stream::kClock), cfg.bounded_noise,
                           cfg.bound_sigma);
  GaussianDraw gnss_noise(substream(cfg.seed, rng_stream::kGnss), cfg.bounded_noise,
                          cfg.bound_sigma);
  GaussianDraw control_noise(substream(cfg.seed, rng_stream::kControls), false, 0.0);
  GaussianDraw burst_noise(substream(cfg.seed, rng_stream::kBurst), false, 0.0);

  SensorStreams out;
  out.truth.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    out.truth.push_back(sampler.at(k * dt));
  }

  // Bias and clock truth paths, sampled per inertial epoch. The per-step
  // drives match the estimator's process-noise model exactly.
  const NoiseParams& np = cfg.noise;
  const double accel_drive =
      np.accel_bias.sigma_ss * std::sqrt(1.0 - std::exp(-2.0 * dt / np.accel_bias.tau_s));
  const double gyro_drive =
      np.gyro_bias.sigma_ss * std::sqrt(1.0 - std::exp(-2.0 * dt / np.gyro_bias.tau_s));
  Eigen::Vector3d ba = Eigen::Vector3d::Zero();
  Eigen::Vector3d bg = Eigen::Vector3d::Zero();
  if (!quiet) {
    for (int i = 0; i < 3; ++i) {
      ba(i) = accel_bias_noise(np.accel_bias.sigma_ss);
      bg(i) = gyro_bias_noise(np.gyro_bias.sigma_ss);
    }
  }
  double cb = cfg.clock.bias_m;
  double cd = cfg.clock.drift_mps;
  out.accel_bias_truth.reserve(n + 1);
  out.gyro_bias_truth.reserve(n + 1);
  out.clock_bias_truth.reserve(n + 1);
  out.clock_drift_truth.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    out.accel_bias_truth.push_back(ba);
    out.gyro_bias_truth.push_back(bg);
    out.clock_bias_truth.push_back(cb);
    out.clock_drift_truth.push_back(cd);
    if (k == n) {
      break;
    }
    ba = bias_propagate(ba, np.accel_bias.tau_s, dt);
    bg = bias_propagate(bg, np.gyro_bias.tau_s, dt);
    cb += cd * dt;
    if (!quiet) {
      for (int i = 0; i < 3; ++i) {
        ba(i) += accel_bias_noise(accel_drive);
        bg(i) += gyro_bias_noise(gyro_drive);
      }
      cb += clock_noise(np.clock_bias_noise_m);
      cd += clock_noise(np.clock_drift_noise_mps);
    }
  }

  // Sensed IMU: per-step discrete inverse of the strapdown plus bias, noise,
  // and any in-window burst corruption.
  out.imu.reserve(n);
  out.controls.reserve(n);
  for (int k = 0; k < n; ++k) {
    const TruthSample& a = out.truth[static_cast<size_t>(k)];
    const TruthSample& b = out.truth[static_cast<size_t>(k) + 1];
    const Eigen::Quaterniond qa = truth_attitude(a);
    const Eigen::Quaterniond qb = truth_attitude(b);

    ImuSample imu;
    imu.t = k * dt;
    imu.specific_force =
        qa.toRotationMatrix().transpose() * ((b.vel_ned - a.vel_ned) / dt - gravity_ned());
    imu.angular_rate = rotvec_from_quat(qa.conjugate() * qb) / dt;
    imu.specific_force += out.accel_bias_truth[static_cast<size_t>(k)];
    imu.angular_rate += out.gyro_bias_truth[static_cast<size_t>(k)];
    if (!quiet) {
      for (int i = 0; i < 3; ++i) {
        imu.specific_force(i) += imu_noise(np.accel_noise_std);
      }
      for (int i = 0; i < 3; ++i) {
        imu.angular_rate(i) += imu_noise(np.gyro_noise_std);
      }
    }
    for (const auto& f : cfg.faults) {
      if (f.kind != FaultInjection::Kind::kImuNoiseBurst) {
        continue;
      }
      if (imu.t >= f.start_s && imu.t < f.stop_s) {
        if (f.sigma_accel_mps2 > 0.0) {
          for (int i = 0; i < 3; ++i) {
            imu.specific_force(i) += burst_noise(f.sigma_accel_mps2);
          }
        }
        if (f.sigma_gyro_radps > 0.0) {
          for (int i = 0; i < 3; ++i) {
            imu.angular_rate(i) += burst_noise(f.sigma_gyro_radps);
          }
        }
      }
    }
    out.imu.push_back(imu);

    // Controls: closed-form inversion of the vehicle model about the truth.
    const VehicleParams& vp = cfg.vehicle;
    const double drag = vp.drag_c0_n * (a.speed_mps > 0.0 ? 1.0 : 0.0) +
                        vp.drag_c1 * a.speed_mps +
                        vp.drag_c2 * a.speed_mps * std::abs(a.speed_mps);
    ControlSample ctrl;
    ctrl.t = k * dt;
    ctrl.motor_current_a =
        (vp.mass_eff_kg * a.accel_long_mps2 + drag) / vp.motor_constant_n_per_a;
    ctrl.steer_rad = a.speed_mps > 1e-6
                         ? std::atan(vp.wheelbase_m * a.yaw_rate_radps / a.speed_mps)
                         : 0.0;
    ctrl.speed_mps = a.speed_mps;
    if (!quiet) {
      ctrl.motor_current_a += control_noise(cfg.fd.sigma_current_a);
      ctrl.steer_rad += control_noise(cfg.fd.sigma_steer_rad);
      ctrl.speed_mps += control_noise(cfg.fd.sigma_speed_mps);
    }
    out.controls.push_back(ctrl);
  }

  // GNSS observables at the decimated epochs (epoch 0 is initialization).
  std::vector<Eigen::Vector3d> sat_ecef;
  sat_ecef.reserve(cfg.constellation.size());
  for (const auto& sat : cfg.constellation) {
    sat_ecef.push_back(satellite_ecef(sat, frame));
  }
  for (int k = decim; k <= n; k += decim) {
    const TruthSample& s = out.truth[static_cast<size_t>(k)];
    const Eigen::Vector3d antenna = frame.ecef_from_ned(s.pos_ned);
    std::vector<GnssObservation> epoch;
    epoch.reserve(cfg.constellation.size());
    for (size_t i = 0; i < cfg.constellation.size(); ++i) {
      const SatelliteConfig& sat = cfg.constellation[i];
      GnssObservation o;
      o.sat_id = sat.id;
      o.sat_pos_ecef = sat_ecef[i];
      o.sat_vel_ned = sat.vel_ned;
      o.cn0_dbhz = sat.cn0_dbhz;
      const Eigen::Vector3d los = o.sat_pos_ecef - antenna;
      const Eigen::Vector3d u_ned = frame.rotate_ecef_to_ned(los.normalized());
      o.pseudorange_m = los.norm() + out.clock_bias_truth[static_cast<size_t>(k)];
      o.deltarange_mps =
          u_ned.dot(sat.vel_ned - s.vel_ned) + out.clock_drift_truth[static_cast<size_t>(k)];
      if (!quiet) {
        const auto sig = sigma_epsilon(sat.cn0_dbhz, np.c_rho_m, np.c_d_mps);
        o.pseudorange_m += gnss_noise(sig.pseudorange_m);
        o.deltarange_mps += gnss_noise(sig.deltarange_mps);
      }
      epoch.push_back(o);
    }
    out.gnss_epoch.push_back(k);
    out.gnss.push_back(std::move(epoch));
  }
  return out;
}

/// Truth expanded into a full main-filter state at one epoch.
inline MainState main_state_from_truth(const TruthSample& s, const LocalFrame& frame,
                                       const Eigen::Vector3d& accel_bias,
                                       const Eigen::Vector3d& gyro_bias, double clock_bias_m,
                                       double clock_drift_mps) {
  MainState out;
  out.pos_ecef = frame.ecef_from_ned(s.pos_ned);
  out.vel_ned = s.vel_ned;
  out.att_bn = truth_attitude(s);
  out.accel_bias = accel_bias;
  out.gyro_bias = gyro_bias;
  out.clock_bias_m = clock_bias_m;
  out.clock_drift_mps = clock_drift_mps;
  return out;
}

}  // namespace navint
