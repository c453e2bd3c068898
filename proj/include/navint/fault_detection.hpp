#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "navint/interval.hpp"
#include "navint/nav_types.hpp"

namespace navint {

/// Single-track drivetrain parameters for the dynamic plausibility model.
struct VehicleParams {
  double wheelbase_m = 1.0;
  double mass_eff_kg = 20.0;          // includes rotating-inertia equivalent
  double motor_constant_n_per_a = 20.0;
  double drag_c0_n = 1.0;             // dry friction
  double drag_c1 = 1.0;               // N per (m/s)
  double drag_c2 = 0.0;               // N per (m/s)^2

  void validate() const {
    if (!(wheelbase_m > 0.0 && mass_eff_kg > 0.0 && motor_constant_n_per_a > 0.0 &&
          drag_c0_n >= 0.0 && drag_c1 >= 0.0 && drag_c2 >= 0.0)) {
      throw std::invalid_argument("VehicleParams: inconsistent parameters");
    }
  }
};

/// Bounding configuration for the plausibility intervals and the recovery
/// policy of the filter supervisor.
struct FdConfig {
  double n_sigma_d = 6.0;                       // input bounding multiple
  double sigma_current_a = 1.0;
  double sigma_steer_rad = 1.0 * M_PI / 180.0;
  double sigma_speed_mps = 0.1;
  double dwell_s = 5.0;                         // minimum stay on fallback
  int clear_epochs_to_return = 100;             // consecutive clean epochs

  void validate() const {
    if (!(n_sigma_d > 0.0 && sigma_current_a > 0.0 && sigma_steer_rad > 0.0 &&
          sigma_speed_mps > 0.0 && dwell_s >= 0.0 && clear_epochs_to_return >= 1)) {
      throw std::invalid_argument("FdConfig: inconsistent parameters");
    }
  }
};

struct InputIntervals {
  Interval current_a;
  Interval steer_rad;
  Interval speed_mps;
};

/// Widen the measured driver inputs by n_sigma_d of their sensor noise.
inline InputIntervals input_intervals(const ControlSample& ctrl, const FdConfig& cfg) {
  cfg.validate();
  return {Interval::about(ctrl.motor_current_a, cfg.n_sigma_d * cfg.sigma_current_a),
          Interval::about(ctrl.steer_rad, cfg.n_sigma_d * cfg.sigma_steer_rad),
          Interval::about(ctrl.speed_mps, cfg.n_sigma_d * cfg.sigma_speed_mps)};
}

/// Interval extension of sign(v) restricted to forward drag (sign(0) = 0).
inline Interval interval_sign(const Interval& v) {
  const auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
  return {sgn(v.lo), sgn(v.hi)};
}

/// Net longitudinal force: motor thrust minus speed-dependent drag, each
/// term evaluated in interval arithmetic so the result encloses every
/// consistent combination of the bounded inputs.
inline Interval force_model(const Interval& speed, const Interval& current,
                            const VehicleParams& vp) {
  vp.validate();
  const Interval thrust = interval_scale(current, vp.motor_constant_n_per_a);
  const Interval dry = interval_scale(interval_sign(speed), vp.drag_c0_n);
  const Interval linear = interval_scale(speed, vp.drag_c1);
  // v|v| is monotone, so its range comes straight from the endpoints.
  const Interval quadratic = interval_scale(
      Interval{speed.lo * std::abs(speed.lo), speed.hi * std::abs(speed.hi)}, vp.drag_c2);
  return interval_sub(thrust, interval_add(interval_add(dry, linear), quadratic));
}

/// Plausible longitudinal acceleration band implied by the drive inputs.
inline Interval acceleration_threshold(const Interval& speed, const Interval& current,
                                       const VehicleParams& vp) {
  return interval_scale(force_model(speed, current, vp), 1.0 / vp.mass_eff_kg);
}

/// Plausible yaw-rate band from the single-track geometry v tan(delta) / L.
/// The steering interval must stay strictly inside tan's principal domain.
inline Interval yaw_rate_threshold(const Interval& speed, const Interval& steer,
                                   const VehicleParams& vp) {
  vp.validate();
  return interval_scale(interval_mul(speed, interval_tan(steer)), 1.0 / vp.wheelbase_m);
}

struct CompensatedImu {
  double specific_force_x = 0.0;
  double yaw_rate = 0.0;
};

/// Remove the estimated biases from the monitored IMU channels.
inline CompensatedImu compensated_imu(const ImuSample& imu, double accel_bias_x,
                                      double gyro_bias_z) {
  return {imu.specific_force.x() - accel_bias_x, imu.angular_rate.z() - gyro_bias_z};
}

struct FaultFlags {
  bool accel_fault = false;
  bool yaw_fault = false;

  bool any() const { return accel_fault || yaw_fault; }
};

/// A channel is faulty when its compensated measurement falls outside the
/// closed plausibility interval.
inline FaultFlags detect_fault(const CompensatedImu& imu, const Interval& accel_band,
                               const Interval& yaw_band) {
  return {!accel_band.contains(imu.specific_force_x), !yaw_band.contains(imu.yaw_rate)};
}

/// Deterministic filter selection policy: any fault drops to the GNSS-only
/// filter immediately; returning to the inertial filter requires the dwell
/// time to elapse since the last fault and a run of consecutive clean epochs.
class Supervisor {
 public:
  enum class Active { kMain, kFallback };

  struct SwitchEvent {
    double t = 0.0;
    Active to = Active::kMain;
  };

  explicit Supervisor(const FdConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

  Active step(double t, bool fault) {
    if (active_ == Active::kMain) {
      if (fault) {
        active_ = Active::kFallback;
        latch_until_ = t + cfg_.dwell_s;
        clear_run_ = 0;
        events_.push_back({t, Active::kFallback});
      }
    } else {
      if (fault) {
        latch_until_ = std::max(latch_until_, t + cfg_.dwell_s);
        clear_run_ = 0;
      } else if (t >= latch_until_) {
        if (++clear_run_ >= cfg_.clear_epochs_to_return) {
          active_ = Active::kMain;
          clear_run_ = 0;
          events_.push_back({t, Active::kMain});
        }
      }
    }
    return active_;
  }

  Active active() const { return active_; }
  const std::vector<SwitchEvent>& events() const { return events_; }

 private:
  FdConfig cfg_;
  Active active_ = Active::kMain;
  double latch_until_ = 0.0;
  int clear_run_ = 0;
  std::vector<SwitchEvent> events_;
};

}  // namespace navint
