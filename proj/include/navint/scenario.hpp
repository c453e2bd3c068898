#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <json.hpp>

#include "navint/fault_detection.hpp"
#include "navint/frames.hpp"
#include "navint/gnss.hpp"
#include "navint/nav_types.hpp"

namespace navint {

/// One piece of the driven course. A ramp changes speed linearly along a
/// straight line; straights and arcs hold the given speed. Arc sweep is
/// signed: positive turns clockwise when viewed from above (heading angle
/// grows), negative turns the other way.
struct TrajectorySegment {
  enum class Kind { kDwell, kRamp, kStraight, kArc };

  Kind kind = Kind::kDwell;
  double duration_s = 0.0;      // dwell, ramp, straight
  double speed_mps = 0.0;       // straight/arc cruise speed, ramp target speed
  double radius_m = 0.0;        // arc only
  double angle_rad = 0.0;       // arc only, signed sweep

  static TrajectorySegment dwell(double duration_s) {
    TrajectorySegment s;
    s.kind = Kind::kDwell;
    s.duration_s = duration_s;
    return s;
  }
  static TrajectorySegment ramp(double duration_s, double target_speed_mps) {
    TrajectorySegment s;
    s.kind = Kind::kRamp;
    s.duration_s = duration_s;
    s.speed_mps = target_speed_mps;
    return s;
  }
  static TrajectorySegment straight(double duration_s, double speed_mps) {
    TrajectorySegment s;
    s.kind = Kind::kStraight;
    s.duration_s = duration_s;
    s.speed_mps = speed_mps;
    return s;
  }
  static TrajectorySegment arc(double radius_m, double angle_rad, double speed_mps) {
    TrajectorySegment s;
    s.kind = Kind::kArc;
    s.radius_m = radius_m;
    s.angle_rad = angle_rad;
    s.speed_mps = speed_mps;
    s.duration_s = std::abs(angle_rad) * radius_m / speed_mps;
    return s;
  }

  /// Speed the vehicle must carry into this segment (ramps accept any).
  double entry_speed(double previous_exit) const {
    switch (kind) {
      case Kind::kDwell:
        return 0.0;
      case Kind::kRamp:
        return previous_exit;
      default:
        return speed_mps;
    }
  }
  double exit_speed(double previous_exit) const {
    return kind == Kind::kRamp ? speed_mps : entry_speed(previous_exit);
  }
};

struct RatesConfig {
  double imu_hz = 100.0;
  double gnss_hz = 10.0;
  double control_hz = 100.0;
};

/// Receiver clock initial condition for the two-state ramp model.
struct ClockConfig {
  double bias_m = 5.0;
  double drift_mps = 0.5;
};

/// Satellite placement relative to the scenario origin plus its signal
/// strength. Velocity is the value reported in the deltarange observable.
struct SatelliteConfig {
  int id = 0;
  double azimuth_rad = 0.0;
  double elevation_rad = 0.0;
  double range_m = 2.2e7;
  double cn0_dbhz = 40.0;
  Eigen::Vector3d vel_ned = Eigen::Vector3d::Zero();
};

/// Satellite anchor in earth-fixed coordinates, placed along the configured
/// azimuth/elevation direction from the frame origin.
inline Eigen::Vector3d satellite_ecef(const SatelliteConfig& sat, const LocalFrame& frame) {
  const double ce = std::cos(sat.elevation_rad);
  const Eigen::Vector3d u_ned(ce * std::cos(sat.azimuth_rad), ce * std::sin(sat.azimuth_rad),
                              -std::sin(sat.elevation_rad));
  return frame.ecef_from_ned(u_ned * sat.range_m);
}

/// A deviation from nominal operation. Noise bursts corrupt the sensed IMU
/// stream in a time window; the other kinds corrupt only the estimator's
/// initialization or assumed parameters, never the synthesized data.
struct FaultInjection {
  enum class Kind { kImuNoiseBurst, kYawInitError, kParamFalsification };

  Kind kind = Kind::kImuNoiseBurst;
  double start_s = 0.0;
  double stop_s = 0.0;
  double sigma_accel_mps2 = 0.0;
  double sigma_gyro_radps = 0.0;
  double yaw_error_deg = 0.0;
  std::map<std::string, double> overrides;

  static FaultInjection noise_burst(double start_s, double stop_s, double sigma_accel,
                                    double sigma_gyro = 0.0) {
    FaultInjection f;
    f.kind = Kind::kImuNoiseBurst;
    f.start_s = start_s;
    f.stop_s = stop_s;
    f.sigma_accel_mps2 = sigma_accel;
    f.sigma_gyro_radps = sigma_gyro;
    return f;
  }
  static FaultInjection yaw_init_error(double degrees) {
    FaultInjection f;
    f.kind = Kind::kYawInitError;
    f.yaw_error_deg = degrees;
    return f;
  }
  static FaultInjection param_falsification(std::map<std::string, double> overrides) {
    FaultInjection f;
    f.kind = Kind::kParamFalsification;
    f.overrides = std::move(overrides);
    return f;
  }
};

/// Complete, self-contained description of a simulated drive: course, world
/// anchoring, constellation, stochastic models, vehicle, and injected faults.
struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  RatesConfig rates;
  Geodetic origin{50.78 * M_PI / 180.0, 6.08 * M_PI / 180.0, 200.0};
  double initial_yaw_rad = 0.0;
  ClockConfig clock;
  std::vector<TrajectorySegment> segments;
  std::vector<SatelliteConfig> constellation;
  NoiseParams noise;
  VehicleParams vehicle;
  FdConfig fd;
  bool noise_free = false;
  bool bounded_noise = false;
  double bound_sigma = 3.0;
  std::vector<FaultInjection> faults;

  double imu_dt() const { return 1.0 / rates.imu_hz; }

  double duration_s() const {
    double total = 0.0;
    for (const auto& s : segments) {
      total += s.duration_s;
    }
    return total;
  }

  int imu_epochs() const {
    return static_cast<int>(std::llround(duration_s() * rates.imu_hz));
  }

  int gnss_decimation() const {
    return static_cast<int>(std::llround(rates.imu_hz / rates.gnss_hz));
  }

  /// Total heading perturbation the estimator applies at initialization.
  double yaw_init_error_rad() const {
    double total = 0.0;
    for (const auto& f : faults) {
      if (f.kind == FaultInjection::Kind::kYawInitError) {
        total += f.yaw_error_deg * M_PI / 180.0;
      }
    }
    return total;
  }

  /// Parameters the estimator believes in: the configured noise model with
  /// any falsification overrides applied. Synthesis always uses `noise`.
  NoiseParams assumed_noise() const {
    NoiseParams out = noise;
    for (const auto& f : faults) {
      if (f.kind != FaultInjection::Kind::kParamFalsification) {
        continue;
      }
      for (const auto& [key, value] : f.overrides) {
        if (key == "c_rho_m") {
          out.c_rho_m = value;
        } else if (key == "c_d_mps") {
          out.c_d_mps = value;
        } else if (key == "sigma0_pos_n") {
          out.sigma0_pos.x() = value;
        } else if (key == "sigma0_pos_e") {
          out.sigma0_pos.y() = value;
        } else if (key == "sigma0_pos_d") {
          out.sigma0_pos.z() = value;
        } else {
          throw std::invalid_argument("ScenarioConfig: unknown parameter override " + key);
        }
      }
    }
    return out;
  }

  void validate() const {
    noise.validate();
    vehicle.validate();
    fd.validate();
    // The toolkit is designed around one sensor timing: inertial and control
    // streams at 100 Hz with GNSS epochs at 10 Hz. Everything downstream
    // (noise scaling, detector windows, gating) assumes it, so other timings
    // are rejected rather than silently mis-scaled.
    if (rates.imu_hz != 100.0 || rates.gnss_hz != 10.0 || rates.control_hz != 100.0) {
      throw std::invalid_argument(
          "ScenarioConfig: rates must be 100 Hz inertial / 10 Hz GNSS / 100 Hz control");
    }
    if (segments.empty()) {
      throw std::invalid_argument("ScenarioConfig: course has no segments");
    }
    double speed = segments.front().entry_speed(0.0);
    for (const auto& s : segments) {
      switch (s.kind) {
        case TrajectorySegment::Kind::kDwell:
          if (!(s.duration_s > 0.0)) {
            throw std::invalid_argument("ScenarioConfig: dwell needs positive duration");
          }
          break;
        case TrajectorySegment::Kind::kRamp:
          if (!(s.duration_s > 0.0) || s.speed_mps < 0.0) {
            throw std::invalid_argument("ScenarioConfig: ramp needs positive duration");
          }
          break;
        case TrajectorySegment::Kind::kStraight:
          if (!(s.duration_s > 0.0) || !(s.speed_mps > 0.0)) {
            throw std::invalid_argument("ScenarioConfig: straight needs duration and speed");
          }
          break;
        case TrajectorySegment::Kind::kArc:
          if (!(s.radius_m > 0.0) || !(s.speed_mps > 0.0) || s.angle_rad == 0.0) {
            throw std::invalid_argument("ScenarioConfig: arc needs radius, speed, and sweep");
          }
          break;
      }
      if (std::abs(s.entry_speed(speed) - speed) > 1e-9) {
        throw std::invalid_argument("ScenarioConfig: course speed is discontinuous");
      }
      speed = s.exit_speed(speed);
    }
    if (!(duration_s() > 0.0)) {
      throw std::invalid_argument("ScenarioConfig: course duration must be positive");
    }
    if (constellation.size() < 4) {
      throw std::invalid_argument("ScenarioConfig: at least four satellites required");
    }
    std::set<int> ids;
    const LocalFrame frame = LocalFrame::from_geodetic(origin);
    std::vector<GnssObservation> probe;
    for (const auto& sat : constellation) {
      if (!ids.insert(sat.id).second) {
        throw std::invalid_argument("ScenarioConfig: duplicate satellite id");
      }
      if (!(sat.elevation_rad > 0.0 && sat.elevation_rad <= M_PI / 2.0)) {
        throw std::invalid_argument("ScenarioConfig: satellite elevation out of range");
      }
      if (!(sat.range_m >= 1.0e6)) {
        throw std::invalid_argument("ScenarioConfig: satellite range unrealistically short");
      }
      if (!(sat.cn0_dbhz >= 10.0 && sat.cn0_dbhz <= 60.0)) {
        throw std::invalid_argument("ScenarioConfig: carrier-to-noise ratio out of range");
      }
      GnssObservation o;
      o.sat_id = sat.id;
      o.sat_pos_ecef = satellite_ecef(sat, frame);
      o.pseudorange_m = sat.range_m;
      o.cn0_dbhz = sat.cn0_dbhz;
      probe.push_back(o);
    }
    const double pdop = position_dop(frame.origin_ecef(), probe, frame);
    if (!(pdop < 10.0)) {
      throw std::invalid_argument("ScenarioConfig: constellation geometry too weak");
    }
    const double total = duration_s();
    for (const auto& f : faults) {
      switch (f.kind) {
        case FaultInjection::Kind::kImuNoiseBurst:
          if (!(f.start_s >= 0.0 && f.start_s < f.stop_s && f.stop_s <= total)) {
            throw std::invalid_argument("ScenarioConfig: burst window outside the course");
          }
          if (!(f.sigma_accel_mps2 > 0.0 || f.sigma_gyro_radps > 0.0)) {
            throw std::invalid_argument("ScenarioConfig: burst needs a noise level");
          }
          break;
        case FaultInjection::Kind::kYawInitError:
          if (f.yaw_error_deg == 0.0) {
            throw std::invalid_argument("ScenarioConfig: heading fault needs a magnitude");
          }
          break;
        case FaultInjection::Kind::kParamFalsification:
          if (f.overrides.empty()) {
            throw std::invalid_argument("ScenarioConfig: falsification needs overrides");
          }
          break;
      }
    }
    if (!(bound_sigma > 0.0)) {
      throw std::invalid_argument("ScenarioConfig: noise bound multiple must be positive");
    }
    assumed_noise().validate();  // rejects unknown or non-positive overrides
  }
};

/// Reference drive: a short standstill, spin-up, two rounds of a large
/// circle, a counter-rotated small circle, connecting straights, a slow
/// section, and a final stop — 300 seconds in total.
inline ScenarioConfig nominal_scenario() {
  using TS = TrajectorySegment;
  ScenarioConfig cfg;
  cfg.name = "nominal";
  cfg.seed = 20260822;
  cfg.segments = {
      TS::dwell(5.0),
      TS::ramp(5.0, 4.0),
      TS::arc(25.0, 4.0 * M_PI, 4.0),        // two rounds, ~78.5 s
      TS::straight(10.0, 4.0),
      TS::arc(10.0, -2.0 * M_PI, 4.0),       // small counter circle, ~15.7 s
      TS::straight(10.0, 4.0),
      TS::arc(25.0, 2.0 * M_PI, 4.0),        // ~39.3 s
      TS::ramp(4.0, 2.0),
      TS::arc(15.0, -2.0 * M_PI, 2.0),       // slow wide circle, ~47.1 s
      TS::straight(30.0, 2.0),
      TS::ramp(4.0, 4.0),
      TS::arc(20.0, 2.0 * M_PI, 4.0),        // ~31.4 s
      TS::ramp(5.0, 0.0),
  };
  // Pad with a final standstill so the drive lasts exactly 300 s.
  cfg.segments.push_back(TS::dwell(300.0 - cfg.duration_s()));

  cfg.constellation = {
      {1, 0.0, 55.0 * M_PI / 180.0, 2.10e7, 41.5, Eigen::Vector3d::Zero()},
      {2, 45.0 * M_PI / 180.0, 30.0 * M_PI / 180.0, 2.35e7, 39.0, Eigen::Vector3d::Zero()},
      {3, 90.0 * M_PI / 180.0, 45.0 * M_PI / 180.0, 2.20e7, 40.5, Eigen::Vector3d::Zero()},
      {4, 135.0 * M_PI / 180.0, 25.0 * M_PI / 180.0, 2.45e7, 36.0, Eigen::Vector3d::Zero()},
      {5, 180.0 * M_PI / 180.0, 60.0 * M_PI / 180.0, 2.05e7, 41.0, Eigen::Vector3d::Zero()},
      {6, 225.0 * M_PI / 180.0, 35.0 * M_PI / 180.0, 2.30e7, 37.5, Eigen::Vector3d::Zero()},
      {7, 270.0 * M_PI / 180.0, 50.0 * M_PI / 180.0, 2.15e7, 38.0, Eigen::Vector3d::Zero()},
      {8, 315.0 * M_PI / 180.0, 15.0 * M_PI / 180.0, 2.55e7, 30.0, Eigen::Vector3d::Zero()},
  };
  return cfg;
}

/// Hard filter-comparison drive: a sharp launch into repeated tight circles at
/// 0.8 g lateral, with a confident heading prior. An estimator that starts
/// with a wrong heading meets strong specific force before it can correct,
/// which is exactly the regime the comparison sweep settings probe. 180 s.
inline ScenarioConfig sweep_base_scenario() {
  using TS = TrajectorySegment;
  ScenarioConfig cfg = nominal_scenario();
  cfg.name = "sweep-base";
  cfg.noise.sigma0_att_rad = 2.0 * M_PI / 180.0;
  cfg.segments = {
      TS::dwell(2.0),
      TS::ramp(1.25, 8.0),
      TS::arc(8.0, 4.0 * M_PI, 8.0),         // two tight rounds, ~12.6 s
      TS::straight(8.0, 8.0),
      TS::arc(8.0, -4.0 * M_PI, 8.0),
      TS::straight(8.0, 8.0),
      TS::arc(8.0, 4.0 * M_PI, 8.0),
      TS::straight(8.0, 8.0),
      TS::arc(8.0, -4.0 * M_PI, 8.0),
      TS::straight(8.0, 8.0),
      TS::arc(8.0, 4.0 * M_PI, 8.0),
      TS::straight(8.0, 8.0),
      TS::arc(8.0, -4.0 * M_PI, 8.0),
      TS::ramp(4.0, 0.0),
  };
  // Pad with a final standstill so the drive lasts exactly 180 s.
  cfg.segments.push_back(TS::dwell(180.0 - cfg.duration_s()));
  return cfg;
}

/// Short bounded-noise drive for error-set containment checks: every noise
/// draw is truncated at the assumed sigma multiple, so the recursion's
/// modeled bounds genuinely cover all inputs. About 30 s.
inline ScenarioConfig bounded_pl_scenario() {
  using TS = TrajectorySegment;
  ScenarioConfig cfg = nominal_scenario();
  cfg.name = "bounded-pl";
  cfg.segments = {TS::dwell(2.0), TS::ramp(3.0, 4.0), TS::arc(20.0, M_PI, 4.0),
                  TS::straight(9.3, 4.0)};
  cfg.bounded_noise = true;
  cfg.seed = 31;
  return cfg;
}

namespace detail {

inline nlohmann::json segment_to_json(const TrajectorySegment& s) {
  using Kind = TrajectorySegment::Kind;
  nlohmann::json j;
  switch (s.kind) {
    case Kind::kDwell:
      j["type"] = "dwell";
      j["duration_s"] = s.duration_s;
      break;
    case Kind::kRamp:
      j["type"] = "ramp";
      j["duration_s"] = s.duration_s;
      j["target_speed_mps"] = s.speed_mps;
      break;
    case Kind::kStraight:
      j["type"] = "straight";
      j["duration_s"] = s.duration_s;
      j["speed_mps"] = s.speed_mps;
      break;
    case Kind::kArc:
      j["type"] = "arc";
      j["radius_m"] = s.radius_m;
      j["angle_deg"] = s.angle_rad * 180.0 / M_PI;
      j["speed_mps"] = s.speed_mps;
      break;
  }
  return j;
}

inline TrajectorySegment segment_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "dwell") {
    return TrajectorySegment::dwell(j.at("duration_s").get<double>());
  }
  if (type == "ramp") {
    return TrajectorySegment::ramp(j.at("duration_s").get<double>(),
                                   j.at("target_speed_mps").get<double>());
  }
  if (type == "straight") {
    return TrajectorySegment::straight(j.at("duration_s").get<double>(),
                                       j.at("speed_mps").get<double>());
  }
  if (type == "arc") {
    return TrajectorySegment::arc(j.at("radius_m").get<double>(),
                                  j.at("angle_deg").get<double>() * M_PI / 180.0,
                                  j.at("speed_mps").get<double>());
  }
  throw std::invalid_argument("scenario: unknown segment type " + type);
}

inline nlohmann::json fault_to_json(const FaultInjection& f) {
  using Kind = FaultInjection::Kind;
  nlohmann::json j;
  switch (f.kind) {
    case Kind::kImuNoiseBurst:
      j["kind"] = "imu_noise_burst";
      j["start_s"] = f.start_s;
      j["stop_s"] = f.stop_s;
      j["sigma_accel_mps2"] = f.sigma_accel_mps2;
      j["sigma_gyro_radps"] = f.sigma_gyro_radps;
      break;
    case Kind::kYawInitError:
      j["kind"] = "yaw_init_error";
      j["yaw_error_deg"] = f.yaw_error_deg;
      break;
    case Kind::kParamFalsification:
      j["kind"] = "param_falsification";
      j["overrides"] = f.overrides;
      break;
  }
  return j;
}

inline FaultInjection fault_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "imu_noise_burst") {
    return FaultInjection::noise_burst(j.at("start_s").get<double>(),
                                       j.at("stop_s").get<double>(),
                                       j.value("sigma_accel_mps2", 0.0),
                                       j.value("sigma_gyro_radps", 0.0));
  }
  if (kind == "yaw_init_error") {
    return FaultInjection::yaw_init_error(j.at("yaw_error_deg").get<double>());
  }
  if (kind == "param_falsification") {
    return FaultInjection::param_falsification(
        j.at("overrides").get<std::map<std::string, double>>());
  }
  throw std::invalid_argument("scenario: unknown fault kind " + kind);
}

inline nlohmann::json vec3_to_json(const Eigen::Vector3d& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

inline Eigen::Vector3d vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("scenario: expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["rates"] = {{"imu_hz", cfg.rates.imu_hz},
                {"gnss_hz", cfg.rates.gnss_hz},
                {"control_hz", cfg.rates.control_hz}};
  j["origin"] = {{"latitude_deg", cfg.origin.lat_rad * 180.0 / M_PI},
                 {"longitude_deg", cfg.origin.lon_rad * 180.0 / M_PI},
                 {"altitude_m", cfg.origin.alt_m}};
  j["initial_yaw_deg"] = cfg.initial_yaw_rad * 180.0 / M_PI;
  j["clock"] = {{"bias_m", cfg.clock.bias_m}, {"drift_mps", cfg.clock.drift_mps}};
  j["noise_free"] = cfg.noise_free;
  j["bounded_noise"] = cfg.bounded_noise;
  j["bound_sigma"] = cfg.bound_sigma;

  j["trajectory"] = nlohmann::json::array();
  for (const auto& s : cfg.segments) {
    j["trajectory"].push_back(detail::segment_to_json(s));
  }

  j["constellation"] = nlohmann::json::array();
  for (const auto& sat : cfg.constellation) {
    j["constellation"].push_back({{"id", sat.id},
                                  {"azimuth_deg", sat.azimuth_rad * 180.0 / M_PI},
                                  {"elevation_deg", sat.elevation_rad * 180.0 / M_PI},
                                  {"range_m", sat.range_m},
                                  {"cn0_dbhz", sat.cn0_dbhz},
                                  {"velocity_ned_mps", detail::vec3_to_json(sat.vel_ned)}});
  }

  const NoiseParams& np = cfg.noise;
  j["noise"] = {
      {"c_rho_m", np.c_rho_m},
      {"c_d_mps", np.c_d_mps},
      {"accel_noise_std", np.accel_noise_std},
      {"gyro_noise_std", np.gyro_noise_std},
      {"accel_bias", {{"tau_s", np.accel_bias.tau_s}, {"sigma", np.accel_bias.sigma_ss}}},
      {"gyro_bias", {{"tau_s", np.gyro_bias.tau_s}, {"sigma", np.gyro_bias.sigma_ss}}},
      {"clock_bias_noise_m", np.clock_bias_noise_m},
      {"clock_drift_noise_mps", np.clock_drift_noise_mps},
      {"fallback_accel_sigma", detail::vec3_to_json(np.fallback_accel_sigma)},
      {"sigma0_pos", detail::vec3_to_json(np.sigma0_pos)},
      {"sigma0_vel", np.sigma0_vel},
      {"sigma0_att_rad", np.sigma0_att_rad},
      {"sigma0_accel_bias", np.sigma0_accel_bias},
      {"sigma0_gyro_bias", np.sigma0_gyro_bias},
      {"sigma0_clock_bias_m", np.sigma0_clock_bias_m},
      {"sigma0_clock_drift_mps", np.sigma0_clock_drift_mps},
  };

  const VehicleParams& vp = cfg.vehicle;
  j["vehicle"] = {{"wheelbase_m", vp.wheelbase_m},
                  {"mass_eff_kg", vp.mass_eff_kg},
                  {"motor_constant_n_per_a", vp.motor_constant_n_per_a},
                  {"drag_c0_n", vp.drag_c0_n},
                  {"drag_c1", vp.drag_c1},
                  {"drag_c2", vp.drag_c2}};

  j["fd"] = {{"n_sigma_d", cfg.fd.n_sigma_d},
             {"sigma_current_a", cfg.fd.sigma_current_a},
             {"sigma_steer_rad", cfg.fd.sigma_steer_rad},
             {"sigma_speed_mps", cfg.fd.sigma_speed_mps},
             {"dwell_s", cfg.fd.dwell_s},
             {"clear_epochs_to_return", cfg.fd.clear_epochs_to_return}};

  j["faults"] = nlohmann::json::array();
  for (const auto& f : cfg.faults) {
    j["faults"].push_back(detail::fault_to_json(f));
  }
  return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  cfg.name = j.value("name", cfg.name);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("rates")) {
    const auto& r = j.at("rates");
    cfg.rates.imu_hz = r.value("imu_hz", cfg.rates.imu_hz);
    cfg.rates.gnss_hz = r.value("gnss_hz", cfg.rates.gnss_hz);
    cfg.rates.control_hz = r.value("control_hz", cfg.rates.imu_hz);
  }
  if (j.contains("origin")) {
    const auto& o = j.at("origin");
    cfg.origin.lat_rad = o.value("latitude_deg", cfg.origin.lat_rad * 180.0 / M_PI) * M_PI / 180.0;
    cfg.origin.lon_rad = o.value("longitude_deg", cfg.origin.lon_rad * 180.0 / M_PI) * M_PI / 180.0;
    cfg.origin.alt_m = o.value("altitude_m", cfg.origin.alt_m);
  }
  cfg.initial_yaw_rad = j.value("initial_yaw_deg", 0.0) * M_PI / 180.0;
  if (j.contains("clock")) {
    cfg.clock.bias_m = j.at("clock").value("bias_m", cfg.clock.bias_m);
    cfg.clock.drift_mps = j.at("clock").value("drift_mps", cfg.clock.drift_mps);
  }
  cfg.noise_free = j.value("noise_free", false);
  cfg.bounded_noise = j.value("bounded_noise", false);
  cfg.bound_sigma = j.value("bound_sigma", 3.0);

  cfg.segments.clear();
  for (const auto& s : j.at("trajectory")) {
    cfg.segments.push_back(detail::segment_from_json(s));
  }

  cfg.constellation.clear();
  for (const auto& s : j.at("constellation")) {
    SatelliteConfig sat;
    sat.id = s.at("id").get<int>();
    sat.azimuth_rad = s.at("azimuth_deg").get<double>() * M_PI / 180.0;
    sat.elevation_rad = s.at("elevation_deg").get<double>() * M_PI / 180.0;
    sat.range_m = s.at("range_m").get<double>();
    sat.cn0_dbhz = s.at("cn0_dbhz").get<double>();
    if (s.contains("velocity_ned_mps")) {
      sat.vel_ned = detail::vec3_from_json(s.at("velocity_ned_mps"));
    }
    cfg.constellation.push_back(sat);
  }

  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    NoiseParams& np = cfg.noise;
    np.c_rho_m = n.value("c_rho_m", np.c_rho_m);
    np.c_d_mps = n.value("c_d_mps", np.c_d_mps);
    np.accel_noise_std = n.value("accel_noise_std", np.accel_noise_std);
    np.gyro_noise_std = n.value("gyro_noise_std", np.gyro_noise_std);
    if (n.contains("accel_bias")) {
      np.accel_bias.tau_s = n.at("accel_bias").value("tau_s", np.accel_bias.tau_s);
      np.accel_bias.sigma_ss = n.at("accel_bias").value("sigma", np.accel_bias.sigma_ss);
    }
    if (n.contains("gyro_bias")) {
      np.gyro_bias.tau_s = n.at("gyro_bias").value("tau_s", np.gyro_bias.tau_s);
      np.gyro_bias.sigma_ss = n.at("gyro_bias").value("sigma", np.gyro_bias.sigma_ss);
    }
    np.clock_bias_noise_m = n.value("clock_bias_noise_m", np.clock_bias_noise_m);
    np.clock_drift_noise_mps = n.value("clock_drift_noise_mps", np.clock_drift_noise_mps);
    if (n.contains("fallback_accel_sigma")) {
      np.fallback_accel_sigma = detail::vec3_from_json(n.at("fallback_accel_sigma"));
    }
    if (n.contains("sigma0_pos")) {
      np.sigma0_pos = detail::vec3_from_json(n.at("sigma0_pos"));
    }
    np.sigma0_vel = n.value("sigma0_vel", np.sigma0_vel);
    np.sigma0_att_rad = n.value("sigma0_att_rad", np.sigma0_att_rad);
    np.sigma0_accel_bias = n.value("sigma0_accel_bias", np.sigma0_accel_bias);
    np.sigma0_gyro_bias = n.value("sigma0_gyro_bias", np.sigma0_gyro_bias);
    np.sigma0_clock_bias_m = n.value("sigma0_clock_bias_m", np.sigma0_clock_bias_m);
    np.sigma0_clock_drift_mps = n.value("sigma0_clock_drift_mps", np.sigma0_clock_drift_mps);
  }

  if (j.contains("vehicle")) {
    const auto& v = j.at("vehicle");
    cfg.vehicle.wheelbase_m = v.value("wheelbase_m", cfg.vehicle.wheelbase_m);
    cfg.vehicle.mass_eff_kg = v.value("mass_eff_kg", cfg.vehicle.mass_eff_kg);
    cfg.vehicle.motor_constant_n_per_a =
        v.value("motor_constant_n_per_a", cfg.vehicle.motor_constant_n_per_a);
    cfg.vehicle.drag_c0_n = v.value("drag_c0_n", cfg.vehicle.drag_c0_n);
    cfg.vehicle.drag_c1 = v.value("drag_c1", cfg.vehicle.drag_c1);
    cfg.vehicle.drag_c2 = v.value("drag_c2", cfg.vehicle.drag_c2);
  }

  if (j.contains("fd")) {
    const auto& f = j.at("fd");
    cfg.fd.n_sigma_d = f.value("n_sigma_d", cfg.fd.n_sigma_d);
    cfg.fd.sigma_current_a = f.value("sigma_current_a", cfg.fd.sigma_current_a);
    cfg.fd.sigma_steer_rad = f.value("sigma_steer_rad", cfg.fd.sigma_steer_rad);
    cfg.fd.sigma_speed_mps = f.value("sigma_speed_mps", cfg.fd.sigma_speed_mps);
    cfg.fd.dwell_s = f.value("dwell_s", cfg.fd.dwell_s);
    cfg.fd.clear_epochs_to_return =
        f.value("clear_epochs_to_return", cfg.fd.clear_epochs_to_return);
  }

  cfg.faults.clear();
  if (j.contains("faults")) {
    for (const auto& f : j.at("faults")) {
      cfg.faults.push_back(detail::fault_from_json(f));
    }
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_scenario: cannot open " + path);
  }
  nlohmann::json j;
  in >> j;
  ScenarioConfig cfg = scenario_from_json(j);
  cfg.validate();
  return cfg;
}

inline void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_scenario: cannot open " + path);
  }
  out << scenario_to_json(cfg).dump(2) << "\n";
}

}  // namespace navint
