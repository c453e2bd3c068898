#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "navint/simulator.hpp"

namespace {

using namespace navint;

constexpr double kExactTol = 1e-12;
constexpr double kGeomTol = 1e-6;
constexpr double kDriftTolM = 0.1;      // strapdown round-trip bound
constexpr double kStatTol = 0.05;       // relative tolerance on sample moments

ScenarioConfig make_scenario(std::vector<TrajectorySegment> segments) {
  ScenarioConfig cfg = nominal_scenario();
  cfg.segments = std::move(segments);
  return cfg;
}

TEST(TruthSampler, CircleHasCircularMotionRates) {
  using TS = TrajectorySegment;
  const auto cfg = make_scenario({TS::arc(20.0, 2.0 * M_PI, 4.0)});
  const TruthSampler sampler(cfg);

  const TruthSample mid = sampler.at(10.0);
  EXPECT_NEAR(mid.yaw_rate_radps, 0.2, kExactTol);
  EXPECT_NEAR(mid.speed_mps, 4.0, kExactTol);
  EXPECT_NEAR(mid.accel_long_mps2, 0.0, kExactTol);

  // Lateral acceleration v^2/R from the velocity derivative.
  const double h = 1e-5;
  const Eigen::Vector3d accel =
      (sampler.at(10.0 + h).vel_ned - sampler.at(10.0 - h).vel_ned) / (2.0 * h);
  EXPECT_NEAR(accel.norm(), 4.0 * 4.0 / 20.0, 1e-4);

  // Every point sits on the circle of radius R around the arc center.
  const Eigen::Vector2d center(0.0, 20.0);  // initial heading north, turning right
  for (double t = 0.0; t < sampler.duration_s(); t += 3.7) {
    const TruthSample s = sampler.at(t);
    EXPECT_NEAR((s.pos_ned.head<2>() - center).norm(), 20.0, kGeomTol);
  }
}

TEST(TruthSampler, StraightIsUnaccelerated) {
  using TS = TrajectorySegment;
  const auto cfg = make_scenario({TS::straight(10.0, 3.0)});
  const TruthSampler sampler(cfg);
  const TruthSample s = sampler.at(4.0);
  EXPECT_NEAR(s.accel_long_mps2, 0.0, kExactTol);
  EXPECT_NEAR(s.yaw_rate_radps, 0.0, kExactTol);
  EXPECT_NEAR(s.pos_ned.x(), 12.0, kGeomTol);  // heading north from the origin
  EXPECT_NEAR(s.pos_ned.y(), 0.0, kGeomTol);
  EXPECT_NEAR(s.vel_ned.x(), 3.0, kExactTol);
}

TEST(TruthSampler, RampIsConstantAcceleration) {
  using TS = TrajectorySegment;
  const auto cfg = make_scenario({TS::ramp(5.0, 4.0)});
  const TruthSampler sampler(cfg);
  EXPECT_NEAR(sampler.at(2.5).accel_long_mps2, 0.8, kExactTol);
  EXPECT_NEAR(sampler.at(2.5).speed_mps, 2.0, kExactTol);
  EXPECT_NEAR(sampler.at(5.0).pos_ned.x(), 10.0, kGeomTol);
}

TEST(TruthSampler, ClosedTwoCircleCourseReturnsToStart) {
  using TS = TrajectorySegment;
  const auto cfg = make_scenario(
      {TS::arc(20.0, 2.0 * M_PI, 4.0), TS::arc(20.0, 2.0 * M_PI, 4.0)});
  const TruthSampler sampler(cfg);
  const TruthSample end = sampler.at(sampler.duration_s());
  EXPECT_LT(end.pos_ned.norm(), 1e-6);
  EXPECT_NEAR(std::cos(end.yaw_rad), 1.0, kGeomTol);
  EXPECT_NEAR(std::sin(end.yaw_rad), 0.0, kGeomTol);
}

TEST(TruthSampler, RejectsSpeedDiscontinuity) {
  using TS = TrajectorySegment;
  const auto cfg = make_scenario({TS::dwell(2.0), TS::straight(5.0, 4.0)});
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(TruthSampler{cfg}, std::invalid_argument);
}

TEST(Simulator, StationaryImuMeasuresGravityOnly) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(5.0)});
  cfg.noise_free = true;
  const SensorStreams streams = synthesize(cfg);
  ASSERT_EQ(streams.imu.size(), 500u);
  for (const auto& s : streams.imu) {
    EXPECT_NEAR(s.specific_force.x(), 0.0, kExactTol);
    EXPECT_NEAR(s.specific_force.y(), 0.0, kExactTol);
    EXPECT_NEAR(s.specific_force.z(), -kGravityMps2, kExactTol);
    EXPECT_NEAR(s.angular_rate.norm(), 0.0, kExactTol);
  }
}

TEST(Simulator, ZeroNoiseStrapdownRetracksTruth) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::ramp(5.0, 4.0), TS::arc(20.0, 1.5 * M_PI, 4.0),
                            TS::straight(5.0, 4.0), TS::arc(15.0, -M_PI, 4.0),
                            TS::straight(15.0, 4.0)});
  cfg.noise_free = true;
  ASSERT_GT(cfg.duration_s(), 55.0);
  const SensorStreams streams = synthesize(cfg);
  const LocalFrame frame = LocalFrame::from_geodetic(cfg.origin);

  MainState s = main_state_from_truth(streams.truth.front(), frame, Eigen::Vector3d::Zero(),
                                      Eigen::Vector3d::Zero(), 0.0, 0.0);
  const double dt = cfg.imu_dt();
  double worst_pos = 0.0;
  double worst_vel = 0.0;
  for (size_t k = 0; k < streams.imu.size(); ++k) {
    s = strapdown_propagate(s, streams.imu[k], dt, frame, cfg.noise.accel_bias.tau_s,
                            cfg.noise.gyro_bias.tau_s);
    const TruthSample& ref = streams.truth[k + 1];
    worst_pos = std::max(worst_pos, (frame.ned_from_ecef(s.pos_ecef) - ref.pos_ned).norm());
    worst_vel = std::max(worst_vel, (s.vel_ned - ref.vel_ned).norm());
  }
  EXPECT_LT(worst_pos, kDriftTolM);
  EXPECT_LT(worst_vel, 1e-9);  // velocity increments invert exactly
}

TEST(Simulator, ImuNoiseVarianceMatchesConfig) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(1000.0)});
  const SensorStreams streams = synthesize(cfg);
  ASSERT_EQ(streams.imu.size(), 100000u);

  double accel_sq = 0.0;
  double gyro_sq = 0.0;
  for (size_t k = 0; k < streams.imu.size(); ++k) {
    const Eigen::Vector3d accel_noise = streams.imu[k].specific_force -
                                        Eigen::Vector3d(0.0, 0.0, -kGravityMps2) -
                                        streams.accel_bias_truth[k];
    const Eigen::Vector3d gyro_noise = streams.imu[k].angular_rate - streams.gyro_bias_truth[k];
    accel_sq += accel_noise.squaredNorm();
    gyro_sq += gyro_noise.squaredNorm();
  }
  const double accel_var = accel_sq / (3.0 * static_cast<double>(streams.imu.size()));
  const double gyro_var = gyro_sq / (3.0 * static_cast<double>(streams.imu.size()));
  EXPECT_NEAR(accel_var, 0.15 * 0.15, kStatTol * 0.15 * 0.15);
  EXPECT_NEAR(gyro_var, 0.002 * 0.002, kStatTol * 0.002 * 0.002);
}

TEST(Simulator, ZeroNoiseGnssMatchesGeometryAndClock) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(2.0)});
  cfg.noise_free = true;
  cfg.clock.bias_m = 5.0;
  cfg.clock.drift_mps = 0.25;
  const SensorStreams streams = synthesize(cfg);
  const LocalFrame frame = LocalFrame::from_geodetic(cfg.origin);
  ASSERT_EQ(streams.gnss.size(), 20u);

  for (size_t e = 0; e < streams.gnss.size(); ++e) {
    const int k = streams.gnss_epoch[e];
    const double t = k * cfg.imu_dt();
    for (const auto& obs : streams.gnss[e]) {
      const double range = (obs.sat_pos_ecef - frame.origin_ecef()).norm();
      EXPECT_NEAR(obs.pseudorange_m - range, 5.0 + 0.25 * t, kGeomTol);
      EXPECT_NEAR(obs.deltarange_mps, 0.25, kGeomTol);
    }
  }
}

TEST(Simulator, GnssNoiseStdMatchesSigmaEpsilon) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(1000.0)});
  const SensorStreams streams = synthesize(cfg);
  const LocalFrame frame = LocalFrame::from_geodetic(cfg.origin);
  ASSERT_EQ(streams.gnss.size(), 10000u);

  for (size_t sat = 0; sat < cfg.constellation.size(); ++sat) {
    double sq = 0.0;
    for (size_t e = 0; e < streams.gnss.size(); ++e) {
      const auto& obs = streams.gnss[e][sat];
      const double range = (obs.sat_pos_ecef - frame.origin_ecef()).norm();
      const double residual = obs.pseudorange_m - range -
                              streams.clock_bias_truth[static_cast<size_t>(streams.gnss_epoch[e])];
      sq += residual * residual;
    }
    const double got = std::sqrt(sq / static_cast<double>(streams.gnss.size()));
    const double want =
        sigma_epsilon(cfg.constellation[sat].cn0_dbhz, cfg.noise.c_rho_m, cfg.noise.c_d_mps)
            .pseudorange_m;
    EXPECT_NEAR(got, want, kStatTol * want);
  }
}

TEST(Simulator, ControlsInvertVehicleModel) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::arc(5.0, 2.0 * M_PI, 2.0)});
  cfg.noise_free = true;
  const SensorStreams streams = synthesize(cfg);

  // Single-track inversion at v = 2 m/s, yaw rate 0.4 rad/s, L = 1 m.
  const double want_steer = std::atan(0.2);
  // Cruise current balances drag only: (c0 + c1 v) / k_m.
  const double want_current = (1.0 + 1.0 * 2.0) / 20.0;
  for (const auto& c : streams.controls) {
    EXPECT_NEAR(c.steer_rad, want_steer, kExactTol);
    EXPECT_NEAR(c.motor_current_a, want_current, kExactTol);
    EXPECT_NEAR(c.speed_mps, 2.0, kExactTol);
  }

  auto parked = make_scenario({TS::dwell(1.0)});
  parked.noise_free = true;
  for (const auto& c : synthesize(parked).controls) {
    EXPECT_NEAR(c.motor_current_a, 0.0, kExactTol);
    EXPECT_NEAR(c.steer_rad, 0.0, kExactTol);
  }
}

TEST(Simulator, SynthesisIsDeterministic) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::ramp(5.0, 4.0), TS::arc(20.0, M_PI, 4.0), TS::straight(5.0, 4.0)});
  const SensorStreams a = synthesize(cfg);
  const SensorStreams b = synthesize(cfg);

  ASSERT_EQ(a.imu.size(), b.imu.size());
  for (size_t k = 0; k < a.imu.size(); ++k) {
    ASSERT_EQ(a.imu[k].specific_force, b.imu[k].specific_force);
    ASSERT_EQ(a.imu[k].angular_rate, b.imu[k].angular_rate);
    ASSERT_EQ(a.controls[k].motor_current_a, b.controls[k].motor_current_a);
    ASSERT_EQ(a.controls[k].steer_rad, b.controls[k].steer_rad);
  }
  ASSERT_EQ(a.gnss.size(), b.gnss.size());
  for (size_t e = 0; e < a.gnss.size(); ++e) {
    for (size_t s = 0; s < a.gnss[e].size(); ++s) {
      ASSERT_EQ(a.gnss[e][s].pseudorange_m, b.gnss[e][s].pseudorange_m);
      ASSERT_EQ(a.gnss[e][s].deltarange_mps, b.gnss[e][s].deltarange_mps);
    }
  }
}

TEST(Simulator, SeedChangesNoiseStreams) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(1.0)});
  auto other = cfg;
  other.seed = cfg.seed + 1;
  const SensorStreams a = synthesize(cfg);
  const SensorStreams b = synthesize(other);
  EXPECT_NE(a.imu.front().specific_force, b.imu.front().specific_force);
  EXPECT_NE(a.gnss.front().front().pseudorange_m, b.gnss.front().front().pseudorange_m);
}

TEST(Simulator, BoundedModeClampsEveryNoiseDraw) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(200.0)});
  cfg.bounded_noise = true;
  cfg.bound_sigma = 3.0;
  const SensorStreams streams = synthesize(cfg);
  const LocalFrame frame = LocalFrame::from_geodetic(cfg.origin);

  const double accel_cap = 3.0 * cfg.noise.accel_noise_std + kExactTol;
  for (size_t k = 0; k < streams.imu.size(); ++k) {
    const Eigen::Vector3d noise = streams.imu[k].specific_force -
                                  Eigen::Vector3d(0.0, 0.0, -kGravityMps2) -
                                  streams.accel_bias_truth[k];
    EXPECT_LE(noise.cwiseAbs().maxCoeff(), accel_cap);
  }
  for (size_t e = 0; e < streams.gnss.size(); ++e) {
    for (size_t sat = 0; sat < streams.gnss[e].size(); ++sat) {
      const auto& obs = streams.gnss[e][sat];
      const double range = (obs.sat_pos_ecef - frame.origin_ecef()).norm();
      const double residual = obs.pseudorange_m - range -
                              streams.clock_bias_truth[static_cast<size_t>(streams.gnss_epoch[e])];
      const double cap =
          3.0 * sigma_epsilon(obs.cn0_dbhz, cfg.noise.c_rho_m, cfg.noise.c_d_mps).pseudorange_m;
      EXPECT_LE(std::abs(residual), cap + kGeomTol);
    }
  }
}

TEST(Simulator, NoiseBurstRaisesInWindowScatter) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(60.0)});
  cfg.faults.push_back(FaultInjection::noise_burst(20.0, 40.0, 10.0));
  const SensorStreams streams = synthesize(cfg);

  auto window_std = [&](int lo, int hi) {
    double sq = 0.0;
    int count = 0;
    for (int k = lo; k < hi; ++k) {
      const Eigen::Vector3d noise = streams.imu[static_cast<size_t>(k)].specific_force -
                                    Eigen::Vector3d(0.0, 0.0, -kGravityMps2) -
                                    streams.accel_bias_truth[static_cast<size_t>(k)];
      sq += noise.squaredNorm();
      count += 3;
    }
    return std::sqrt(sq / count);
  };
  const double in_window = window_std(2000, 4000);
  const double out_window = window_std(0, 2000);
  const double burst_sigma = std::sqrt(10.0 * 10.0 + 0.15 * 0.15);
  EXPECT_NEAR(in_window, burst_sigma, kStatTol * burst_sigma);
  EXPECT_NEAR(out_window, 0.15, kStatTol * 0.15);
}

TEST(Simulator, GnssEpochsAreDecimatedImuEpochs) {
  using TS = TrajectorySegment;
  auto cfg = make_scenario({TS::dwell(30.0)});
  const SensorStreams streams = synthesize(cfg);
  ASSERT_EQ(streams.gnss_epoch.size(), 300u);
  for (size_t e = 0; e < streams.gnss_epoch.size(); ++e) {
    EXPECT_EQ(streams.gnss_epoch[e], 10 * static_cast<int>(e + 1));
  }
}

TEST(Scenario, JsonRoundTripPreservesConfiguration) {
  const ScenarioConfig cfg = nominal_scenario();
  const std::string path = testing::TempDir() + "navint_roundtrip.json";
  save_scenario(cfg, path);
  const ScenarioConfig loaded = load_scenario(path);

  EXPECT_EQ(loaded.name, cfg.name);
  EXPECT_EQ(loaded.seed, cfg.seed);
  EXPECT_EQ(loaded.segments.size(), cfg.segments.size());
  EXPECT_EQ(loaded.constellation.size(), cfg.constellation.size());
  EXPECT_NEAR(loaded.duration_s(), 300.0, 1e-9);
  for (size_t i = 0; i < cfg.segments.size(); ++i) {
    EXPECT_EQ(static_cast<int>(loaded.segments[i].kind), static_cast<int>(cfg.segments[i].kind));
    EXPECT_NEAR(loaded.segments[i].duration_s, cfg.segments[i].duration_s, 1e-9);
    EXPECT_NEAR(loaded.segments[i].angle_rad, cfg.segments[i].angle_rad, 1e-12);
  }
  for (size_t i = 0; i < cfg.constellation.size(); ++i) {
    EXPECT_NEAR(loaded.constellation[i].elevation_rad, cfg.constellation[i].elevation_rad, 1e-12);
    EXPECT_EQ(loaded.constellation[i].cn0_dbhz, cfg.constellation[i].cn0_dbhz);
  }
  EXPECT_EQ(loaded.noise.c_rho_m, cfg.noise.c_rho_m);
  EXPECT_EQ(loaded.fd.clear_epochs_to_return, cfg.fd.clear_epochs_to_return);
  EXPECT_EQ(loaded.vehicle.mass_eff_kg, cfg.vehicle.mass_eff_kg);
}

TEST(Scenario, FaultInjectionJsonRoundTrips) {
  ScenarioConfig cfg = nominal_scenario();
  cfg.faults.push_back(FaultInjection::noise_burst(200.0, 280.0, 10.0));
  cfg.faults.push_back(FaultInjection::yaw_init_error(30.0));
  cfg.faults.push_back(FaultInjection::param_falsification({{"c_rho_m", 180.0}, {"c_d_mps", 6.0}}));
  const std::string path = testing::TempDir() + "navint_faults.json";
  save_scenario(cfg, path);
  const ScenarioConfig loaded = load_scenario(path);

  ASSERT_EQ(loaded.faults.size(), 3u);
  EXPECT_EQ(loaded.faults[0].stop_s, 280.0);
  EXPECT_EQ(loaded.faults[1].yaw_error_deg, 30.0);
  EXPECT_EQ(loaded.faults[2].overrides.at("c_rho_m"), 180.0);
  EXPECT_NEAR(loaded.yaw_init_error_rad(), 30.0 * M_PI / 180.0, 1e-12);
  EXPECT_EQ(loaded.assumed_noise().c_rho_m, 180.0);
  EXPECT_EQ(loaded.noise.c_rho_m, 60.0);  // synthesis keeps the true parameters
}

TEST(Scenario, ValidationRejectsBadConfigurations) {
  {
    ScenarioConfig cfg = nominal_scenario();
    cfg.constellation.resize(3);
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
  }
  {
    ScenarioConfig cfg = nominal_scenario();
    cfg.rates.gnss_hz = 7.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
  }
  {
    ScenarioConfig cfg = nominal_scenario();
    cfg.faults.push_back(FaultInjection::noise_burst(280.0, 200.0, 10.0));
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
  }
  {
    ScenarioConfig cfg = nominal_scenario();
    cfg.faults.push_back(FaultInjection::param_falsification({{"mystery_knob", 1.0}}));
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
  }
}

TEST(Scenario, NominalCourseIsValidWithStrongGeometry) {
  const ScenarioConfig cfg = nominal_scenario();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_NEAR(cfg.duration_s(), 300.0, 1e-9);
  EXPECT_EQ(cfg.imu_epochs(), 30000);
  EXPECT_EQ(cfg.gnss_decimation(), 10);

  const LocalFrame frame = LocalFrame::from_geodetic(cfg.origin);
  std::vector<GnssObservation> probe;
  for (const auto& sat : cfg.constellation) {
    GnssObservation o;
    o.sat_id = sat.id;
    o.sat_pos_ecef = satellite_ecef(sat, frame);
    o.pseudorange_m = sat.range_m;
    o.cn0_dbhz = sat.cn0_dbhz;
    probe.push_back(o);
  }
  EXPECT_LT(position_dop(frame.origin_ecef(), probe, frame), 3.0);

  // Signal strengths span roughly half a meter to two meters of range noise.
  double lo = 1e9;
  double hi = 0.0;
  for (const auto& sat : cfg.constellation) {
    const double sigma = sigma_epsilon(sat.cn0_dbhz, cfg.noise.c_rho_m, cfg.noise.c_d_mps)
                             .pseudorange_m;
    lo = std::min(lo, sigma);
    hi = std::max(hi, sigma);
  }
  EXPECT_LT(lo, 0.55);
  EXPECT_GT(hi, 1.5);
}

}  // namespace
