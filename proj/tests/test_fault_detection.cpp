#include "navint/fault_detection.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

using navint::FdConfig;
using navint::Interval;
using navint::VehicleParams;

namespace {

VehicleParams bench_vehicle() {
  VehicleParams vp;
  vp.wheelbase_m = 1.0;
  vp.mass_eff_kg = 20.0;
  vp.motor_constant_n_per_a = 20.0;
  vp.drag_c0_n = 1.0;
  vp.drag_c1 = 1.0;
  vp.drag_c2 = 0.0;
  return vp;
}

double pointwise_force(double v, double current, const VehicleParams& vp) {
  const double sgn = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return vp.motor_constant_n_per_a * current -
         (vp.drag_c0_n * sgn + vp.drag_c1 * v + vp.drag_c2 * v * std::abs(v));
}

}  // namespace

TEST(FaultDetection, InputIntervalsWidenByConfiguredMultiple) {
  FdConfig cfg;
  navint::ControlSample ctrl;
  ctrl.motor_current_a = 2.0;
  ctrl.steer_rad = 0.05;
  ctrl.speed_mps = 4.0;
  const auto in = navint::input_intervals(ctrl, cfg);
  EXPECT_NEAR(in.current_a.lo, -4.0, 1e-12);
  EXPECT_NEAR(in.current_a.hi, 8.0, 1e-12);
  EXPECT_NEAR(in.steer_rad.center(), 0.05, 1e-12);
  EXPECT_NEAR(in.steer_rad.width(), 2.0 * 6.0 * M_PI / 180.0, 1e-12);
  EXPECT_NEAR(in.speed_mps.lo, 3.4, 1e-12);
  EXPECT_NEAR(in.speed_mps.hi, 4.6, 1e-12);
}

TEST(FaultDetection, ForceModelWorkedExample) {
  const VehicleParams vp = bench_vehicle();
  // Thrust 20*[2.2, 2.8] = [44, 56]; drag at 2 m/s is 1 + 2 = 3.
  const Interval f = navint::force_model(Interval{2.0, 2.0}, Interval{2.2, 2.8}, vp);
  EXPECT_NEAR(f.lo, 41.0, 1e-12);
  EXPECT_NEAR(f.hi, 53.0, 1e-12);
  const Interval a = navint::acceleration_threshold(Interval{2.0, 2.0}, Interval{2.2, 2.8}, vp);
  EXPECT_NEAR(a.lo, 2.05, 1e-12);
  EXPECT_NEAR(a.hi, 2.65, 1e-12);
}

TEST(FaultDetection, StationaryZeroCurrentGivesZeroForce) {
  VehicleParams vp = bench_vehicle();
  vp.drag_c0_n = 5.0;  // dry friction must not bite at rest
  const Interval f = navint::force_model(Interval{0.0, 0.0}, Interval{0.0, 0.0}, vp);
  EXPECT_NEAR(f.lo, 0.0, 1e-12);
  EXPECT_NEAR(f.hi, 0.0, 1e-12);
}

TEST(FaultDetection, SignTermSpansZeroCrossing) {
  VehicleParams vp = bench_vehicle();
  vp.drag_c0_n = 5.0;
  vp.drag_c1 = 0.0;
  const Interval f = navint::force_model(Interval{-1.0, 2.0}, Interval{0.0, 0.0}, vp);
  EXPECT_NEAR(f.lo, -5.0, 1e-12);
  EXPECT_NEAR(f.hi, 5.0, 1e-12);
}

TEST(FaultDetection, QuadraticDragUsesOddSquare) {
  VehicleParams vp = bench_vehicle();
  vp.drag_c0_n = 0.0;
  vp.drag_c1 = 0.0;
  vp.drag_c2 = 1.0;
  const Interval f = navint::force_model(Interval{-2.0, 3.0}, Interval{0.0, 0.0}, vp);
  // v|v| over [-2, 3] spans [-4, 9]; force is its negation.
  EXPECT_NEAR(f.lo, -9.0, 1e-12);
  EXPECT_NEAR(f.hi, 4.0, 1e-12);
}

TEST(FaultDetection, ForceModelEnclosesPointEvaluations) {
  const VehicleParams vp = [] {
    VehicleParams p = bench_vehicle();
    p.drag_c0_n = 2.0;
    p.drag_c1 = 0.8;
    p.drag_c2 = 0.3;
    return p;
  }();
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double v0 = 3.0 * u(rng), v1 = v0 + 2.0 * std::abs(u(rng));
    const double i0 = 2.0 * u(rng), i1 = i0 + std::abs(u(rng));
    const Interval fi = navint::force_model({v0, v1}, {i0, i1}, vp);
    std::uniform_real_distribution<double> uv(v0, v1), ui(i0, i1);
    for (int s = 0; s < 20; ++s) {
      const double f = pointwise_force(uv(rng), ui(rng), vp);
      EXPECT_TRUE(fi.contains(f)) << "force " << f << " outside [" << fi.lo << ", " << fi.hi
                                  << "]";
    }
  }
}

TEST(FaultDetection, YawRateBandEnclosesKinematics) {
  const VehicleParams vp = bench_vehicle();
  const Interval band = navint::yaw_rate_threshold({3.9, 4.1}, {0.04, 0.06}, vp);
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> uv(3.9, 4.1), ud(0.04, 0.06);
  for (int s = 0; s < 500; ++s) {
    const double w = uv(rng) * std::tan(ud(rng)) / vp.wheelbase_m;
    EXPECT_TRUE(band.contains(w));
  }
  EXPECT_NEAR(band.lo, 3.9 * std::tan(0.04), 1e-12);
  EXPECT_NEAR(band.hi, 4.1 * std::tan(0.06), 1e-12);
  EXPECT_THROW(navint::yaw_rate_threshold({1.0, 2.0}, {1.5, 1.6}, vp), std::domain_error);
}

TEST(FaultDetection, CompensationRemovesEstimatedBias) {
  navint::ImuSample imu;
  imu.specific_force = Eigen::Vector3d(1.5, 0.0, -9.81);
  imu.angular_rate = Eigen::Vector3d(0.0, 0.0, 0.3);
  const auto comp = navint::compensated_imu(imu, 0.2, -0.05);
  EXPECT_NEAR(comp.specific_force_x, 1.3, 1e-12);
  EXPECT_NEAR(comp.yaw_rate, 0.35, 1e-12);
}

TEST(FaultDetection, ClosedIntervalBoundaryIsNotAFault) {
  const Interval accel{-1.0, 2.0};
  const Interval yaw{-0.5, 0.5};
  EXPECT_FALSE(navint::detect_fault({2.0, 0.5}, accel, yaw).any());
  EXPECT_TRUE(navint::detect_fault({2.0001, 0.0}, accel, yaw).accel_fault);
  EXPECT_FALSE(navint::detect_fault({2.0001, 0.0}, accel, yaw).yaw_fault);
  EXPECT_TRUE(navint::detect_fault({0.0, -0.6}, accel, yaw).yaw_fault);
}

TEST(FaultDetection, SupervisorDwellAndRecovery) {
  FdConfig cfg;
  cfg.dwell_s = 5.0;
  cfg.clear_epochs_to_return = 100;
  navint::Supervisor sup(cfg);
  const double dt = 0.01;
  double returned_at = -1.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k * dt;
    const bool fault = (k == 100);  // single fault at t = 1 s
    const auto active = sup.step(t, fault);
    if (t < 1.0) {
      EXPECT_EQ(active, navint::Supervisor::Active::kMain);
    } else if (t < 6.0 + 0.99) {
      if (k > 100 && active == navint::Supervisor::Active::kMain) {
        returned_at = t;
        break;
      }
      EXPECT_EQ(active, navint::Supervisor::Active::kFallback) << "t=" << t;
    } else if (returned_at < 0.0 && active == navint::Supervisor::Active::kMain) {
      returned_at = t;
    }
  }
  // Dwell ends at t = 6; the hundredth consecutive clean epoch lands at 6.99.
  EXPECT_NEAR(returned_at, 6.99, 0.011);
  ASSERT_EQ(sup.events().size(), 2u);
  EXPECT_NEAR(sup.events()[0].t, 1.0, 1e-9);
  EXPECT_EQ(sup.events()[0].to, navint::Supervisor::Active::kFallback);
  EXPECT_EQ(sup.events()[1].to, navint::Supervisor::Active::kMain);
}

TEST(FaultDetection, SupervisorRelatchesOnRepeatFault) {
  FdConfig cfg;
  cfg.dwell_s = 5.0;
  cfg.clear_epochs_to_return = 100;
  navint::Supervisor sup(cfg);
  const double dt = 0.01;
  double returned_at = -1.0;
  for (int k = 0; k <= 1200; ++k) {
    const double t = k * dt;
    const bool fault = (k == 100) || (k == 300);  // second fault at t = 3 s
    if (sup.step(t, fault) == navint::Supervisor::Active::kMain && k > 100 &&
        returned_at < 0.0) {
      returned_at = t;
    }
  }
  // The second fault pushes the latch to t = 8; return lands at 8.99.
  EXPECT_NEAR(returned_at, 8.99, 0.011);
}

TEST(FaultDetection, SupervisorIsDeterministic) {
  FdConfig cfg;
  std::mt19937_64 rng(113);
  std::bernoulli_distribution fault_coin(0.01);
  std::vector<bool> faults;
  for (int k = 0; k < 2000; ++k) faults.push_back(fault_coin(rng));
  std::vector<int> trace_a, trace_b;
  {
    navint::Supervisor sup(cfg);
    for (int k = 0; k < 2000; ++k) {
      trace_a.push_back(static_cast<int>(sup.step(k * 0.01, faults[static_cast<size_t>(k)])));
    }
  }
  {
    navint::Supervisor sup(cfg);
    for (int k = 0; k < 2000; ++k) {
      trace_b.push_back(static_cast<int>(sup.step(k * 0.01, faults[static_cast<size_t>(k)])));
    }
  }
  EXPECT_EQ(trace_a, trace_b);
}

TEST(FaultDetection, ConfigValidation) {
  FdConfig cfg;
  cfg.n_sigma_d = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  VehicleParams vp;
  vp.mass_eff_kg = -1.0;
  EXPECT_THROW(vp.validate(), std::invalid_argument);
}
