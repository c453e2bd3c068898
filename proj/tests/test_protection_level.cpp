#include "navint/protection_level.hpp"

#include <random>

#include <gtest/gtest.h>

using navint::ErrorZonotope;
using navint::PlConfig;
using navint::PlTracker;

namespace {

Eigen::MatrixXd mat1(double v) {
  Eigen::MatrixXd m(1, 1);
  m << v;
  return m;
}

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

}  // namespace

TEST(ProtectionLevel, BoundingHalfWidthsFromCovariance) {
  Eigen::MatrixXd q = Eigen::Vector3d(0.01, 0.04, 0.0).asDiagonal();
  const Eigen::VectorXd hw = navint::bounding_half_widths(q, 3.0);
  EXPECT_NEAR(hw(0), 0.3, 1e-12);
  EXPECT_NEAR(hw(1), 0.6, 1e-12);
  EXPECT_NEAR(hw(2), 0.0, 1e-12);
  q(2, 2) = -1.0;
  EXPECT_THROW(navint::bounding_half_widths(q, 3.0), std::invalid_argument);
}

TEST(ProtectionLevel, InitialSetsHaveDocumentedBounds) {
  PlConfig cfg;
  navint::NoiseParams np;
  const ErrorZonotope e = navint::initial_error_zonotope_main(cfg, np);
  EXPECT_EQ(e.dim(), navint::main_err::kDim);
  const auto pl = navint::protection_level(e, {0, 1, 2});
  EXPECT_NEAR(pl[0].hi, 10.0, 1e-12);
  EXPECT_NEAR(pl[1].hi, 10.0, 1e-12);
  EXPECT_NEAR(pl[2].hi, 20.0, 1e-12);
  EXPECT_NEAR(pl[0].lo, -10.0, 1e-12);
  // Velocity rows carry n_sigma times the initial standard deviation.
  const auto vel = navint::protection_level(e, {navint::main_err::kVel});
  EXPECT_NEAR(vel[0].hi, 3.0 * np.sigma0_vel, 1e-12);

  const ErrorZonotope ef = navint::initial_error_zonotope_fallback(cfg, np);
  EXPECT_EQ(ef.dim(), navint::fallback_err::kDim);
  const auto plf = navint::protection_level(ef, {0, 1, 2});
  EXPECT_NEAR(plf[2].hi, 20.0, 1e-12);

  PlConfig bad;
  bad.order_q = 3;
  EXPECT_THROW(navint::initial_error_zonotope_main(bad, np), std::invalid_argument);
}

TEST(ProtectionLevel, PropagateScalarRecursion) {
  const ErrorZonotope e{mat1(1.0)};
  const ErrorZonotope out =
      navint::propagate_error_zonotope(e, mat1(2.0), mat1(1.0), vec1(0.5), 10);
  const auto pl = navint::protection_level(out, {0});
  EXPECT_NEAR(pl[0].hi, 2.5, 1e-12);  // |2*1| + |0.5|
}

TEST(ProtectionLevel, UpdateScalarRecursion) {
  const ErrorZonotope e{mat1(1.0)};
  const ErrorZonotope out =
      navint::update_error_zonotope(e, mat1(0.5), mat1(1.0), vec1(0.5), 10);
  const auto pl = navint::protection_level(out, {0});
  EXPECT_NEAR(pl[0].hi, 0.75, 1e-12);  // |(1-0.5)*1| + |0.5*0.5|
}

TEST(ProtectionLevel, UpdateZeroGainKeepsSet) {
  Eigen::MatrixXd gens(2, 3);
  gens << 1, 0.5, 0, 0, 0.25, 1;
  const ErrorZonotope e{gens};
  const ErrorZonotope out = navint::update_error_zonotope(
      e, Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Ones(1, 2), vec1(3.0), 10);
  const auto before = navint::protection_level(e, {0, 1});
  const auto after = navint::protection_level(out, {0, 1});
  EXPECT_NEAR(before[0].hi, after[0].hi, 1e-12);
  EXPECT_NEAR(before[1].hi, after[1].hi, 1e-12);
}

TEST(ProtectionLevel, OrderStaysWithinBudget) {
  PlConfig cfg;
  cfg.order_q = 4;
  navint::NoiseParams np;
  ErrorZonotope e{Eigen::MatrixXd::Identity(2, 2)};
  const Eigen::MatrixXd f = 0.9 * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
  for (int k = 0; k < 20; ++k) {
    e = navint::propagate_error_zonotope(e, f, g, Eigen::Vector2d(0.1, 0.2), 4);
    EXPECT_LE(e.order(), 4);
  }
  EXPECT_EQ(e.order(), 4);  // saturated
}

// The whole point of the recursion: a true error trajectory driven by
// noises inside the assumed bounds never leaves the tracked set.
TEST(ProtectionLevel, MonteCarloContainmentThroughReduction) {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2;
    Eigen::MatrixXd f(n, n);
    f << 1.0, 0.01, 0.0, 0.98;
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    const Eigen::Vector2d w_hw(0.05, 0.1);
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(1, n);
    const Eigen::VectorXd v_hw = vec1(0.3);
    Eigen::MatrixXd k_gain(n, 1);
    k_gain << 0.2, 0.05;

    ErrorZonotope set{Eigen::MatrixXd(Eigen::Vector2d(0.5, 0.5).asDiagonal())};
    Eigen::Vector2d err(u(rng) * 0.5, u(rng) * 0.5);
    for (int step = 0; step < 100; ++step) {
      const Eigen::Vector2d w(u(rng) * w_hw(0), u(rng) * w_hw(1));
      err = f * err + g * w;
      set = navint::propagate_error_zonotope(set, f, g, w_hw, 6);  // tight budget
      if (step % 10 == 9) {
        const double v = u(rng) * v_hw(0);
        err = (Eigen::MatrixXd::Identity(n, n) - k_gain * h) * err + k_gain * vec1(v);
        set = navint::update_error_zonotope(set, k_gain, h, v_hw, 6);
      }
      const auto pl = navint::protection_level(set, {0, 1});
      EXPECT_LE(std::abs(err(0)), pl[0].hi + 1e-9);
      EXPECT_LE(std::abs(err(1)), pl[1].hi + 1e-9);
    }
  }
}

TEST(ProtectionLevel, WiderSigmaMultipleWidensBounds) {
  const ErrorZonotope e{mat1(1.0)};
  const Eigen::MatrixXd q = mat1(0.04);
  const ErrorZonotope narrow = navint::propagate_error_zonotope(
      e, mat1(1.0), mat1(1.0), navint::bounding_half_widths(q, 2.0), 10);
  const ErrorZonotope wide = navint::propagate_error_zonotope(
      e, mat1(1.0), mat1(1.0), navint::bounding_half_widths(q, 4.0), 10);
  EXPECT_LT(navint::protection_level(narrow, {0})[0].hi,
            navint::protection_level(wide, {0})[0].hi);
}

TEST(ProtectionLevel, TrackerMatchesManualRecursion) {
  PlConfig cfg;
  cfg.order_q = 8;
  navint::NoiseParams np;
  std::mt19937_64 rng(101);
  std::normal_distribution<double> nd(0.0, 1.0);

  ErrorZonotope manual{Eigen::MatrixXd(Eigen::Vector3d(1.0, 2.0, 0.5).asDiagonal())};
  PlTracker tracker(cfg, manual);
  for (int k = 0; k < 30; ++k) {
    Eigen::MatrixXd f(3, 3);
    for (int i = 0; i < 9; ++i) f(i / 3, i % 3) = 0.3 * nd(rng);
    f += Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd q = Eigen::Vector3d(0.01, 0.02, 0.03).asDiagonal();
    tracker.on_propagate(f, g, q);
    manual = navint::propagate_error_zonotope(manual, f, g,
                                              navint::bounding_half_widths(q, cfg.n_sigma),
                                              cfg.order_q);
    const auto a = tracker.position_pl();
    const auto b = navint::protection_level(manual, {0, 1, 2});
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(a[static_cast<size_t>(i)].hi, b[static_cast<size_t>(i)].hi, 1e-9);
    }
  }
}

TEST(ProtectionLevel, ProjectionPreservesSelectedRows) {
  Eigen::MatrixXd gens(4, 5);
  std::mt19937_64 rng(103);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < gens.size(); ++i) gens(i / 5, i % 5) = nd(rng);
  PlConfig cfg;
  cfg.order_q = 5;
  PlTracker tracker(cfg, ErrorZonotope{gens});
  const ErrorZonotope proj = tracker.project({0, 2});
  EXPECT_EQ(proj.dim(), 2);
  const auto full = navint::protection_level(tracker.error_set(), {0, 2});
  const auto sub = navint::protection_level(proj, {0, 1});
  EXPECT_NEAR(full[0].hi, sub[0].hi, 1e-12);
  EXPECT_NEAR(full[1].hi, sub[1].hi, 1e-12);
}
