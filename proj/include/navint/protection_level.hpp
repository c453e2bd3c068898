#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "navint/interval.hpp"
#include "navint/nav_types.hpp"
#include "navint/zonotope.hpp"

namespace navint {

struct PlConfig {
  int order_q = 4000;                              // generator budget
  double n_sigma = 3.0;                            // noise bounding multiple
  Eigen::Vector3d initial_pos_bound_m{10.0, 10.0, 20.0};

  void validate(int error_dim) const {
    if (order_q < error_dim) {
      throw std::invalid_argument("PlConfig: order budget below error dimension");
    }
    if (!(n_sigma > 0.0) || initial_pos_bound_m.minCoeff() <= 0.0) {
      throw std::invalid_argument("PlConfig: bounds must be positive");
    }
  }
};

/// Zero-centred zonotope over the estimation error. Only the generator
/// matrix is stored: every operation in the recursion is linear, so the
/// center stays exactly zero by construction.
struct ErrorZonotope {
  Eigen::MatrixXd generators;

  int dim() const { return static_cast<int>(generators.rows()); }
  int order() const { return static_cast<int>(generators.cols()); }
};

/// Diagonal generators bounding a zero-mean noise with covariance diag(q) at
/// n_sigma standard deviations per axis.
inline Eigen::VectorXd bounding_half_widths(const Eigen::MatrixXd& cov, double n_sigma) {
  const Eigen::VectorXd d = cov.diagonal();
  if (d.minCoeff() < 0.0) {
    throw std::invalid_argument("bounding_half_widths: negative variance");
  }
  return n_sigma * d.cwiseSqrt();
}

/// Initial error set of the main filter: explicit position half-widths, all
/// other axes at n_sigma times their initial standard deviation.
inline ErrorZonotope initial_error_zonotope_main(const PlConfig& cfg, const NoiseParams& np) {
  cfg.validate(main_err::kDim);
  Eigen::VectorXd hw(main_err::kDim);
  hw.segment<3>(main_err::kPos) = cfg.initial_pos_bound_m;
  hw.segment<3>(main_err::kVel).setConstant(cfg.n_sigma * np.sigma0_vel);
  hw.segment<3>(main_err::kAtt).setConstant(cfg.n_sigma * np.sigma0_att_rad);
  hw.segment<3>(main_err::kAccelBias).setConstant(cfg.n_sigma * np.sigma0_accel_bias);
  hw.segment<3>(main_err::kGyroBias).setConstant(cfg.n_sigma * np.sigma0_gyro_bias);
  hw(main_err::kClockBias) = cfg.n_sigma * np.sigma0_clock_bias_m;
  hw(main_err::kClockDrift) = cfg.n_sigma * np.sigma0_clock_drift_mps;
  return ErrorZonotope{Eigen::MatrixXd(hw.asDiagonal())};
}

inline ErrorZonotope initial_error_zonotope_fallback(const PlConfig& cfg,
                                                     const NoiseParams& np) {
  cfg.validate(fallback_err::kDim);
  Eigen::VectorXd hw(fallback_err::kDim);
  hw.segment<3>(fallback_err::kPos) = cfg.initial_pos_bound_m;
  hw.segment<3>(fallback_err::kVel).setConstant(cfg.n_sigma * np.sigma0_vel);
  hw(fallback_err::kClockBias) = cfg.n_sigma * np.sigma0_clock_bias_m;
  hw(fallback_err::kClockDrift) = cfg.n_sigma * np.sigma0_clock_drift_mps;
  return ErrorZonotope{Eigen::MatrixXd(hw.asDiagonal())};
}

/// Error-set time update: the transition maps the previous set, the bounded
/// process noise joins as fresh generators, and the order is clamped.
inline ErrorZonotope propagate_error_zonotope(const ErrorZonotope& e,
                                              const Eigen::MatrixXd& transition,
                                              const Eigen::MatrixXd& noise_map,
                                              const Eigen::VectorXd& noise_half_widths,
                                              int order_q) {
  const int n = e.dim();
  if (transition.rows() != n || transition.cols() != n) {
    throw std::invalid_argument("propagate_error_zonotope: transition shape mismatch");
  }
  Eigen::MatrixXd stacked(n, e.order() + noise_half_widths.size());
  stacked.leftCols(e.order()).noalias() = transition * e.generators;
  stacked.rightCols(noise_half_widths.size()).noalias() =
      noise_map * Eigen::MatrixXd(noise_half_widths.asDiagonal());
  return ErrorZonotope{reduce_generators(stacked, order_q)};
}

/// Error-set measurement update: the error contracts through I - K H while
/// the bounded measurement noise enters through the gain.
inline ErrorZonotope update_error_zonotope(const ErrorZonotope& e, const Eigen::MatrixXd& gain,
                                           const Eigen::MatrixXd& jacobian,
                                           const Eigen::VectorXd& noise_half_widths,
                                           int order_q) {
  const int n = e.dim();
  if (gain.rows() != n || jacobian.cols() != n ||
      gain.cols() != jacobian.rows() || noise_half_widths.size() != gain.cols()) {
    throw std::invalid_argument("update_error_zonotope: shape mismatch");
  }
  Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n);
  ikh.noalias() -= gain * jacobian;
  Eigen::MatrixXd stacked(n, e.order() + noise_half_widths.size());
  stacked.leftCols(e.order()).noalias() = ikh * e.generators;
  stacked.rightCols(noise_half_widths.size()).noalias() =
      gain * Eigen::MatrixXd(noise_half_widths.asDiagonal());
  return ErrorZonotope{reduce_generators(stacked, order_q)};
}

/// Symmetric per-axis bounds of the selected error components.
inline std::vector<Interval> protection_level(const ErrorZonotope& e,
                                              const std::vector<int>& rows) {
  std::vector<Interval> out;
  out.reserve(rows.size());
  for (int r : rows) {
    if (r < 0 || r >= e.dim()) {
      throw std::invalid_argument("protection_level: row out of range");
    }
    const double hw = e.generators.row(r).cwiseAbs().sum();
    out.push_back(Interval::symmetric(hw));
  }
  return out;
}

/// Runs the error-set recursion in lockstep with a filter: feed it the same
/// F, G, Q of every propagation and the same K, H, R of every applied update
/// (skipped updates simply produce no call).
class PlTracker {
 public:
  PlTracker(PlConfig cfg, ErrorZonotope initial) : cfg_(cfg), zono_(std::move(initial)) {
    cfg_.validate(zono_.dim());
  }

  void on_propagate(const Eigen::MatrixXd& transition, const Eigen::MatrixXd& noise_map,
                    const Eigen::MatrixXd& process_noise) {
    zono_ = propagate_error_zonotope(zono_, transition, noise_map,
                                     bounding_half_widths(process_noise, cfg_.n_sigma),
                                     cfg_.order_q);
  }

  void on_update(const Eigen::MatrixXd& gain, const Eigen::MatrixXd& jacobian,
                 const Eigen::MatrixXd& meas_noise) {
    zono_ = update_error_zonotope(zono_, gain, jacobian,
                                  bounding_half_widths(meas_noise, cfg_.n_sigma),
                                  cfg_.order_q);
  }

  /// Position rows sit at the front of both error layouts.
  std::vector<Interval> position_pl() const { return protection_level(zono_, {0, 1, 2}); }

  const ErrorZonotope& error_set() const { return zono_; }
  const PlConfig& config() const { return cfg_; }

  /// Project the error set onto a subset of rows (used when handing over to
  /// a filter with fewer states: projection of an enclosing set encloses the
  /// projected error).
  ErrorZonotope project(const std::vector<int>& rows) const {
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), zono_.dim());
    for (size_t i = 0; i < rows.size(); ++i) {
      sel(static_cast<int>(i), rows[i]) = 1.0;
    }
    return ErrorZonotope{sel * zono_.generators};
  }

  void replace(ErrorZonotope e) { zono_ = std::move(e); }

 private:
  PlConfig cfg_;
  ErrorZonotope zono_;
};

}  // namespace navint
