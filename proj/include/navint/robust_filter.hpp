#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

namespace navint {

/// Thrown when a state or covariance stops being finite.
class FilterDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by the robust update when the disturbance-attenuation level is not
/// achievable for the current prior (the spectral feasibility test fails).
class GammaInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem description consumed by the filter core. The state may live on a
/// manifold (quaternions), so its dimension can differ from the error-space
/// dimension; `retract` applies an error-space correction to a state.
struct FilterModel {
  int state_dim = 0;
  int error_dim = 0;
  int noise_dim = 0;

  /// Deterministic state propagation x_{k+1} = f(x_k, u_k, dt).
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>
      predict;

  /// Error-state transition F (error_dim x error_dim) and noise map G
  /// (error_dim x noise_dim) linearized about (x, u).
  std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&, double,
                     Eigen::MatrixXd&, Eigen::MatrixXd&)>
      jacobians;

  /// Per-step process noise covariance Q(dt) (noise_dim x noise_dim).
  std::function<Eigen::MatrixXd(double)> process_noise;

  /// x boxplus delta: apply an error-space correction to a state.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> retract;

  /// Same map as `predict` with an explicit disturbance w injected; defines
  /// the convention G linearizes, so derivative checks have a ground truth.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                const Eigen::VectorXd&, double)>
      predict_noisy;
};

struct FilterEstimate {
  Eigen::VectorXd state;
  Eigen::MatrixXd covariance;
  int epoch = 0;
};

/// Measurement bundle: observed vector, model prediction h(x), Jacobian H in
/// error space, and measurement noise covariance R.
struct Measurement {
  Eigen::VectorXd observed;
  Eigen::VectorXd predicted;
  Eigen::MatrixXd jacobian;
  Eigen::MatrixXd noise;

  Eigen::VectorXd residual() const { return observed - predicted; }
};

struct PropagateResult {
  FilterEstimate estimate;
  Eigen::MatrixXd transition;  // F
  Eigen::MatrixXd noise_map;   // G
};

struct UpdateResult {
  FilterEstimate estimate;
  Eigen::MatrixXd gain;  // K
};

namespace detail {

inline void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

inline void require_finite(const FilterEstimate& est, const char* where) {
  if (!est.state.allFinite() || !est.covariance.allFinite()) {
    throw FilterDivergence(std::string("filter divergence: non-finite values in ") + where);
  }
}

inline Eigen::MatrixXd weight_outer(const Eigen::MatrixXd& weight_l, int dim) {
  if (weight_l.size() == 0) {
    return Eigen::MatrixXd::Identity(dim, dim);
  }
  if (weight_l.cols() != dim) {
    throw std::invalid_argument("weighting matrix columns must match error dimension");
  }
  return weight_l.transpose() * weight_l;
}

}  // namespace detail

/// Time update: x through the model map, P through F P F^T + G Q G^T.
inline PropagateResult propagate(const FilterModel& model, const FilterEstimate& prior,
                                 const Eigen::VectorXd& input, double dt) {
  PropagateResult out;
  out.estimate.state = model.predict(prior.state, input, dt);
  model.jacobians(prior.state, input, dt, out.transition, out.noise_map);
  const Eigen::MatrixXd q = model.process_noise(dt);
  out.estimate.covariance = out.transition * prior.covariance * out.transition.transpose() +
                            out.noise_map * q * out.noise_map.transpose();
  detail::symmetrize(out.estimate.covariance);
  out.estimate.epoch = prior.epoch + 1;
  detail::require_finite(out.estimate, "propagate");
  return out;
}

/// Feasibility of the attenuation level: P^-1 + H^T R^-1 H - gamma^-1 L^T L
/// must be positive definite, tested by Cholesky success.
inline bool check_feasibility(const Eigen::MatrixXd& covariance, const Eigen::MatrixXd& jacobian,
                              const Eigen::MatrixXd& noise, double gamma,
                              const Eigen::MatrixXd& weight_l = Eigen::MatrixXd()) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("check_feasibility: gamma must be positive");
  }
  const int n = static_cast<int>(covariance.rows());
  Eigen::MatrixXd p = covariance;
  detail::symmetrize(p);
  Eigen::LLT<Eigen::MatrixXd> pllt(p);
  Eigen::MatrixXd p_inv;
  if (pllt.info() == Eigen::Success) {
    p_inv = pllt.solve(Eigen::MatrixXd::Identity(n, n));
  } else {
    p_inv = Eigen::FullPivLU<Eigen::MatrixXd>(p).inverse();
  }
  Eigen::MatrixXd m = p_inv - (1.0 / gamma) * detail::weight_outer(weight_l, n);
  if (jacobian.size() > 0) {
    m += jacobian.transpose() * noise.llt().solve(jacobian);
  }
  detail::symmetrize(m);
  return m.llt().info() == Eigen::Success;
}

/// Smallest feasible attenuation level (bisection over a fixed bracket) times
/// a safety factor. Throws when even the bracket's upper end is infeasible.
inline double select_gamma(const Eigen::MatrixXd& covariance, const Eigen::MatrixXd& jacobian,
                           const Eigen::MatrixXd& noise, double safety = 2.0,
                           const Eigen::MatrixXd& weight_l = Eigen::MatrixXd()) {
  if (!(safety >= 1.0)) {
    throw std::invalid_argument("select_gamma: safety factor must be >= 1");
  }
  double lo = 1e-6;
  double hi = 1e9;
  if (check_feasibility(covariance, jacobian, noise, lo, weight_l)) {
    return safety * lo;
  }
  if (!check_feasibility(covariance, jacobian, noise, hi, weight_l)) {
    throw std::runtime_error("select_gamma: feasibility bracket exhausted");
  }
  for (int iter = 0; iter < 50; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (check_feasibility(covariance, jacobian, noise, mid, weight_l)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return safety * hi;  // hi is the feasible end of the bracket
}

/// Kalman measurement update in Joseph form (numerically symmetric).
inline UpdateResult update_ekf(const FilterModel& model, const FilterEstimate& prior,
                               const Measurement& meas) {
  const int n = static_cast<int>(prior.covariance.rows());
  const Eigen::MatrixXd& h = meas.jacobian;
  Eigen::MatrixXd s = h * prior.covariance * h.transpose() + meas.noise;
  detail::symmetrize(s);
  const Eigen::LLT<Eigen::MatrixXd> sllt(s);
  if (sllt.info() != Eigen::Success) {
    throw std::runtime_error("update_ekf: innovation covariance not positive definite");
  }
  UpdateResult out;
  out.gain = sllt.solve(h * prior.covariance).transpose();
  const Eigen::MatrixXd ikh =
      Eigen::MatrixXd::Identity(n, n) - out.gain * h;
  out.estimate.covariance = ikh * prior.covariance * ikh.transpose() +
                            out.gain * meas.noise * out.gain.transpose();
  detail::symmetrize(out.estimate.covariance);
  out.estimate.state = model.retract(prior.state, out.gain * meas.residual());
  out.estimate.epoch = prior.epoch;
  detail::require_finite(out.estimate, "update_ekf");
  return out;
}

/// Robust measurement update. The posterior covariance is the prior times the
/// inverse of the bracket  I - gamma^-1 L^T L P + H^T R^-1 H P,  and the gain
/// is P_post H^T R^-1. Letting gamma grow without bound recovers the Kalman
/// update. Feasibility of gamma is asserted before the algebra runs.
inline UpdateResult update_ehf(const FilterModel& model, const FilterEstimate& prior,
                               const Measurement& meas, double gamma,
                               const Eigen::MatrixXd& weight_l = Eigen::MatrixXd()) {
  if (!check_feasibility(prior.covariance, meas.jacobian, meas.noise, gamma, weight_l)) {
    throw GammaInfeasible("update_ehf: attenuation level infeasible for current prior");
  }
  const int n = static_cast<int>(prior.covariance.rows());
  const Eigen::MatrixXd& h = meas.jacobian;
  const Eigen::MatrixXd r_inv_h = meas.noise.llt().solve(h);  // R^-1 H
  const Eigen::MatrixXd bracket =
      Eigen::MatrixXd::Identity(n, n) +
      (h.transpose() * r_inv_h - (1.0 / gamma) * detail::weight_outer(weight_l, n)) *
          prior.covariance;
  // P_post = P * bracket^-1, solved as bracket^T X = P^T, P_post = X^T.
  UpdateResult out;
  out.estimate.covariance =
      bracket.transpose().partialPivLu().solve(prior.covariance.transpose()).transpose();
  if (!out.estimate.covariance.allFinite()) {
    throw std::runtime_error("update_ehf: bracket matrix is singular");
  }
  detail::symmetrize(out.estimate.covariance);
  out.gain = out.estimate.covariance * r_inv_h.transpose();
  out.estimate.state = model.retract(prior.state, out.gain * meas.residual());
  out.estimate.epoch = prior.epoch;
  detail::require_finite(out.estimate, "update_ehf");
  return out;
}

/// One epoch's contribution to the disturbance-attenuation cost ratio.
struct CostEpoch {
  Eigen::VectorXd estimation_error;   // x_true - x_est after the epoch
  Eigen::VectorXd process_noise;      // w_k
  Eigen::VectorXd measurement_noise;  // v_k
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
};

/// Energy-gain ratio of weighted estimation error over initial uncertainty
/// plus disturbance energy. Values below the attenuation level indicate the
/// bound held on this trajectory.
inline double cost_j(const Eigen::VectorXd& initial_error, const Eigen::MatrixXd& p0,
                     const std::vector<CostEpoch>& epochs,
                     const Eigen::MatrixXd& weight_l = Eigen::MatrixXd()) {
  if (epochs.empty()) {
    throw std::invalid_argument("cost_j: at least one epoch required");
  }
  const int n = static_cast<int>(initial_error.size());
  const Eigen::MatrixXd lbar = detail::weight_outer(weight_l, n);
  double numerator = 0.0;
  double denominator = initial_error.dot(p0.llt().solve(initial_error));
  for (const auto& e : epochs) {
    numerator += e.estimation_error.dot(lbar * e.estimation_error);
    if (e.process_noise.size() > 0) {
      denominator += e.process_noise.dot(e.q.llt().solve(e.process_noise));
    }
    if (e.measurement_noise.size() > 0) {
      denominator += e.measurement_noise.dot(e.r.llt().solve(e.measurement_noise));
    }
  }
  if (!(denominator > 0.0)) {
    throw std::runtime_error("cost_j: degenerate denominator (no disturbance energy)");
  }
  return numerator / denominator;
}

}  // namespace navint
