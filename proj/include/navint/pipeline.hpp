#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include <navint/fault_detection.hpp>
#include <navint/gnss.hpp>
#include <navint/models.hpp>
#include <navint/protection_level.hpp>
#include <navint/robust_filter.hpp>
#include <navint/scenario.hpp>
#include <navint/simulator.hpp>

namespace navint {

/// Knobs of one closed-loop run. Everything not listed here comes from the
/// scenario file itself.
struct PipelineOptions {
  enum class FilterKind { kEkf, kEhf };

  FilterKind filter = FilterKind::kEhf;
  bool fd_enabled = true;

  /// The error-set recursion costs far more than the filter; runs that only
  /// need estimation-error metrics can switch it off.
  bool pl_enabled = true;
  int order_q = 4000;
  double n_sigma_z = 3.0;

  /// Margin on the smallest feasible gamma. The bound must stay feasible for a
  /// whole run, not just the selection epoch, and weakly-observed state
  /// combinations replenish far less information per update than the selection
  /// epoch suggests; a wide margin avoids mid-run doubling on clean data.
  double gamma_safety = 256.0;
  double gate_sigma = 5.0;

  /// Draw the initial estimate off truth (scaled by the true initial sigmas);
  /// switched off by tests that need an exact start.
  bool perturb_init = true;
};

/// One per-epoch report line: the active estimate against truth, the position
/// protection levels, and the fault-detection view of that epoch's step.
struct EpochRecord {
  double t = 0.0;
  int active = 0;  // 0 = inertial main filter, 1 = GNSS-only fallback
  Eigen::Vector3d est_pos_ned = Eigen::Vector3d::Zero();
  Eigen::Vector3d est_vel_ned = Eigen::Vector3d::Zero();
  double est_yaw_rad = 0.0;
  double est_clock_bias_m = 0.0;
  double est_clock_drift_mps = 0.0;
  Eigen::Vector3d true_pos_ned = Eigen::Vector3d::Zero();
  Eigen::Vector3d true_vel_ned = Eigen::Vector3d::Zero();
  double true_yaw_rad = 0.0;
  double err_2d_m = 0.0;
  double err_3d_m = 0.0;
  Eigen::Vector3d pl_m =
      Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  bool pl_contained = true;
  bool accel_fault = false;
  bool yaw_fault = false;
  double fd_accel_margin = std::numeric_limits<double>::quiet_NaN();
  double fd_yaw_margin = std::numeric_limits<double>::quiet_NaN();
  double fd_accel_margin_lp = std::numeric_limits<double>::quiet_NaN();
  double fd_yaw_margin_lp = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool gamma_feasible = true;
  double pos_sigma_m = std::numeric_limits<double>::quiet_NaN();   // sqrt(tr P_pos)
  double yaw_sigma_rad = std::numeric_limits<double>::quiet_NaN();  // main filter only
  int gnss_rows_kept = 0;   // measurement rows admitted this epoch (0 = no epoch)
  int gnss_rows_total = 0;  // rows offered by the constellation this epoch
};

struct PipelineEvent {
  double t = 0.0;
  std::string kind;    // "to_fallback", "to_main", "fault_detected", "fault_cleared",
                       // "gamma_selected", "gamma_doubled", "rows_gated",
                       // "update_skipped", "divergence"
  std::string detail;
};

struct RunResult {
  std::vector<EpochRecord> rows;
  std::vector<PipelineEvent> events;
  std::vector<double> pl_step_seconds;  // one entry per epoch when enabled

  double gamma = std::numeric_limits<double>::quiet_NaN();
  int feasibility_failures = 0;  // re-checks that failed (before doubling)
  int gamma_doublings = 0;
  int gate_dropped_rows = 0;
  int skipped_updates = 0;  // updates dropped entirely by the gate
  bool diverged = false;
  double divergence_t = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Signed distance of x outside a band: negative inside, positive outside.
inline double band_margin(double x, const Interval& band) {
  return std::max(band.lo - x, x - band.hi);
}

/// Row subset of a stacked measurement (noise stays diagonal-consistent by
/// slicing rows and columns together).
inline Measurement select_rows(const Measurement& m, const std::vector<int>& rows) {
  Measurement out;
  const int k = static_cast<int>(rows.size());
  out.observed.resize(k);
  out.predicted.resize(k);
  out.jacobian.resize(k, m.jacobian.cols());
  out.noise.resize(k, k);
  for (int i = 0; i < k; ++i) {
    out.observed(i) = m.observed(rows[static_cast<size_t>(i)]);
    out.predicted(i) = m.predicted(rows[static_cast<size_t>(i)]);
    out.jacobian.row(i) = m.jacobian.row(rows[static_cast<size_t>(i)]);
    for (int j = 0; j < k; ++j) {
      out.noise(i, j) = m.noise(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]);
    }
  }
  return out;
}

/// Innovation gate: keep rows whose residual is within gate_sigma standard
/// deviations of the predicted innovation spread.
inline std::vector<int> gate_rows(const Measurement& m, const Eigen::MatrixXd& prior_cov,
                                  double gate_sigma) {
  const Eigen::MatrixXd s =
      m.jacobian * prior_cov * m.jacobian.transpose() + m.noise;
  const Eigen::VectorXd r = m.residual();
  std::vector<int> keep;
  keep.reserve(static_cast<size_t>(r.size()));
  for (int i = 0; i < r.size(); ++i) {
    if (std::abs(r(i)) <= gate_sigma * std::sqrt(s(i, i))) {
      keep.push_back(i);
    }
  }
  return keep;
}

/// Fallback error rows inside the main error space (position, velocity,
/// clock bias, clock drift).
inline std::vector<int> fallback_rows_in_main() {
  return {main_err::kPos,       main_err::kPos + 1,  main_err::kPos + 2,
          main_err::kVel,       main_err::kVel + 1,  main_err::kVel + 2,
          main_err::kClockBias, main_err::kClockDrift};
}

/// Covariance of the shared states extracted from the main covariance,
/// cross-correlations preserved.
inline Eigen::MatrixXd main_cov_to_fallback(const Eigen::MatrixXd& p_main) {
  const std::vector<int> rows = fallback_rows_in_main();
  Eigen::MatrixXd out(fallback_err::kDim, fallback_err::kDim);
  for (int i = 0; i < fallback_err::kDim; ++i) {
    for (int j = 0; j < fallback_err::kDim; ++j) {
      out(i, j) = p_main(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]);
    }
  }
  return out;
}

/// Main covariance rebuilt after a fallback interval: shared blocks from the
/// fallback filter, attitude and bias blocks reset to their initial spread
/// (they received no corrections while the inertial filter was parked).
inline Eigen::MatrixXd fallback_cov_to_main(const Eigen::MatrixXd& p_fb,
                                            const NoiseParams& np) {
  const std::vector<int> rows = fallback_rows_in_main();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(main_err::kDim, main_err::kDim);
  for (int i = 0; i < fallback_err::kDim; ++i) {
    for (int j = 0; j < fallback_err::kDim; ++j) {
      out(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]) = p_fb(i, j);
    }
  }
  const double att_var = np.sigma0_att_rad * np.sigma0_att_rad;
  const double ba_var = np.sigma0_accel_bias * np.sigma0_accel_bias;
  const double bg_var = np.sigma0_gyro_bias * np.sigma0_gyro_bias;
  out.block<3, 3>(main_err::kAtt, main_err::kAtt) = att_var * Eigen::Matrix3d::Identity();
  out.block<3, 3>(main_err::kAccelBias, main_err::kAccelBias) =
      ba_var * Eigen::Matrix3d::Identity();
  out.block<3, 3>(main_err::kGyroBias, main_err::kGyroBias) =
      bg_var * Eigen::Matrix3d::Identity();
  return out;
}

/// Error set rebuilt after a fallback interval: shared rows carry the
/// fallback set, attitude and bias rows restart at their initial bounds.
inline ErrorZonotope fallback_zono_to_main(const ErrorZonotope& e_fb, const PlConfig& cfg,
                                           const NoiseParams& np) {
  const std::vector<int> rows = fallback_rows_in_main();
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(main_err::kDim, e_fb.order() + 9);
  for (int i = 0; i < fallback_err::kDim; ++i) {
    gen.row(rows[static_cast<size_t>(i)]).head(e_fb.order()) = e_fb.generators.row(i);
  }
  int col = e_fb.order();
  for (int a = 0; a < 3; ++a) {
    gen(main_err::kAtt + a, col++) = cfg.n_sigma * np.sigma0_att_rad;
  }
  for (int a = 0; a < 3; ++a) {
    gen(main_err::kAccelBias + a, col++) = cfg.n_sigma * np.sigma0_accel_bias;
  }
  for (int a = 0; a < 3; ++a) {
    gen(main_err::kGyroBias + a, col++) = cfg.n_sigma * np.sigma0_gyro_bias;
  }
  return ErrorZonotope{reduce_generators(gen, cfg.order_q)};
}

}  // namespace detail

/// Closed-loop run over pre-synthesized streams: strapdown/uniform
/// propagation at the inertial rate, gated GNSS updates, vehicle-model fault
/// detection with supervised fallback, and the error-set recursion in
/// lockstep with whichever filter is active.
inline RunResult run_pipeline(const ScenarioConfig& cfg, const SensorStreams& streams,
                              const PipelineOptions& opt) {
  cfg.validate();
  if (!(opt.gamma_safety >= 1.0) || !(opt.gate_sigma > 0.0) || !(opt.n_sigma_z > 0.0)) {
    throw std::invalid_argument("PipelineOptions: inconsistent parameters");
  }
  const LocalFrame frame = LocalFrame::from_geodetic(cfg.origin);
  const double dt = cfg.imu_dt();
  const int n = cfg.imu_epochs();
  const NoiseParams assumed = cfg.assumed_noise();
  const bool ehf = opt.filter == PipelineOptions::FilterKind::kEhf;

  const FilterModel main_model = make_main_model(frame, assumed);
  const FilterModel fallback_model = make_fallback_model(frame, assumed);

  PlConfig pl_cfg;
  pl_cfg.order_q = opt.order_q;
  pl_cfg.n_sigma = opt.n_sigma_z;

  RunResult out;
  out.rows.reserve(static_cast<size_t>(n) + 1);
  if (opt.pl_enabled) {
    out.pl_step_seconds.reserve(static_cast<size_t>(n));
  }

  // Initial estimate: truth plus a draw at the true initial sigmas (clamped
  // in bounded-noise runs so the start lies inside the initial error set),
  // plus any configured deterministic yaw offset. The filter's assumed
  // initial covariance may legitimately disagree with this scatter.
  MainState init_truth =
      main_state_from_truth(streams.truth.front(), frame, streams.accel_bias_truth.front(),
                            streams.gyro_bias_truth.front(), streams.clock_bias_truth.front(),
                            streams.clock_drift_truth.front());
  MainState init = init_truth;
  {
    GaussianDraw init_noise(substream(cfg.seed, rng_stream::kInit), cfg.bounded_noise,
                            cfg.bound_sigma);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(main_err::kDim);
    if (opt.perturb_init && !cfg.noise_free) {
      const NoiseParams& np = cfg.noise;
      for (int a = 0; a < 3; ++a) delta(main_err::kPos + a) = init_noise(np.sigma0_pos(a));
      for (int a = 0; a < 3; ++a) delta(main_err::kVel + a) = init_noise(np.sigma0_vel);
      for (int a = 0; a < 3; ++a) delta(main_err::kAtt + a) = init_noise(np.sigma0_att_rad);
      for (int a = 0; a < 3; ++a) {
        delta(main_err::kAccelBias + a) = init_noise(np.sigma0_accel_bias);
      }
      for (int a = 0; a < 3; ++a) {
        delta(main_err::kGyroBias + a) = init_noise(np.sigma0_gyro_bias);
      }
      delta(main_err::kClockBias) = init_noise(np.sigma0_clock_bias_m);
      delta(main_err::kClockDrift) = init_noise(np.sigma0_clock_drift_mps);
    }
    delta(main_err::kAtt + 2) += cfg.yaw_init_error_rad();
    init = retract_main(init, delta, frame);
  }

  FilterEstimate main_est{init.to_vector(), assumed.initial_covariance_main(), 0};
  FilterEstimate fb_est;  // seeded on demand
  Supervisor supervisor(cfg.fd);
  Supervisor::Active active = Supervisor::Active::kMain;

  PlTracker tracker(pl_cfg, initial_error_zonotope_main(pl_cfg, assumed));

  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool gamma_chosen = false;
  bool last_feasible = true;

  // Bias estimates the detector compensates with; frozen while the inertial
  // filter is parked in a fallback interval.
  double fd_accel_bias = init.accel_bias.x();
  double fd_gyro_bias = init.gyro_bias.z();

  const double lp_tau = 0.5;
  const double lp_alpha = dt / (lp_tau + dt);
  double accel_margin_lp = 0.0, yaw_margin_lp = 0.0;
  bool lp_seeded = false;
  bool was_faulted = false;

  int divergence_run = 0;
  size_t gnss_cursor = 0;

  const auto record_epoch = [&](int k, const EpochRecord& fd_part) {
    EpochRecord row = fd_part;
    const TruthSample& tr = streams.truth[static_cast<size_t>(k)];
    row.t = k * dt;
    row.active = active == Supervisor::Active::kMain ? 0 : 1;
    if (active == Supervisor::Active::kMain) {
      const MainState s = MainState::from_vector(main_est.state);
      row.est_pos_ned = frame.ned_from_ecef(s.pos_ecef);
      row.est_vel_ned = s.vel_ned;
      row.est_yaw_rad = yaw_from_quat(s.att_bn);
      row.est_clock_bias_m = s.clock_bias_m;
      row.est_clock_drift_mps = s.clock_drift_mps;
    } else {
      const FallbackState s = FallbackState::from_vector(fb_est.state);
      const MainState parked = MainState::from_vector(main_est.state);
      row.est_pos_ned = frame.ned_from_ecef(s.pos_ecef);
      row.est_vel_ned = s.vel_ned;
      row.est_yaw_rad = yaw_from_quat(parked.att_bn);  // attitude is parked
      row.est_clock_bias_m = s.clock_bias_m;
      row.est_clock_drift_mps = s.clock_drift_mps;
    }
    row.true_pos_ned = tr.pos_ned;
    row.true_vel_ned = tr.vel_ned;
    row.true_yaw_rad = tr.yaw_rad;
    const Eigen::Vector3d err = row.est_pos_ned - tr.pos_ned;
    row.err_2d_m = err.head<2>().norm();
    row.err_3d_m = err.norm();
    if (opt.pl_enabled) {
      const std::vector<Interval> pl = tracker.position_pl();
      for (int a = 0; a < 3; ++a) {
        row.pl_m(a) = pl[static_cast<size_t>(a)].hi;
        if (std::abs(err(a)) > row.pl_m(a)) {
          row.pl_contained = false;
        }
      }
    }
    row.gamma = gamma;
    row.gamma_feasible = last_feasible;
    if (active == Supervisor::Active::kMain) {
      row.pos_sigma_m = std::sqrt(
          main_est.covariance.block<3, 3>(main_err::kPos, main_err::kPos).trace());
      row.yaw_sigma_rad =
          std::sqrt(main_est.covariance(main_err::kAtt + 2, main_err::kAtt + 2));
    } else {
      row.pos_sigma_m = std::sqrt(
          fb_est.covariance.block<3, 3>(fallback_err::kPos, fallback_err::kPos).trace());
    }
    out.rows.push_back(row);

    // Divergence watch: ten consecutive epochs out of bounds ends the run.
    if (!std::isfinite(row.err_3d_m) || row.err_3d_m > 1000.0) {
      ++divergence_run;
    } else {
      divergence_run = 0;
    }
    if (divergence_run >= 10) {
      out.diverged = true;
      out.divergence_t = row.t;
      out.events.push_back({row.t, "divergence", "position error out of bounds"});
      return false;
    }
    return true;
  };

  if (!record_epoch(0, EpochRecord{})) {
    return out;
  }

  for (int k = 1; k <= n; ++k) {
    const double t_sample = (k - 1) * dt;
    const ImuSample& imu = streams.imu[static_cast<size_t>(k - 1)];
    const ControlSample& ctrl = streams.controls[static_cast<size_t>(k - 1)];

    EpochRecord fd_part;

    // Fault detection sees the raw sample before any filter consumes it.
    bool faulted = false;
    if (opt.fd_enabled) {
      if (active == Supervisor::Active::kMain) {
        const MainState s = MainState::from_vector(main_est.state);
        fd_accel_bias = s.accel_bias.x();
        fd_gyro_bias = s.gyro_bias.z();
      }
      const InputIntervals in = input_intervals(ctrl, cfg.fd);
      const Interval accel_band =
          acceleration_threshold(in.speed_mps, in.current_a, cfg.vehicle);
      const Interval yaw_band =
          yaw_rate_threshold(in.speed_mps, in.steer_rad, cfg.vehicle);
      const CompensatedImu comp = compensated_imu(imu, fd_accel_bias, fd_gyro_bias);
      const FaultFlags flags = detect_fault(comp, accel_band, yaw_band);
      faulted = flags.any();

      fd_part.accel_fault = flags.accel_fault;
      fd_part.yaw_fault = flags.yaw_fault;
      fd_part.fd_accel_margin = detail::band_margin(comp.specific_force_x, accel_band);
      fd_part.fd_yaw_margin = detail::band_margin(comp.yaw_rate, yaw_band);
      if (!lp_seeded) {
        accel_margin_lp = fd_part.fd_accel_margin;
        yaw_margin_lp = fd_part.fd_yaw_margin;
        lp_seeded = true;
      } else {
        accel_margin_lp += lp_alpha * (fd_part.fd_accel_margin - accel_margin_lp);
        yaw_margin_lp += lp_alpha * (fd_part.fd_yaw_margin - yaw_margin_lp);
      }
      fd_part.fd_accel_margin_lp = accel_margin_lp;
      fd_part.fd_yaw_margin_lp = yaw_margin_lp;

      if (faulted && !was_faulted) {
        out.events.push_back({t_sample, "fault_detected",
                              flags.accel_fault ? "accel channel" : "yaw channel"});
      } else if (!faulted && was_faulted) {
        out.events.push_back({t_sample, "fault_cleared", ""});
      }
      was_faulted = faulted;

      const Supervisor::Active next = supervisor.step(t_sample, faulted);
      if (next != active) {
        if (next == Supervisor::Active::kFallback) {
          // Hand the shared states to the GNSS-only filter.
          const MainState s = MainState::from_vector(main_est.state);
          FallbackState f;
          f.pos_ecef = s.pos_ecef;
          f.vel_ned = s.vel_ned;
          f.clock_bias_m = s.clock_bias_m;
          f.clock_drift_mps = s.clock_drift_mps;
          fb_est = {f.to_vector(), detail::main_cov_to_fallback(main_est.covariance),
                    main_est.epoch};
          if (opt.pl_enabled) {
            tracker.replace(tracker.project(detail::fallback_rows_in_main()));
          }
          out.events.push_back({t_sample, "to_fallback", ""});
        } else {
          // Re-seed the inertial filter; attitude and biases resume from
          // their parked values with re-opened uncertainty.
          const FallbackState f = FallbackState::from_vector(fb_est.state);
          MainState s = MainState::from_vector(main_est.state);
          s.pos_ecef = f.pos_ecef;
          s.vel_ned = f.vel_ned;
          s.clock_bias_m = f.clock_bias_m;
          s.clock_drift_mps = f.clock_drift_mps;
          main_est = {s.to_vector(),
                      detail::fallback_cov_to_main(fb_est.covariance, assumed),
                      fb_est.epoch};
          if (opt.pl_enabled) {
            tracker.replace(
                detail::fallback_zono_to_main(tracker.error_set(), pl_cfg, assumed));
          }
          out.events.push_back({t_sample, "to_main", ""});
        }
        active = next;
      }
    }

    const auto pl_t0 = std::chrono::steady_clock::now();
    double pl_seconds = 0.0;
    const auto pl_mark = [&]() {
      pl_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - pl_t0)
                       .count();
    };

    try {
      // Time update of the active filter, mirrored by the error set.
      if (active == Supervisor::Active::kMain) {
        const PropagateResult pr =
            propagate(main_model, main_est, imu_input(imu), dt);
        main_est = pr.estimate;
        if (opt.pl_enabled) {
          tracker.on_propagate(pr.transition, pr.noise_map, main_model.process_noise(dt));
          pl_mark();
        }
      } else {
        const PropagateResult pr =
            propagate(fallback_model, fb_est, Eigen::VectorXd::Zero(0), dt);
        fb_est = pr.estimate;
        if (opt.pl_enabled) {
          tracker.on_propagate(pr.transition, pr.noise_map,
                               fallback_model.process_noise(dt));
          pl_mark();
        }
      }

      // Measurement update at GNSS epochs, innovation-gated row-wise.
      if (gnss_cursor < streams.gnss_epoch.size() &&
          streams.gnss_epoch[gnss_cursor] == k) {
        const std::vector<GnssObservation>& obs = streams.gnss[gnss_cursor];
        ++gnss_cursor;
        const bool on_main = active == Supervisor::Active::kMain;
        FilterEstimate& est = on_main ? main_est : fb_est;
        const FilterModel& model = on_main ? main_model : fallback_model;
        const Measurement full =
            on_main ? assemble_measurement_main(MainState::from_vector(est.state), obs,
                                                assumed, frame)
                    : assemble_measurement_fallback(FallbackState::from_vector(est.state),
                                                    obs, assumed, frame);
        const std::vector<int> keep =
            detail::gate_rows(full, est.covariance, opt.gate_sigma);
        fd_part.gnss_rows_total = static_cast<int>(full.observed.size());
        fd_part.gnss_rows_kept = static_cast<int>(keep.size());
        const int dropped = static_cast<int>(full.observed.size() - keep.size());
        if (dropped > 0) {
          out.gate_dropped_rows += dropped;
          out.events.push_back({k * dt, "rows_gated",
                                std::to_string(dropped) + " of " +
                                    std::to_string(full.observed.size()) + " rows"});
        }
        if (keep.empty()) {
          ++out.skipped_updates;
          out.events.push_back({k * dt, "update_skipped", "all rows gated"});
        } else {
          const Measurement meas = keep.size() == static_cast<size_t>(full.observed.size())
                                       ? full
                                       : detail::select_rows(full, keep);
          if (ehf) {
            if (!gamma_chosen && on_main) {
              gamma = select_gamma(est.covariance, meas.jacobian, meas.noise,
                                   opt.gamma_safety);
              gamma_chosen = true;
              out.events.push_back({k * dt, "gamma_selected", std::to_string(gamma)});
            }
            if (gamma_chosen) {
              last_feasible =
                  check_feasibility(est.covariance, meas.jacobian, meas.noise, gamma);
              if (!last_feasible) {
                ++out.feasibility_failures;
                while (!check_feasibility(est.covariance, meas.jacobian, meas.noise,
                                          gamma)) {
                  gamma *= 2.0;
                  ++out.gamma_doublings;
                }
                out.events.push_back({k * dt, "gamma_doubled", std::to_string(gamma)});
              }
              const UpdateResult ur = update_ehf(model, est, meas, gamma);
              est = ur.estimate;
              if (opt.pl_enabled) {
                const auto u_t0 = std::chrono::steady_clock::now();
                tracker.on_update(ur.gain, meas.jacobian, meas.noise);
                pl_seconds +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - u_t0)
                        .count();
              }
            } else {
              // No attenuation level yet (first update happened on the
              // fallback filter): behave as the limit case.
              const UpdateResult ur = update_ekf(model, est, meas);
              est = ur.estimate;
              if (opt.pl_enabled) {
                const auto u_t0 = std::chrono::steady_clock::now();
                tracker.on_update(ur.gain, meas.jacobian, meas.noise);
                pl_seconds +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - u_t0)
                        .count();
              }
            }
          } else {
            const UpdateResult ur = update_ekf(model, est, meas);
            est = ur.estimate;
            if (opt.pl_enabled) {
              const auto u_t0 = std::chrono::steady_clock::now();
              tracker.on_update(ur.gain, meas.jacobian, meas.noise);
              pl_seconds +=
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - u_t0)
                      .count();
            }
          }
        }
      }
    } catch (const FilterDivergence&) {
      out.diverged = true;
      out.divergence_t = k * dt;
      out.events.push_back({k * dt, "divergence", "non-finite filter state"});
      break;
    }

    if (opt.pl_enabled) {
      out.pl_step_seconds.push_back(pl_seconds);
    }
    if (!record_epoch(k, fd_part)) {
      break;
    }
  }

  out.gamma = gamma;
  return out;
}

/// Convenience wrapper that synthesizes the streams itself.
inline RunResult run_scenario(const ScenarioConfig& cfg, const PipelineOptions& opt) {
  return run_pipeline(cfg, synthesize(cfg), opt);
}

}  // namespace navint
