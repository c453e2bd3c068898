#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "navint/interval.hpp"
#include "navint/pipeline.hpp"
#include "navint/scenario.hpp"

// Metrics over a completed run. Every summary quantity is a pure function of
// the per-epoch rows (plus the run's own counters), so a summary shipped next
// to a row dump can always be recomputed from it and checked.

namespace navint {

/// Mean / population standard deviation / RMS / nearest-rank 95th percentile
/// of one scalar series.
struct ErrorSummary {
  double mean = 0.0;
  double sigma = 0.0;
  double rms = 0.0;
  double p95 = 0.0;
  int count = 0;
};

/// Nearest-rank percentile: the ceil(p*n)-th smallest sample, no interpolation.
inline double nearest_rank(std::vector<double> xs, double p) {
  if (xs.empty()) {
    throw std::invalid_argument("nearest_rank: empty series");
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument("nearest_rank: p must be in (0, 1]");
  }
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  const auto rank = static_cast<size_t>(std::ceil(p * n));  // 1-based
  return xs[rank - 1];
}

inline ErrorSummary summarize(const std::vector<double>& xs) {
  if (xs.empty()) {
    throw std::invalid_argument("summarize: empty series");
  }
  ErrorSummary s;
  s.count = static_cast<int>(xs.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : xs) {
    sum += x;
    sum_sq += x * x;
  }
  const double n = static_cast<double>(xs.size());
  s.mean = sum / n;
  s.rms = std::sqrt(sum_sq / n);
  // Population variance via E[x^2] - E[x]^2, clamped against tiny negative
  // round-off on near-constant series.
  s.sigma = std::sqrt(std::max(0.0, sum_sq / n - s.mean * s.mean));
  s.p95 = nearest_rank(xs, 0.95);
  return s;
}

inline std::vector<double> errors_2d(const std::vector<EpochRecord>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back(r.err_2d_m);
  }
  return out;
}

inline std::vector<double> errors_3d(const std::vector<EpochRecord>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back(r.err_3d_m);
  }
  return out;
}

inline ErrorSummary summarize_2d(const std::vector<EpochRecord>& rows) {
  return summarize(errors_2d(rows));
}

inline ErrorSummary summarize_3d(const std::vector<EpochRecord>& rows) {
  return summarize(errors_3d(rows));
}

/// RMS of the horizontal error restricted to epochs with t in [t0, t1].
inline double window_rms_2d(const std::vector<EpochRecord>& rows, double t0, double t1) {
  double sum_sq = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.t >= t0 && r.t <= t1) {
      sum_sq += r.err_2d_m * r.err_2d_m;
      ++n;
    }
  }
  if (n == 0) {
    throw std::invalid_argument("window_rms_2d: no epochs in window");
  }
  return std::sqrt(sum_sq / n);
}

/// Protection-level consistency over the epochs that carry a bound: the
/// fraction where the true error is inside the bound on every axis, and the
/// mean per-axis bound.
struct PlConsistency {
  double containment_rate = 0.0;
  Eigen::Vector3d mean_width = Eigen::Vector3d::Zero();
  int epochs = 0;
};

inline PlConsistency pl_consistency(const std::vector<EpochRecord>& rows) {
  PlConsistency out;
  Eigen::Vector3d width_sum = Eigen::Vector3d::Zero();
  int contained = 0;
  for (const auto& r : rows) {
    if (!r.pl_m.allFinite()) {
      continue;
    }
    const Eigen::Vector3d err = r.est_pos_ned - r.true_pos_ned;
    bool ok = true;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(err(a)) > r.pl_m(a)) {
        ok = false;
      }
    }
    contained += ok ? 1 : 0;
    width_sum += r.pl_m;
    ++out.epochs;
  }
  if (out.epochs == 0) {
    throw std::invalid_argument("pl_consistency: no epoch carries a protection level");
  }
  out.containment_rate = static_cast<double>(contained) / out.epochs;
  out.mean_width = width_sum / out.epochs;
  return out;
}

/// Detection timing against known injected-fault windows. An alarm edge is an
/// epoch where the detector flag turns on. Edges are attributed to a window if
/// they fall inside it or within a short holdover after it (the detector's
/// low-pass smoothing keeps flags up briefly past the physical fault); all
/// other edges are false alarms.
struct DetectionTiming {
  std::vector<double> latency_s;  // per window; NaN where never detected
  int false_alarms = 0;
  int detected_windows = 0;
};

inline DetectionTiming detection_timing(const std::vector<EpochRecord>& rows,
                                        const std::vector<Interval>& fault_windows,
                                        double holdover_s = 1.0) {
  DetectionTiming out;
  out.latency_s.assign(fault_windows.size(),
                       std::numeric_limits<double>::quiet_NaN());
  bool prev = false;
  for (const auto& r : rows) {
    const bool flag = r.accel_fault || r.yaw_fault;
    if (flag && !prev) {
      bool attributed = false;
      for (size_t w = 0; w < fault_windows.size(); ++w) {
        const Interval& win = fault_windows[w];
        if (r.t >= win.lo && r.t <= win.hi + holdover_s) {
          attributed = true;
          if (std::isnan(out.latency_s[w])) {
            out.latency_s[w] = r.t - win.lo;
          }
          break;
        }
      }
      if (!attributed) {
        ++out.false_alarms;
      }
    }
    prev = flag;
  }
  for (double l : out.latency_s) {
    if (!std::isnan(l)) {
      ++out.detected_windows;
    }
  }
  return out;
}

/// Time windows of the physically injected sensor faults in a scenario.
inline std::vector<Interval> burst_windows(const ScenarioConfig& cfg) {
  std::vector<Interval> out;
  for (const auto& f : cfg.faults) {
    if (f.kind == FaultInjection::Kind::kImuNoiseBurst) {
      out.push_back(Interval(f.start_s, f.stop_s));
    }
  }
  return out;
}

/// Everything the harness reports about one run.
struct RunSummary {
  ErrorSummary err_2d;
  ErrorSummary err_3d;

  bool has_pl = false;
  PlConsistency pl;
  double pl_step_median_s = std::numeric_limits<double>::quiet_NaN();
  double pl_step_p95_s = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> detection_latency_s;  // one per injected burst window
  int false_alarms = 0;

  int fallback_epochs = 0;
  bool diverged = false;
  double divergence_t = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  int feasibility_failures = 0;
  int gamma_doublings = 0;
  int gate_dropped_rows = 0;
  int skipped_updates = 0;
};

inline RunSummary summarize_run(const RunResult& r,
                                const std::vector<Interval>& fault_windows = {}) {
  if (r.rows.empty()) {
    throw std::invalid_argument("summarize_run: run has no rows");
  }
  RunSummary s;
  s.err_2d = summarize_2d(r.rows);
  s.err_3d = summarize_3d(r.rows);
  bool any_pl = false;
  for (const auto& row : r.rows) {
    if (row.pl_m.allFinite()) {
      any_pl = true;
    }
    if (row.active != 0) {
      ++s.fallback_epochs;
    }
  }
  if (any_pl) {
    s.has_pl = true;
    s.pl = pl_consistency(r.rows);
  }
  if (!r.pl_step_seconds.empty()) {
    s.pl_step_median_s = nearest_rank(r.pl_step_seconds, 0.5);
    s.pl_step_p95_s = nearest_rank(r.pl_step_seconds, 0.95);
  }
  const DetectionTiming dt = detection_timing(r.rows, fault_windows);
  s.detection_latency_s = dt.latency_s;
  s.false_alarms = dt.false_alarms;
  s.diverged = r.diverged;
  s.divergence_t = r.divergence_t;
  s.gamma = r.gamma;
  s.feasibility_failures = r.feasibility_failures;
  s.gamma_doublings = r.gamma_doublings;
  s.gate_dropped_rows = r.gate_dropped_rows;
  s.skipped_updates = r.skipped_updates;
  return s;
}

}  // namespace navint
