#pragma once

#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "navint/metrics.hpp"
#include "navint/pipeline.hpp"
#include "navint/simulator.hpp"
#include "navint/sweep.hpp"

// Writers for the harness output files. Every CSV has a fixed header row and
// the column order documented at its writer; numbers are written with
// round-trip precision so summaries recomputed from a row dump match the
// shipped summary exactly.

namespace navint {
namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("report_io: cannot open " + path);
  }
  out << std::setprecision(17);
  return out;
}

inline std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

}  // namespace detail

/// Per-epoch dump. Columns, in order:
///   t, active, est_pos_n, est_pos_e, est_pos_d, est_vel_n, est_vel_e,
///   est_vel_d, est_yaw_rad, est_clock_bias_m, est_clock_drift_mps,
///   true_pos_n, true_pos_e, true_pos_d, true_vel_n, true_vel_e, true_vel_d,
///   true_yaw_rad, err_2d_m, err_3d_m, pl_n_m, pl_e_m, pl_d_m, pl_contained,
///   accel_fault, yaw_fault, fd_accel_margin, fd_yaw_margin,
///   fd_accel_margin_lp, fd_yaw_margin_lp, gamma, gamma_feasible,
///   pos_sigma_m, yaw_sigma_rad, gnss_rows_kept, gnss_rows_total
inline void write_epochs_csv(const std::string& path, const std::vector<EpochRecord>& rows) {
  auto out = detail::open_out(path);
  out << "t,active,est_pos_n,est_pos_e,est_pos_d,est_vel_n,est_vel_e,est_vel_d,"
         "est_yaw_rad,est_clock_bias_m,est_clock_drift_mps,"
         "true_pos_n,true_pos_e,true_pos_d,true_vel_n,true_vel_e,true_vel_d,"
         "true_yaw_rad,err_2d_m,err_3d_m,pl_n_m,pl_e_m,pl_d_m,pl_contained,"
         "accel_fault,yaw_fault,fd_accel_margin,fd_yaw_margin,"
         "fd_accel_margin_lp,fd_yaw_margin_lp,gamma,gamma_feasible,"
         "pos_sigma_m,yaw_sigma_rad,gnss_rows_kept,gnss_rows_total\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.active << ',' << r.est_pos_ned.x() << ',' << r.est_pos_ned.y()
        << ',' << r.est_pos_ned.z() << ',' << r.est_vel_ned.x() << ',' << r.est_vel_ned.y()
        << ',' << r.est_vel_ned.z() << ',' << r.est_yaw_rad << ',' << r.est_clock_bias_m
        << ',' << r.est_clock_drift_mps << ',' << r.true_pos_ned.x() << ','
        << r.true_pos_ned.y() << ',' << r.true_pos_ned.z() << ',' << r.true_vel_ned.x()
        << ',' << r.true_vel_ned.y() << ',' << r.true_vel_ned.z() << ',' << r.true_yaw_rad
        << ',' << r.err_2d_m << ',' << r.err_3d_m << ',' << r.pl_m.x() << ',' << r.pl_m.y()
        << ',' << r.pl_m.z() << ',' << (r.pl_contained ? 1 : 0) << ','
        << (r.accel_fault ? 1 : 0) << ',' << (r.yaw_fault ? 1 : 0) << ','
        << r.fd_accel_margin << ',' << r.fd_yaw_margin << ',' << r.fd_accel_margin_lp << ','
        << r.fd_yaw_margin_lp << ',' << r.gamma << ',' << (r.gamma_feasible ? 1 : 0) << ','
        << r.pos_sigma_m << ',' << r.yaw_sigma_rad << ',' << r.gnss_rows_kept << ','
        << r.gnss_rows_total << '\n';
  }
}

/// Event log. Columns: t, kind, detail (kind/detail quoted).
inline void write_events_csv(const std::string& path, const std::vector<PipelineEvent>& events) {
  auto out = detail::open_out(path);
  out << "t,kind,detail\n";
  for (const auto& e : events) {
    out << e.t << ',' << detail::csv_quote(e.kind) << ',' << detail::csv_quote(e.detail)
        << '\n';
  }
}

/// One-line summary. Columns:
///   epochs, mean_2d_m, sigma_2d_m, rms_2d_m, p95_2d_m, mean_3d_m, sigma_3d_m,
///   rms_3d_m, p95_3d_m, pl_containment_rate, pl_epochs, pl_mean_n_m,
///   pl_mean_e_m, pl_mean_d_m, pl_step_median_s, pl_step_p95_s,
///   detection_latency_s, false_alarms, fallback_epochs, diverged,
///   divergence_t_s, gamma, feasibility_failures, gamma_doublings,
///   gate_dropped_rows, skipped_updates
/// detection_latency_s is the latency for the first injected fault window
/// (nan when nothing was injected or detected).
inline void write_run_summary_csv(const std::string& path, const RunSummary& s) {
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  auto out = detail::open_out(path);
  out << "epochs,mean_2d_m,sigma_2d_m,rms_2d_m,p95_2d_m,mean_3d_m,sigma_3d_m,rms_3d_m,"
         "p95_3d_m,pl_containment_rate,pl_epochs,pl_mean_n_m,pl_mean_e_m,pl_mean_d_m,"
         "pl_step_median_s,pl_step_p95_s,detection_latency_s,false_alarms,fallback_epochs,"
         "diverged,divergence_t_s,gamma,feasibility_failures,gamma_doublings,"
         "gate_dropped_rows,skipped_updates\n";
  out << s.err_2d.count << ',' << s.err_2d.mean << ',' << s.err_2d.sigma << ','
      << s.err_2d.rms << ',' << s.err_2d.p95 << ',' << s.err_3d.mean << ',' << s.err_3d.sigma
      << ',' << s.err_3d.rms << ',' << s.err_3d.p95 << ','
      << (s.has_pl ? s.pl.containment_rate : kNan) << ',' << (s.has_pl ? s.pl.epochs : 0)
      << ',' << (s.has_pl ? s.pl.mean_width.x() : kNan) << ','
      << (s.has_pl ? s.pl.mean_width.y() : kNan) << ','
      << (s.has_pl ? s.pl.mean_width.z() : kNan) << ',' << s.pl_step_median_s << ','
      << s.pl_step_p95_s << ','
      << (s.detection_latency_s.empty() ? kNan : s.detection_latency_s.front()) << ','
      << s.false_alarms << ',' << s.fallback_epochs << ',' << (s.diverged ? 1 : 0) << ','
      << s.divergence_t << ',' << s.gamma << ',' << s.feasibility_failures << ','
      << s.gamma_doublings << ',' << s.gate_dropped_rows << ',' << s.skipped_updates << '\n';
}

/// Human-readable companion to the summary CSV.
inline void print_run_summary(std::ostream& out, const RunSummary& s,
                              const std::string& title) {
  out << std::setprecision(6);
  out << "run: " << title << '\n';
  out << "epochs: " << s.err_2d.count << '\n';
  out << "horizontal error [m]: mean " << s.err_2d.mean << "  sigma " << s.err_2d.sigma
      << "  rms " << s.err_2d.rms << "  p95 " << s.err_2d.p95 << '\n';
  out << "3d error [m]: mean " << s.err_3d.mean << "  sigma " << s.err_3d.sigma << "  rms "
      << s.err_3d.rms << "  p95 " << s.err_3d.p95 << '\n';
  if (s.has_pl) {
    out << "protection level: containment " << s.pl.containment_rate << " over "
        << s.pl.epochs << " epochs\n";
    out << "  mean bound [m]: N " << s.pl.mean_width.x() << "  E " << s.pl.mean_width.y()
        << "  D " << s.pl.mean_width.z() << '\n';
    out << "  step time [s]: median " << s.pl_step_median_s << "  p95 " << s.pl_step_p95_s
        << '\n';
  } else {
    out << "protection level: off\n";
  }
  out << "detection: windows " << s.detection_latency_s.size() << "  latencies [s]:";
  if (s.detection_latency_s.empty()) {
    out << " none";
  } else {
    for (double l : s.detection_latency_s) {
      out << ' ' << l;
    }
  }
  out << "  false alarms " << s.false_alarms << '\n';
  out << "fallback epochs: " << s.fallback_epochs << '\n';
  out << "gamma: " << s.gamma << "  feasibility failures " << s.feasibility_failures
      << "  doublings " << s.gamma_doublings << '\n';
  out << "gating: dropped rows " << s.gate_dropped_rows << "  skipped updates "
      << s.skipped_updates << '\n';
  out << "diverged: " << (s.diverged ? "yes" : "no");
  if (s.diverged) {
    out << " at t=" << s.divergence_t;
  }
  out << '\n';
}

inline void write_run_summary_text(const std::string& path, const RunSummary& s,
                                   const std::string& title) {
  auto out = detail::open_out(path);
  print_run_summary(out, s, title);
}

/// Comparison-sweep table, one row per (setting, filter). Columns:
///   setting, filter, epochs, mean_2d_m, sigma_2d_m, rms_2d_m, p95_2d_m,
///   mean_3d_m, sigma_3d_m, rms_3d_m, p95_3d_m, diverged, divergence_t_s,
///   gamma, feasibility_failures, gamma_doublings, gate_dropped_rows,
///   skipped_updates, wall_s
inline void write_settings_csv(const std::string& path, const std::vector<SettingRun>& runs) {
  auto out = detail::open_out(path);
  out << "setting,filter,epochs,mean_2d_m,sigma_2d_m,rms_2d_m,p95_2d_m,mean_3d_m,"
         "sigma_3d_m,rms_3d_m,p95_3d_m,diverged,divergence_t_s,gamma,feasibility_failures,"
         "gamma_doublings,gate_dropped_rows,skipped_updates,wall_s\n";
  for (const auto& r : runs) {
    const RunSummary& s = r.summary;
    out << r.setting << ',' << r.filter << ',' << s.err_2d.count << ',' << s.err_2d.mean
        << ',' << s.err_2d.sigma << ',' << s.err_2d.rms << ',' << s.err_2d.p95 << ','
        << s.err_3d.mean << ',' << s.err_3d.sigma << ',' << s.err_3d.rms << ','
        << s.err_3d.p95 << ',' << (s.diverged ? 1 : 0) << ',' << s.divergence_t << ','
        << s.gamma << ',' << s.feasibility_failures << ',' << s.gamma_doublings << ','
        << s.gate_dropped_rows << ',' << s.skipped_updates << ',' << r.wall_s << '\n';
  }
}

/// Order-sweep table. Columns:
///   q, pl_mean_n_m, pl_mean_e_m, pl_mean_d_m, containment_rate,
///   step_median_s, step_p95_s, wall_s
inline void write_qsweep_csv(const std::string& path, const std::vector<QSweepPoint>& points) {
  auto out = detail::open_out(path);
  out << "q,pl_mean_n_m,pl_mean_e_m,pl_mean_d_m,containment_rate,step_median_s,step_p95_s,"
         "wall_s\n";
  for (const auto& p : points) {
    out << p.q << ',' << p.mean_width.x() << ',' << p.mean_width.y() << ','
        << p.mean_width.z() << ',' << p.containment_rate << ',' << p.step_median_s << ','
        << p.step_p95_s << ',' << p.wall_s << '\n';
  }
}

/// Text companion to the comparison table: settings as rows, the headline
/// horizontal RMS per filter side by side.
inline void write_settings_text(const std::string& path, const std::vector<SettingRun>& runs) {
  auto out = detail::open_out(path);
  out << std::setprecision(6);
  out << "comparison sweep (horizontal rms [m], * = diverged)\n";
  for (size_t i = 0; i + 1 < runs.size(); i += 2) {
    const SettingRun& ekf = runs[i];
    const SettingRun& ehf = runs[i + 1];
    out << "setting " << std::setw(2) << ekf.setting << ":  ekf " << ekf.summary.err_2d.rms
        << (ekf.summary.diverged ? "*" : "") << "  ehf " << ehf.summary.err_2d.rms
        << (ehf.summary.diverged ? "*" : "") << '\n';
  }
}

/// Raw stream dumps for a synthesized scenario. Files under `dir`:
///   truth.csv    t, pos_n, pos_e, pos_d, vel_n, vel_e, vel_d, yaw_rad,
///                speed_mps, accel_long_mps2, yaw_rate_radps, accel_bias_x,
///                accel_bias_y, accel_bias_z, gyro_bias_x, gyro_bias_y,
///                gyro_bias_z, clock_bias_m, clock_drift_mps
///   imu.csv      t, fx_mps2, fy_mps2, fz_mps2, wx_radps, wy_radps, wz_radps
///   controls.csv t, motor_current_a, steer_rad, speed_mps
///   gnss.csv     t, sat_id, pseudorange_m, deltarange_mps, cn0_dbhz,
///                sat_pos_ecef_x, sat_pos_ecef_y, sat_pos_ecef_z,
///                sat_vel_n, sat_vel_e, sat_vel_d
inline void write_streams_csv(const std::string& dir, const ScenarioConfig& cfg,
                              const SensorStreams& streams) {
  {
    auto out = detail::open_out(dir + "/truth.csv");
    out << "t,pos_n,pos_e,pos_d,vel_n,vel_e,vel_d,yaw_rad,speed_mps,accel_long_mps2,"
           "yaw_rate_radps,accel_bias_x,accel_bias_y,accel_bias_z,gyro_bias_x,gyro_bias_y,"
           "gyro_bias_z,clock_bias_m,clock_drift_mps\n";
    for (size_t i = 0; i < streams.truth.size(); ++i) {
      const TruthSample& s = streams.truth[i];
      const Eigen::Vector3d& ab = streams.accel_bias_truth[i];
      const Eigen::Vector3d& gb = streams.gyro_bias_truth[i];
      out << s.t << ',' << s.pos_ned.x() << ',' << s.pos_ned.y() << ',' << s.pos_ned.z()
          << ',' << s.vel_ned.x() << ',' << s.vel_ned.y() << ',' << s.vel_ned.z() << ','
          << s.yaw_rad << ',' << s.speed_mps << ',' << s.accel_long_mps2 << ','
          << s.yaw_rate_radps << ',' << ab.x() << ',' << ab.y() << ',' << ab.z() << ','
          << gb.x() << ',' << gb.y() << ',' << gb.z() << ',' << streams.clock_bias_truth[i]
          << ',' << streams.clock_drift_truth[i] << '\n';
    }
  }
  {
    auto out = detail::open_out(dir + "/imu.csv");
    out << "t,fx_mps2,fy_mps2,fz_mps2,wx_radps,wy_radps,wz_radps\n";
    for (const auto& s : streams.imu) {
      out << s.t << ',' << s.specific_force.x() << ',' << s.specific_force.y() << ','
          << s.specific_force.z() << ',' << s.angular_rate.x() << ',' << s.angular_rate.y()
          << ',' << s.angular_rate.z() << '\n';
    }
  }
  {
    auto out = detail::open_out(dir + "/controls.csv");
    out << "t,motor_current_a,steer_rad,speed_mps\n";
    for (const auto& s : streams.controls) {
      out << s.t << ',' << s.motor_current_a << ',' << s.steer_rad << ',' << s.speed_mps
          << '\n';
    }
  }
  {
    auto out = detail::open_out(dir + "/gnss.csv");
    out << "t,sat_id,pseudorange_m,deltarange_mps,cn0_dbhz,sat_pos_ecef_x,sat_pos_ecef_y,"
           "sat_pos_ecef_z,sat_vel_n,sat_vel_e,sat_vel_d\n";
    const double dt = cfg.imu_dt();
    for (size_t k = 0; k < streams.gnss_epoch.size(); ++k) {
      const double t = streams.gnss_epoch[k] * dt;
      for (const auto& ob : streams.gnss[k]) {
        out << t << ',' << ob.sat_id << ',' << ob.pseudorange_m << ',' << ob.deltarange_mps
            << ',' << ob.cn0_dbhz << ',' << ob.sat_pos_ecef.x() << ',' << ob.sat_pos_ecef.y()
            << ',' << ob.sat_pos_ecef.z() << ',' << ob.sat_vel_ned.x() << ','
            << ob.sat_vel_ned.y() << ',' << ob.sat_vel_ned.z() << '\n';
      }
    }
  }
}

}  // namespace navint
