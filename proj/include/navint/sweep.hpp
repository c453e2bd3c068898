#pragma once

#include <chrono>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "navint/metrics.hpp"
#include "navint/pipeline.hpp"
#include "navint/scenario.hpp"
#include "navint/simulator.hpp"

// Batch drivers: the seven-setting filter comparison (both filters on the
// same data per setting) and the reduction-order sweep for the error-set
// recursion (bound tightness and runtime versus order).

namespace navint {

/// Estimator corruption per comparison setting. Setting 1 is the clean
/// reference; 2/3 start the attitude 30/60 degrees off; 4/5 falsify the
/// measurement error-model parameters high/low; 6/7 falsify the initial
/// position uncertainty small/large. The physical data stream is identical
/// across all seven.
inline ScenarioConfig apply_setting(ScenarioConfig base, int setting) {
  switch (setting) {
    case 1:
      break;
    case 2:
      base.faults.push_back(FaultInjection::yaw_init_error(30.0));
      break;
    case 3:
      base.faults.push_back(FaultInjection::yaw_init_error(60.0));
      break;
    case 4:
      base.faults.push_back(
          FaultInjection::param_falsification({{"c_rho_m", 180.0}, {"c_d_mps", 6.0}}));
      break;
    case 5:
      base.faults.push_back(
          FaultInjection::param_falsification({{"c_rho_m", 30.0}, {"c_d_mps", 1.0}}));
      break;
    case 6:
      base.faults.push_back(FaultInjection::param_falsification(
          {{"sigma0_pos_n", 0.02}, {"sigma0_pos_e", 0.02}, {"sigma0_pos_d", 0.05}}));
      break;
    case 7:
      base.faults.push_back(FaultInjection::param_falsification(
          {{"sigma0_pos_n", 1.0}, {"sigma0_pos_e", 1.0}, {"sigma0_pos_d", 2.0}}));
      break;
    default:
      throw std::invalid_argument("apply_setting: setting must be 1..7");
  }
  base.name += "-s" + std::string(setting < 10 ? "0" : "") + std::to_string(setting);
  return base;
}

struct SettingRun {
  int setting = 0;
  std::string filter;  // "ekf" or "ehf"
  RunSummary summary;
  double wall_s = 0.0;
};

/// Run every requested setting under both filters on identical streams.
/// Detection and the error-set recursion stay off: the comparison isolates
/// estimation behavior. A diverged run is summarized like any other (its
/// errors speak for themselves) and the sweep continues.
inline std::vector<SettingRun> settings_sweep(const ScenarioConfig& base,
                                              const PipelineOptions& base_opt,
                                              const std::vector<int>& settings = {1, 2, 3, 4,
                                                                                  5, 6, 7}) {
  std::vector<SettingRun> out;
  for (int s : settings) {
    const ScenarioConfig cfg = apply_setting(base, s);
    const SensorStreams streams = synthesize(cfg);
    for (const bool ehf : {false, true}) {
      PipelineOptions opt = base_opt;
      opt.filter = ehf ? PipelineOptions::FilterKind::kEhf : PipelineOptions::FilterKind::kEkf;
      opt.fd_enabled = false;
      opt.pl_enabled = false;
      const auto t0 = std::chrono::steady_clock::now();
      const RunResult r = run_pipeline(cfg, streams, opt);
      const auto t1 = std::chrono::steady_clock::now();
      SettingRun row;
      row.setting = s;
      row.filter = ehf ? "ehf" : "ekf";
      row.summary = summarize_run(r);
      row.wall_s = std::chrono::duration<double>(t1 - t0).count();
      out.push_back(std::move(row));
    }
  }
  return out;
}

struct QSweepPoint {
  int q = 0;
  Eigen::Vector3d mean_width = Eigen::Vector3d::Zero();
  double containment_rate = 0.0;
  double step_median_s = 0.0;
  double step_p95_s = 0.0;
  double wall_s = 0.0;
};

/// Re-run one scenario with the error-set recursion at each reduction order.
inline std::vector<QSweepPoint> q_sweep(const ScenarioConfig& cfg,
                                        const PipelineOptions& base_opt,
                                        const std::vector<int>& q_values) {
  if (q_values.empty()) {
    throw std::invalid_argument("q_sweep: no orders requested");
  }
  const SensorStreams streams = synthesize(cfg);
  std::vector<QSweepPoint> out;
  for (int q : q_values) {
    PipelineOptions opt = base_opt;
    opt.pl_enabled = true;
    opt.order_q = q;
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run_pipeline(cfg, streams, opt);
    const auto t1 = std::chrono::steady_clock::now();
    const RunSummary s = summarize_run(r);
    QSweepPoint p;
    p.q = q;
    p.mean_width = s.pl.mean_width;
    p.containment_rate = s.pl.containment_rate;
    p.step_median_s = s.pl_step_median_s;
    p.step_p95_s = s.pl_step_p95_s;
    p.wall_s = std::chrono::duration<double>(t1 - t0).count();
    out.push_back(p);
  }
  return out;
}

/// Batch description loaded from a JSON file: the base scenario (inline
/// object or path relative to the spec file), which comparison settings to
/// run, and which reduction orders to sweep (empty list skips the q sweep).
struct SweepSpec {
  ScenarioConfig base;
  std::vector<int> settings = {1, 2, 3, 4, 5, 6, 7};
  std::vector<int> q_values;
};

inline SweepSpec sweep_spec_from_json(const nlohmann::json& j, const std::string& base_dir) {
  SweepSpec spec;
  if (!j.contains("base_scenario")) {
    throw std::invalid_argument("sweep spec: missing base_scenario");
  }
  const auto& base = j.at("base_scenario");
  if (base.is_string()) {
    std::string path = base.get<std::string>();
    if (!path.empty() && path.front() != '/' && !base_dir.empty()) {
      path = base_dir + "/" + path;
    }
    spec.base = load_scenario(path);
  } else if (base.is_object()) {
    spec.base = scenario_from_json(base);
    spec.base.validate();
  } else {
    throw std::invalid_argument("sweep spec: base_scenario must be a path or an object");
  }
  if (j.contains("settings")) {
    spec.settings = j.at("settings").get<std::vector<int>>();
    if (spec.settings.empty()) {
      throw std::invalid_argument("sweep spec: settings list is empty");
    }
    for (int s : spec.settings) {
      if (s < 1 || s > 7) {
        throw std::invalid_argument("sweep spec: settings must be in 1..7");
      }
    }
  }
  if (j.contains("q_values")) {
    spec.q_values = j.at("q_values").get<std::vector<int>>();
    for (int q : spec.q_values) {
      if (q < 17) {
        throw std::invalid_argument("sweep spec: q_values must be at least the state dimension");
      }
    }
  }
  return spec;
}

inline SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_sweep_spec: cannot open " + path);
  }
  nlohmann::json j;
  in >> j;
  const auto slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "" : path.substr(0, slash);
  return sweep_spec_from_json(j, dir);
}

}  // namespace navint
