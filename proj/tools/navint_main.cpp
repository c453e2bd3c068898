#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navint/metrics.hpp"
#include "navint/pipeline.hpp"
#include "navint/report_io.hpp"
#include "navint/scenario.hpp"
#include "navint/simulator.hpp"
#include "navint/sweep.hpp"

namespace {

using navint::PipelineOptions;
using navint::ScenarioConfig;

struct RunArgs {
  std::string scenario_path;
  std::string filter = "ehf";
  std::string fd = "on";
  int q = 4000;
  double n_sigma_z = 3.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
};

int do_run(const RunArgs& a) {
  ScenarioConfig cfg = navint::load_scenario(a.scenario_path);
  if (a.seed_set) {
    cfg.seed = a.seed;
  }
  PipelineOptions opt;
  opt.filter = a.filter == "ekf" ? PipelineOptions::FilterKind::kEkf
                                 : PipelineOptions::FilterKind::kEhf;
  opt.fd_enabled = a.fd == "on";
  opt.order_q = a.q;
  opt.n_sigma_z = a.n_sigma_z;
  const navint::RunResult r = navint::run_scenario(cfg, opt);
  const navint::RunSummary s = navint::summarize_run(r, navint::burst_windows(cfg));
  const std::string title = cfg.name + " [" + a.filter + ", fd " + a.fd + "]";
  navint::print_run_summary(std::cout, s, title);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    navint::write_epochs_csv(a.out_dir + "/epochs.csv", r.rows);
    navint::write_events_csv(a.out_dir + "/events.csv", r.events);
    navint::write_run_summary_csv(a.out_dir + "/summary.csv", s);
    navint::write_run_summary_text(a.out_dir + "/summary.txt", s, title);
    std::cout << "wrote epochs.csv, events.csv, summary.csv, summary.txt to " << a.out_dir
              << '\n';
  }
  return 0;
}

int do_sweep(const std::string& spec_path, const std::string& out_dir) {
  const navint::SweepSpec spec = navint::load_sweep_spec(spec_path);
  std::filesystem::create_directories(out_dir);
  const PipelineOptions opt;  // per-run filter/fd/pl settings applied inside
  const auto runs = navint::settings_sweep(spec.base, opt, spec.settings);
  navint::write_settings_csv(out_dir + "/settings.csv", runs);
  navint::write_settings_text(out_dir + "/settings.txt", runs);
  std::cout << "wrote settings.csv, settings.txt to " << out_dir << '\n';
  if (!spec.q_values.empty()) {
    const auto points = navint::q_sweep(spec.base, opt, spec.q_values);
    navint::write_qsweep_csv(out_dir + "/q_sweep.csv", points);
    std::cout << "wrote q_sweep.csv to " << out_dir << '\n';
  }
  return 0;
}

int do_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const ScenarioConfig cfg = navint::load_scenario(scenario_path);
  const navint::SensorStreams streams = navint::synthesize(cfg);
  std::filesystem::create_directories(out_dir);
  navint::write_streams_csv(out_dir, cfg, streams);
  std::cout << "wrote truth.csv, imu.csv, controls.csv, gnss.csv to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS/inertial navigation toolkit: run, compare, and dump scenarios"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one scenario through the full pipeline");
  run->add_option("scenario", run_args.scenario_path, "Scenario JSON file")->required();
  run->add_option("--filter", run_args.filter, "Estimator to use")
      ->check(CLI::IsMember({"ekf", "ehf"}));
  run->add_option("--fd", run_args.fd, "Fault detection and fallback supervision")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--q", run_args.q, "Error-set reduction order")
      ->check(CLI::Range(17, 1000000));
  run->add_option("--n-sigma-z", run_args.n_sigma_z, "Noise-bound width in sigmas")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", run_args.seed, "Override the scenario seed");
  run->add_option("--out", run_args.out_dir, "Directory for CSV/text reports");

  std::string sweep_spec_path;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run a comparison / order sweep from a spec file");
  sweep->add_option("spec", sweep_spec_path, "Sweep spec JSON file")->required();
  sweep->add_option("--out", sweep_out, "Directory for sweep tables")->required();

  std::string sim_scenario_path;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Synthesize sensor streams and dump them");
  simulate->add_option("scenario", sim_scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--out", sim_out, "Directory for stream CSVs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      run_args.seed_set = seed_opt->count() > 0;
      return do_run(run_args);
    }
    if (sweep->parsed()) {
      return do_sweep(sweep_spec_path, sweep_out);
    }
    if (simulate->parsed()) {
      return do_simulate(sim_scenario_path, sim_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
