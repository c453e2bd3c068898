#include "navint/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

using navint::EpochRecord;
using navint::PipelineEvent;
using navint::RunResult;
using navint::RunSummary;

namespace {

std::string temp_path(const std::string& name) { return testing::TempDir() + name; }

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

// Minimal CSV field splitter honoring double-quote escaping.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

RunResult synthetic_run() {
  RunResult r;
  for (int i = 0; i <= 40; ++i) {
    EpochRecord row;
    row.t = 0.1 * i;
    row.active = i > 30 ? 1 : 0;
    row.est_pos_ned = Eigen::Vector3d(0.3 * i, -0.1 * i, 0.05 * i);
    row.true_pos_ned = Eigen::Vector3d(0.3 * i + 0.01, -0.1 * i, 0.05 * i - 0.002);
    row.est_vel_ned = Eigen::Vector3d(1.0, 2.0, 0.0);
    row.true_vel_ned = row.est_vel_ned;
    row.est_yaw_rad = 0.01 * i;
    row.true_yaw_rad = 0.01 * i;
    const Eigen::Vector3d err = row.est_pos_ned - row.true_pos_ned;
    row.err_2d_m = err.head<2>().norm();
    row.err_3d_m = err.norm();
    row.pl_m = Eigen::Vector3d(1.0 + 0.001 * i, 1.0, 2.0);
    row.gamma = 23.5;
    row.gnss_rows_kept = 16;
    row.gnss_rows_total = 16;
    r.rows.push_back(row);
  }
  r.pl_step_seconds.assign(40, 0.0003);
  r.gamma = 23.5;
  return r;
}

TEST(ReportIoTest, EpochsCsvRoundTripsSummaryExactly) {
  const RunResult r = synthetic_run();
  const std::string path = temp_path("epochs.csv");
  navint::write_epochs_csv(path, r.rows);

  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), r.rows.size() + 1);
  const auto header = split_csv(lines[0]);
  ASSERT_EQ(header.size(), 36u);
  EXPECT_EQ(header.front(), "t");
  EXPECT_EQ(header.back(), "gnss_rows_total");

  // Rebuild the error/bound columns and check the summary reproduces.
  std::vector<EpochRecord> parsed;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    ASSERT_EQ(f.size(), header.size());
    EpochRecord row;
    row.t = std::stod(f[0]);
    row.est_pos_ned = Eigen::Vector3d(std::stod(f[2]), std::stod(f[3]), std::stod(f[4]));
    row.true_pos_ned = Eigen::Vector3d(std::stod(f[11]), std::stod(f[12]), std::stod(f[13]));
    row.err_2d_m = std::stod(f[18]);
    row.err_3d_m = std::stod(f[19]);
    row.pl_m = Eigen::Vector3d(std::stod(f[20]), std::stod(f[21]), std::stod(f[22]));
    row.active = std::stoi(f[1]);
    parsed.push_back(row);
  }
  const RunSummary direct = navint::summarize_run(r);
  RunResult reparsed;
  reparsed.rows = parsed;
  reparsed.pl_step_seconds = r.pl_step_seconds;
  reparsed.gamma = r.gamma;
  const RunSummary recomputed = navint::summarize_run(reparsed);
  EXPECT_EQ(direct.err_2d.mean, recomputed.err_2d.mean);
  EXPECT_EQ(direct.err_2d.rms, recomputed.err_2d.rms);
  EXPECT_EQ(direct.err_3d.p95, recomputed.err_3d.p95);
  EXPECT_EQ(direct.pl.containment_rate, recomputed.pl.containment_rate);
  EXPECT_EQ(direct.pl.mean_width.x(), recomputed.pl.mean_width.x());
  EXPECT_EQ(direct.fallback_epochs, recomputed.fallback_epochs);
}

TEST(ReportIoTest, EventsCsvQuotesDetails) {
  std::vector<PipelineEvent> events;
  events.push_back({1.5, "rows_gated", "kept 14, dropped 2 \"late\""});
  const std::string path = temp_path("events.csv");
  navint::write_events_csv(path, events);
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 2u);
  const auto f = split_csv(lines[1]);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1], "rows_gated");
  EXPECT_EQ(f[2], "kept 14, dropped 2 \"late\"");
}

TEST(ReportIoTest, SummaryCsvHasOneRowMatchingHeader) {
  const RunSummary s = navint::summarize_run(synthetic_run());
  const std::string path = temp_path("summary.csv");
  navint::write_run_summary_csv(path, s);
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 2u);
  const auto header = split_csv(lines[0]);
  const auto row = split_csv(lines[1]);
  ASSERT_EQ(header.size(), 26u);
  ASSERT_EQ(row.size(), header.size());
  EXPECT_EQ(std::stoi(row[0]), s.err_2d.count);
  EXPECT_EQ(std::stod(row[3]), s.err_2d.rms);
  EXPECT_EQ(std::stod(row[9]), s.pl.containment_rate);
}

TEST(ReportIoTest, SummaryTextMentionsKeyBlocks) {
  const RunSummary s = navint::summarize_run(synthetic_run());
  const std::string path = temp_path("summary.txt");
  navint::write_run_summary_text(path, s, "unit");
  std::stringstream all;
  for (const auto& l : read_lines(path)) all << l << '\n';
  const std::string text = all.str();
  EXPECT_NE(text.find("horizontal error"), std::string::npos);
  EXPECT_NE(text.find("protection level"), std::string::npos);
  EXPECT_NE(text.find("gamma"), std::string::npos);
  EXPECT_NE(text.find("diverged: no"), std::string::npos);
}

TEST(ReportIoTest, SweepTables) {
  navint::SettingRun a;
  a.setting = 1;
  a.filter = "ekf";
  a.summary = navint::summarize_run(synthetic_run());
  a.wall_s = 0.5;
  navint::SettingRun b = a;
  b.filter = "ehf";
  const std::string path = temp_path("settings.csv");
  navint::write_settings_csv(path, {a, b});
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 3u);
  ASSERT_EQ(split_csv(lines[0]).size(), 19u);
  EXPECT_EQ(split_csv(lines[1])[1], "ekf");
  EXPECT_EQ(split_csv(lines[2])[1], "ehf");

  navint::QSweepPoint p;
  p.q = 1000;
  p.mean_width = Eigen::Vector3d(3.0, 3.0, 6.0);
  p.containment_rate = 1.0;
  p.step_median_s = 0.0003;
  p.step_p95_s = 0.0005;
  p.wall_s = 1.0;
  const std::string qpath = temp_path("q_sweep.csv");
  navint::write_qsweep_csv(qpath, {p});
  const auto qlines = read_lines(qpath);
  ASSERT_EQ(qlines.size(), 2u);
  ASSERT_EQ(split_csv(qlines[0]).size(), 8u);
  EXPECT_EQ(std::stod(split_csv(qlines[1])[1]), 3.0);
}

TEST(ReportIoTest, StreamDumpShapes) {
  navint::ScenarioConfig cfg = navint::nominal_scenario();
  cfg.segments = {navint::TrajectorySegment::dwell(1.0),
                  navint::TrajectorySegment::ramp(1.0, 3.0)};
  const auto streams = navint::synthesize(cfg);
  const std::string dir = testing::TempDir() + "streams";
  std::filesystem::create_directories(dir);
  navint::write_streams_csv(dir, cfg, streams);

  EXPECT_EQ(read_lines(dir + "/truth.csv").size(), streams.truth.size() + 1);
  EXPECT_EQ(read_lines(dir + "/imu.csv").size(), streams.imu.size() + 1);
  EXPECT_EQ(read_lines(dir + "/controls.csv").size(), streams.controls.size() + 1);
  size_t obs = 0;
  for (const auto& epoch : streams.gnss) obs += epoch.size();
  EXPECT_EQ(read_lines(dir + "/gnss.csv").size(), obs + 1);
}

TEST(ReportIoTest, UnwritablePathRejected) {
  EXPECT_THROW(navint::write_events_csv("/nonexistent-dir/events.csv", {}),
               std::runtime_error);
}

}  // namespace
