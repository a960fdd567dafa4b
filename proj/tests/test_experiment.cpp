#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spraypaint/errors.hpp"
#include "spraypaint/experiment.hpp"

using namespace spraypaint;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spraypaint_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_config() {
  ExperimentConfig c = preset_table1();
  c.patterns.resize(1);
  c.patterns[0].r = 0.16;
  c.patterns[0].L = 0.1;
  c.velocities = {0.15};
  c.write_traces = false;
  return c;
}

std::vector<double> read_column(const fs::path& file, int column) {
  std::ifstream in(file);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double v = 0.0;
    for (int i = 0; i <= column; ++i) ss >> v;
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST(Presets, PaperMatrices) {
  const ExperimentConfig t1 = preset("table1");
  EXPECT_EQ(t1.patterns.size() * t1.velocities.size() * t1.approaches.size(), 45u);
  EXPECT_EQ(t1.velocity_mode, VelocityMode::Spray);
  EXPECT_EQ(t1.patterns[2].r, 0.16);
  EXPECT_EQ(t1.patterns[2].L, 0.1);
  EXPECT_EQ(t1.velocities, (std::vector<double>{0.15, 0.10, 0.05}));
  EXPECT_EQ(preset("table2").velocity_mode, VelocityMode::EeAverage);
  EXPECT_THROW(preset("table3"), std::invalid_argument);
  EXPECT_NO_THROW(t1.validate());
}

TEST(Config, ValidationRejectsEmptyAndUnknown) {
  ExperimentConfig c = small_config();
  c.approaches.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.surface_name = "teapot";
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.velocities = {-0.1};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(run_matrix(c, 1), std::invalid_argument);
}

TEST(Config, JsonOverlay) {
  const nlohmann::json j = nlohmann::json::parse(R"({
    "patterns": [{"r": 0.1, "L": 0.2, "x0": 0.3, "y0": -0.5,
                  "q_init": [0.1, -1.5, 1.5, -1.5, -1.5, 0.0]}],
    "velocities": [0.12],
    "velocity_mode": "ee_average",
    "approaches": ["A", "C"],
    "surface": {"name": "paraboloid", "params": {}},
    "theta_deg": 25, "theta0_deg": 4,
    "smoothing": {"a": 90, "b": 0.04},
    "gains": {"lambda1": 0.5, "lambda2": [0.4, 0.4, 0.3, 0.2]},
    "k_bar_des": 0.25, "dt": 0.004, "convergence_phase": 2.0, "laps": 1,
    "output_dir": "elsewhere", "write_traces": false
  })");
  const ExperimentConfig c = config_from_json(j, preset_table1());
  ASSERT_EQ(c.patterns.size(), 1u);
  EXPECT_EQ(c.patterns[0].y0, -0.5);
  ASSERT_TRUE(c.patterns[0].q_init.has_value());
  EXPECT_EQ((*c.patterns[0].q_init)(1), -1.5);
  EXPECT_EQ(c.velocities, std::vector<double>{0.12});
  EXPECT_EQ(c.velocity_mode, VelocityMode::EeAverage);
  EXPECT_EQ(c.approaches, (std::vector<Approach>{Approach::A, Approach::C}));
  EXPECT_EQ(c.surface_name, "paraboloid");
  EXPECT_NEAR(c.controller.theta, 25 * std::numbers::pi / 180, 1e-15);
  EXPECT_NEAR(c.controller.theta0, 4 * std::numbers::pi / 180, 1e-15);
  EXPECT_EQ(c.controller.smoothing.a, 90.0);
  EXPECT_EQ(c.controller.smoothing.b, 0.04);
  EXPECT_EQ(c.controller.Lambda1, 0.5 * Eigen::Matrix3d::Identity());
  EXPECT_EQ(c.controller.Lambda2(3, 3), 0.2);
  EXPECT_EQ(c.sim.k_bar_des, 0.25);
  EXPECT_EQ(c.sim.dt, 0.004);
  EXPECT_EQ(c.sim.convergence_phase, 2.0);
  EXPECT_EQ(c.laps, 1);
  EXPECT_EQ(c.output_dir, "elsewhere");
  EXPECT_FALSE(c.write_traces);

  // Keys absent from the overlay keep the base values.
  const ExperimentConfig partial = config_from_json({{"velocities", {0.1}}}, preset_table2());
  EXPECT_EQ(partial.patterns.size(), 3u);
  EXPECT_EQ(partial.velocity_mode, VelocityMode::EeAverage);

  // Serialization round trip.
  const ExperimentConfig again = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
}

TEST(Config, JsonErrors) {
  EXPECT_THROW(config_from_json({{"approaches", {"Z"}}}), std::invalid_argument);
  EXPECT_THROW(config_from_json({{"velocity_mode", "fast"}}), std::invalid_argument);
  EXPECT_THROW(config_from_json({{"gains", {{"lambda2", {1, 2}}}}}), std::invalid_argument);
  EXPECT_THROW(config_from_json({{"velocities", "fast"}}), std::invalid_argument);
  EXPECT_THROW(config_from_json({{"patterns", {{{"r", 0.1}, {"q_init", {1, 2}}}}}}),
               std::invalid_argument);
}

TEST(Matrix, SingleStandardCell) {
  ExperimentConfig c = preset_table1();
  c.patterns.resize(1);
  c.velocities = {0.15};
  c.approaches = {Approach::ST};
  c.write_traces = false;
  const ComparisonReport r = run_matrix_serial(c);
  ASSERT_EQ(r.rows.size(), 1u);
  ASSERT_TRUE(r.rows[0].ok) << r.rows[0].error;
  EXPECT_NEAR(r.rows[0].time, 13.87, 0.02);
  EXPECT_EQ(r.rows[0].energy_proxy_pct_of_st, 100.0);
}

TEST(Matrix, StandardRowsNormalizeToExactlyHundred) {
  const ComparisonReport r = run_matrix(small_config(), 0);
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_TRUE(r.energy_normalized());
  for (const ReportRow& row : r.rows) {
    ASSERT_TRUE(row.ok) << row.error;
    ASSERT_TRUE(row.energy_proxy_pct_of_st.has_value());
    if (row.approach == Approach::ST) {
      EXPECT_EQ(*row.energy_proxy_pct_of_st, 100.0);
    } else {
      EXPECT_LT(*row.energy_proxy_pct_of_st, 100.0);
      EXPECT_LE(row.max_fov_deg, 20.1);
    }
  }
  EXPECT_TRUE(fov_violations(r).empty());
  EXPECT_EQ(report_to_json(r)["energy_unit"], "percent_of_ST");
}

TEST(Matrix, WithoutStandardEnergyIsAbsolute) {
  ExperimentConfig c = small_config();
  c.approaches = {Approach::A};
  const ComparisonReport r = run_matrix(c, 1);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_FALSE(r.rows[0].energy_proxy_pct_of_st.has_value());
  EXPECT_FALSE(r.energy_normalized());
  EXPECT_EQ(report_to_json(r)["energy_unit"], "absolute");
  EXPECT_NE(format_table(r).find("Eproxy[abs]"), std::string::npos);
}

TEST(Matrix, ParallelMatchesSerial) {
  ExperimentConfig c = small_config();
  c.velocities = {0.15, 0.05};
  const ComparisonReport serial = run_matrix_serial(c);
  EXPECT_EQ(run_matrix(c, 2), serial);
  EXPECT_EQ(run_matrix(c, 4), serial);
}

TEST(Matrix, FailedCellsAreRecorded) {
  ExperimentConfig c = small_config();
  PatternSpec unreachable;
  unreachable.x0 = 3.0;  // beyond the arm's reach
  c.patterns.push_back(unreachable);
  c.approaches = {Approach::ST, Approach::A};
  const ComparisonReport r = run_matrix(c, 1);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_TRUE(r.rows[0].ok);
  EXPECT_TRUE(r.rows[1].ok);
  EXPECT_FALSE(r.rows[2].ok);
  EXPECT_FALSE(r.rows[2].error.empty());
  EXPECT_FALSE(r.rows[3].ok);
  EXPECT_EQ(fov_violations(r).size(), 2u);
  EXPECT_NE(format_table(r).find("FAILED"), std::string::npos);
}

TEST(Matrix, TracesAndMetricsWritten) {
  ExperimentConfig c = small_config();
  c.approaches = {Approach::C};
  c.write_traces = true;
  c.output_dir = scratch_dir("traces").string();
  const ComparisonReport r = run_matrix(c, 1);
  ASSERT_TRUE(r.rows[0].ok) << r.rows[0].error;
  const fs::path trace = r.rows[0].trace_file;
  ASSERT_TRUE(fs::exists(trace));
  EXPECT_EQ(trace.filename().string(), "trace_r0.16_L0.10_v0.150_C.csv");
  const fs::path metrics = trace.parent_path() / "metrics_r0.16_L0.10_v0.150_C.json";
  ASSERT_TRUE(fs::exists(metrics));
  std::ifstream in(metrics);
  const nlohmann::json m = nlohmann::json::parse(in);
  EXPECT_NEAR(m["ee_path_length"].get<double>(), r.rows[0].path, 1e-12);
  fs::remove_all(c.output_dir);
}

TEST(Matrix, EqualSpeedCalibration) {
  ExperimentConfig c = small_config();
  c.velocities = {0.10};
  c.approaches = {Approach::ST, Approach::A};
  const ComparisonReport r = equal_speed_matrix(c, 1);
  EXPECT_EQ(r.velocity_mode, VelocityMode::EeAverage);
  const ReportRow* st = r.find(0, 0.10, Approach::ST);
  const ReportRow* a = r.find(0, 0.10, Approach::A);
  ASSERT_TRUE(st && a && st->ok && a->ok);
  EXPECT_EQ(st->U, 0.10);
  EXPECT_GT(a->U, 0.10);
  EXPECT_GE(a->calibration_runs, 2);
  EXPECT_LT(a->time, st->time);
  EXPECT_NEAR(a->avg_vel, 0.10, 0.001);
}

TEST(Report, JsonRoundTrip) {
  ExperimentConfig c = small_config();
  c.approaches = {Approach::ST, Approach::B};
  ComparisonReport r = run_matrix(c, 1);
  ReportRow failed;
  failed.pattern_index = 7;
  failed.approach = Approach::D;
  failed.error = "something \"quoted\"";
  r.rows.push_back(failed);
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(report_to_json(r).dump())), r);
}

TEST(Report, TableUsesTwoDecimalsWithPeriods) {
  ComparisonReport r;
  ReportRow row;
  row.ok = true;
  row.r = 0.07;
  row.L = 0.3;
  row.velocity = 0.15;
  row.U = 0.15;
  row.time = 13.8654;
  row.path = 2.08865;
  row.energy_proxy = 1.0;
  row.energy_proxy_pct_of_st = 100.0;
  row.approach = Approach::ST;
  r.rows.push_back(row);
  const std::string table = format_table(r);
  EXPECT_NE(table.find("13.87"), std::string::npos);
  EXPECT_NE(table.find("2.09"), std::string::npos);
  EXPECT_NE(table.find("100.00"), std::string::npos);
  EXPECT_EQ(table.find(','), std::string::npos);
}

TEST(Report, FovViolationThreshold) {
  ComparisonReport r;
  ReportRow row;
  row.ok = true;
  row.approach = Approach::A;
  row.max_fov_deg = 20.09;
  r.rows.push_back(row);
  EXPECT_TRUE(fov_violations(r).empty());
  r.rows[0].max_fov_deg = 20.11;
  EXPECT_EQ(fov_violations(r).size(), 1u);
  r.rows[0].approach = Approach::ST;  // ST has no FOV limit to check
  EXPECT_TRUE(fov_violations(r).empty());
}

TEST(PlotData, DegreesAndColumns) {
  const fs::path dir = scratch_dir("plot");
  fs::create_directories(dir);
  const fs::path trace = dir / "trace.csv";
  {
    std::vector<TraceRecord> recs(3);
    recs[0].sigma_fov = 0.0;
    recs[1].sigma_fov = std::sqrt(2 * (1 - std::cos(20 * std::numbers::pi / 180)));
    recs[1].mode = Mode::Mode2;
    recs[2].sigma_fov = 2.0;
    recs[2].mode = Mode::Standard;
    recs[2].qdot_des(4) = -0.25;
    for (int k = 0; k < 3; ++k) recs[k].t = 0.008 * k;
    std::ofstream out(trace);
    write_trace_csv(out, recs);
  }
  const std::vector<std::string> files = emit_plot_data(trace.string(), (dir / "out").string());
  ASSERT_EQ(files.size(), 4u);
  const std::vector<double> deg = read_column(dir / "out" / "fov.dat", 2);
  ASSERT_EQ(deg.size(), 3u);
  EXPECT_NEAR(deg[0], 0.0, 1e-9);
  EXPECT_NEAR(deg[1], 20.0, 1e-6);
  EXPECT_NEAR(deg[2], 180.0, 1e-9);
  EXPECT_EQ(read_column(dir / "out" / "mode.dat", 1), (std::vector<double>{1, 2, 0}));
  EXPECT_EQ(read_column(dir / "out" / "joint_velocities.dat", 5)[2], -0.25);
  fs::remove_all(dir);
}

TEST(PlotData, MalformedTrace) {
  const fs::path dir = scratch_dir("badplot");
  fs::create_directories(dir);
  const fs::path trace = dir / "trace.csv";
  {
    std::ofstream out(trace);
    out << trace_csv_header() << "\n1,2,3\n";
  }
  try {
    emit_plot_data(trace.string(), (dir / "out").string());
    ADD_FAILURE() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(emit_plot_data((dir / "missing.csv").string(), (dir / "out").string()), ParseError);
  fs::remove_all(dir);
}
