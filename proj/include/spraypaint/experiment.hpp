#pragma once
// Experiment matrix runner: patterns x velocities x approaches.
//
// Cells are independent simulations. run_matrix spreads them over an OpenMP
// team; run_matrix_serial is the single-threaded reference used by the tests
// and the benchmark. Both produce identical reports for identical configs.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spraypaint/simulator.hpp"

namespace spraypaint {

struct PatternSpec {
  double r = 0.07;
  double L = 0.3;
  double x0 = 0.35;
  double y0 = -0.55;
  std::optional<Vector6d> q_init;  // solved by DLS IK when absent
};

enum class VelocityMode {
  Spray,      // velocities are spray speeds U
  EeAverage,  // velocities are target average end-effector speeds
};

struct ExperimentConfig {
  std::vector<PatternSpec> patterns;
  std::vector<double> velocities;
  VelocityMode velocity_mode = VelocityMode::Spray;
  std::vector<Approach> approaches;
  std::string surface_name = "flat";
  std::map<std::string, double> surface_params{{"c", -0.45}};
  ControllerConfig controller;  // approach field is overridden per cell
  SimConfig sim;                // q_init is overridden per pattern
  int laps = 2;
  std::string output_dir = "out";
  bool write_traces = true;

  // Throws std::invalid_argument on empty lists or unresolvable names.
  void validate() const;
};

// Paper matrices: 3 patterns x 3 velocities x {ST, A, B, C, D}.
ExperimentConfig preset_table1();
ExperimentConfig preset_table2();
// "table1" or "table2"; throws std::invalid_argument otherwise.
ExperimentConfig preset(const std::string& name);

// Overlay keys present in `j` onto `base`. Throws std::invalid_argument on
// malformed values.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ReportRow {
  int pattern_index = 0;
  double r = 0.0;
  double L = 0.0;
  double velocity = 0.0;  // as given in the config (U or target ee speed)
  Approach approach = Approach::ST;
  bool ok = false;
  std::string error;
  double U = 0.0;  // spray speed actually used
  int calibration_runs = 0;
  double time = 0.0;
  double path = 0.0;
  double avg_vel = 0.0;
  double energy_proxy = 0.0;
  std::optional<double> energy_proxy_pct_of_st;
  double max_fov_deg = 0.0;
  double max_joint_accel = 0.0;
  double max_tracking_error = 0.0;
  bool safety_stop = false;
  std::string trace_file;

  bool operator==(const ReportRow&) const = default;
};

struct ComparisonReport {
  VelocityMode velocity_mode = VelocityMode::Spray;
  double theta_deg = 20.0;
  std::vector<ReportRow> rows;

  // True when energy is expressed relative to ST (an ST row exists per group).
  bool energy_normalized() const;
  const ReportRow* find(int pattern_index, double velocity, Approach approach) const;
  bool operator==(const ComparisonReport&) const = default;
};

// One cell. Errors are captured in the row, never thrown.
ReportRow run_cell(const ExperimentConfig& config, int pattern_index, double velocity,
                   Approach approach);

ComparisonReport run_matrix(const ExperimentConfig& config, int jobs);
ComparisonReport run_matrix_serial(const ExperimentConfig& config);
// run_matrix with velocities interpreted as target average ee speeds.
ComparisonReport equal_speed_matrix(ExperimentConfig config, int jobs);

nlohmann::json report_to_json(const ComparisonReport& report);
ComparisonReport report_from_json(const nlohmann::json& j);
// Human-readable table, two decimals, period separators.
std::string format_table(const ComparisonReport& report);

// FOV limit check for every set-based row: max_fov_deg <= theta + 0.1 deg.
// Failed cells also count as violations.
std::vector<std::string> fov_violations(const ComparisonReport& report);

// Columnar plot data derived from a trace CSV: path3d.dat, mode.dat, fov.dat,
// joint_velocities.dat. Returns the written paths. Throws ParseError.
std::vector<std::string> emit_plot_data(const std::string& trace_file,
                                        const std::string& out_dir);

}  // namespace spraypaint
