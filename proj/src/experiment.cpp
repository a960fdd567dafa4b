#include "spraypaint/experiment.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "spraypaint/errors.hpp"

namespace spraypaint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ExperimentConfig paper_matrix() {
  auto pattern = [](double r, double L) {
    PatternSpec spec;
    spec.r = r;
    spec.L = L;
    return spec;
  };
  ExperimentConfig c;
  c.patterns = {pattern(0.07, 0.3), pattern(0.12, 0.2), pattern(0.16, 0.1)};
  c.velocities = {0.15, 0.10, 0.05};
  c.approaches = {Approach::ST, Approach::A, Approach::B, Approach::C, Approach::D};
  return c;
}

std::string velocity_mode_name(VelocityMode m) {
  return m == VelocityMode::Spray ? "spray" : "ee_average";
}

VelocityMode parse_velocity_mode(const std::string& s) {
  if (s == "spray") return VelocityMode::Spray;
  if (s == "ee_average") return VelocityMode::EeAverage;
  throw std::invalid_argument("unknown velocity_mode '" + s + "'");
}

template <int N>
Eigen::Matrix<double, N, N> gain_from_json(const json& j) {
  if (j.is_number()) return j.get<double>() * Eigen::Matrix<double, N, N>::Identity();
  if (j.is_array() && j.size() == N) {
    Eigen::Matrix<double, N, 1> d;
    for (int i = 0; i < N; ++i) d(i) = j[i].get<double>();
    return d.asDiagonal();
  }
  throw std::invalid_argument("gain must be a number or an array of " + std::to_string(N) +
                              " diagonal entries");
}

template <int N>
json gain_to_json(const Eigen::Matrix<double, N, N>& M) {
  json arr = json::array();
  for (int i = 0; i < N; ++i) arr.push_back(M(i, i));
  return arr;
}

std::string cell_name(const ReportRow& row) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "trace_r%.2f_L%.2f_v%.3f_%s.csv", row.r, row.L, row.velocity,
                std::string(to_string(row.approach)).c_str());
  return buf;
}

void fill_st_normalization(ComparisonReport& report) {
  for (ReportRow& row : report.rows) {
    const ReportRow* st = report.find(row.pattern_index, row.velocity, Approach::ST);
    if (row.ok && st != nullptr && st->ok && st->energy_proxy > 0.0) {
      row.energy_proxy_pct_of_st =
          row.approach == Approach::ST ? 100.0 : 100.0 * row.energy_proxy / st->energy_proxy;
    } else {
      row.energy_proxy_pct_of_st.reset();
    }
  }
}

struct CellIndex {
  int pattern;
  double velocity;
  Approach approach;
};

std::vector<CellIndex> enumerate_cells(const ExperimentConfig& config) {
  std::vector<CellIndex> cells;
  for (int p = 0; p < static_cast<int>(config.patterns.size()); ++p)
    for (double v : config.velocities)
      for (Approach a : config.approaches) cells.push_back({p, v, a});
  return cells;
}

ComparisonReport empty_report(const ExperimentConfig& config, std::size_t n) {
  ComparisonReport report;
  report.velocity_mode = config.velocity_mode;
  report.theta_deg = config.controller.theta / kDeg;
  report.rows.resize(n);
  return report;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (patterns.empty() || velocities.empty() || approaches.empty()) {
    throw std::invalid_argument("experiment config: patterns, velocities and approaches "
                                "must be non-empty");
  }
  for (double v : velocities)
    if (!(v > 0.0)) throw std::invalid_argument("experiment config: velocities must be > 0");
  if (laps < 1) throw std::invalid_argument("experiment config: laps must be >= 1");
  (void)make_surface(surface_name, surface_params);
  controller.validate();
}

ExperimentConfig preset_table1() { return paper_matrix(); }

ExperimentConfig preset_table2() {
  ExperimentConfig c = paper_matrix();
  c.velocity_mode = VelocityMode::EeAverage;
  return c;
}

ExperimentConfig preset(const std::string& name) {
  if (name == "table1") return preset_table1();
  if (name == "table2") return preset_table2();
  throw std::invalid_argument("unknown preset '" + name + "' (expected table1 or table2)");
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  try {
    if (j.contains("patterns")) {
      c.patterns.clear();
      for (const json& p : j.at("patterns")) {
        PatternSpec spec;
        spec.r = p.at("r").get<double>();
        spec.L = p.at("L").get<double>();
        spec.x0 = p.value("x0", spec.x0);
        spec.y0 = p.value("y0", spec.y0);
        if (p.contains("q_init")) {
          const auto q = p.at("q_init").get<std::vector<double>>();
          if (q.size() != kNumJoints) throw std::invalid_argument("q_init needs 6 entries");
          spec.q_init = Vector6d(q.data());
        }
        c.patterns.push_back(spec);
      }
    }
    if (j.contains("velocities")) c.velocities = j.at("velocities").get<std::vector<double>>();
    if (j.contains("velocity_mode"))
      c.velocity_mode = parse_velocity_mode(j.at("velocity_mode").get<std::string>());
    if (j.contains("approaches")) {
      c.approaches.clear();
      for (const json& a : j.at("approaches")) c.approaches.push_back(parse_approach(a.get<std::string>()));
    }
    if (j.contains("surface")) {
      const json& s = j.at("surface");
      c.surface_name = s.at("name").get<std::string>();
      c.surface_params = s.value("params", std::map<std::string, double>{});
    }
    if (j.contains("theta_deg")) c.controller.theta = j.at("theta_deg").get<double>() * kDeg;
    if (j.contains("theta0_deg")) c.controller.theta0 = j.at("theta0_deg").get<double>() * kDeg;
    if (j.contains("smoothing")) {
      c.controller.smoothing.a = j.at("smoothing").value("a", c.controller.smoothing.a);
      c.controller.smoothing.b = j.at("smoothing").value("b", c.controller.smoothing.b);
    }
    if (j.contains("gains")) {
      const json& g = j.at("gains");
      if (g.contains("lambda1")) c.controller.Lambda1 = gain_from_json<3>(g.at("lambda1"));
      if (g.contains("lambda2")) c.controller.Lambda2 = gain_from_json<4>(g.at("lambda2"));
    }
    c.sim.k_bar_des = j.value("k_bar_des", c.sim.k_bar_des);
    c.sim.dt = j.value("dt", c.sim.dt);
    c.sim.convergence_phase = j.value("convergence_phase", c.sim.convergence_phase);
    c.laps = j.value("laps", c.laps);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.write_traces = j.value("write_traces", c.write_traces);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  json patterns = json::array();
  for (const PatternSpec& p : c.patterns) {
    json pj = {{"r", p.r}, {"L", p.L}, {"x0", p.x0}, {"y0", p.y0}};
    if (p.q_init) pj["q_init"] = std::vector<double>(p.q_init->data(), p.q_init->data() + 6);
    patterns.push_back(pj);
  }
  j["patterns"] = patterns;
  j["velocities"] = c.velocities;
  j["velocity_mode"] = velocity_mode_name(c.velocity_mode);
  json approaches = json::array();
  for (Approach a : c.approaches) approaches.push_back(std::string(to_string(a)));
  j["approaches"] = approaches;
  j["surface"] = {{"name", c.surface_name}, {"params", c.surface_params}};
  j["theta_deg"] = c.controller.theta / kDeg;
  j["theta0_deg"] = c.controller.theta0 / kDeg;
  j["smoothing"] = {{"a", c.controller.smoothing.a}, {"b", c.controller.smoothing.b}};
  j["gains"] = {{"lambda1", gain_to_json<3>(c.controller.Lambda1)},
                {"lambda2", gain_to_json<4>(c.controller.Lambda2)}};
  j["k_bar_des"] = c.sim.k_bar_des;
  j["dt"] = c.sim.dt;
  j["convergence_phase"] = c.sim.convergence_phase;
  j["laps"] = c.laps;
  j["output_dir"] = c.output_dir;
  j["write_traces"] = c.write_traces;
  return j;
}

bool ComparisonReport::energy_normalized() const {
  for (const ReportRow& row : rows)
    if (row.ok && !row.energy_proxy_pct_of_st) return false;
  return !rows.empty();
}

const ReportRow* ComparisonReport::find(int pattern_index, double velocity,
                                        Approach approach) const {
  for (const ReportRow& row : rows)
    if (row.pattern_index == pattern_index && row.velocity == velocity && row.approach == approach)
      return &row;
  return nullptr;
}

ReportRow run_cell(const ExperimentConfig& config, int pattern_index, double velocity,
                   Approach approach) {
  const PatternSpec& spec = config.patterns.at(pattern_index);
  ReportRow row;
  row.pattern_index = pattern_index;
  row.r = spec.r;
  row.L = spec.L;
  row.velocity = velocity;
  row.approach = approach;
  try {
    const Surface surface = make_surface(config.surface_name, config.surface_params);
    LawnMowerPattern pattern{spec.L, spec.r, spec.x0, spec.y0, velocity, config.laps};
    SimConfig sim = config.sim;
    sim.q_init = spec.q_init ? *spec.q_init
                             : start_configuration(pattern, surface, sim.k_bar_des);
    ControllerConfig ctrl = config.controller;
    ctrl.approach = approach;

    SimTrace trace;
    if (config.velocity_mode == VelocityMode::EeAverage) {
      Calibration cal = calibrate_speed(velocity, sim, ctrl, pattern, surface);
      row.U = cal.U;
      row.calibration_runs = cal.iterations;
      trace = std::move(cal.trace);
    } else {
      row.U = velocity;
      row.calibration_runs = 0;
      trace = run(sim, ctrl, pattern, surface);
    }
    const SimMetrics& m = trace.metrics;
    row.time = m.completion_time;
    row.path = m.ee_path_length;
    row.avg_vel = m.avg_ee_velocity;
    row.energy_proxy = m.energy_proxy;
    row.max_fov_deg = fov_angle_for_sigma(m.max_sigma_fov) / kDeg;
    row.max_joint_accel = m.max_joint_accel;
    row.max_tracking_error = m.max_tracking_error;
    row.safety_stop = m.safety_stop;
    row.ok = true;

    if (config.write_traces && !config.output_dir.empty()) {
      fs::create_directories(config.output_dir);
      const fs::path file = fs::path(config.output_dir) / cell_name(row);
      std::ofstream out(file);
      if (!out) throw std::runtime_error("cannot write " + file.string());
      write_trace_csv(out, trace.records);
      row.trace_file = file.string();
      fs::path metrics_file = fs::path(config.output_dir) / ("metrics" + cell_name(row).substr(5));
      std::ofstream metrics_out(metrics_file.replace_extension(".json"));
      metrics_out << metrics_to_json(trace.metrics).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

ComparisonReport run_matrix(const ExperimentConfig& config, int jobs) {
  config.validate();
  const std::vector<CellIndex> cells = enumerate_cells(config);
  ComparisonReport report = empty_report(config, cells.size());
  const int n = static_cast<int>(cells.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    report.rows[i] = run_cell(config, cells[i].pattern, cells[i].velocity, cells[i].approach);
  }
  fill_st_normalization(report);
  return report;
}

ComparisonReport run_matrix_serial(const ExperimentConfig& config) {
  config.validate();
  const std::vector<CellIndex> cells = enumerate_cells(config);
  ComparisonReport report = empty_report(config, cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    report.rows[i] = run_cell(config, cells[i].pattern, cells[i].velocity, cells[i].approach);
  }
  fill_st_normalization(report);
  return report;
}

ComparisonReport equal_speed_matrix(ExperimentConfig config, int jobs) {
  config.velocity_mode = VelocityMode::EeAverage;
  return run_matrix(config, jobs);
}

json report_to_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const ReportRow& r : report.rows) {
    json jr = {{"pattern_index", r.pattern_index},
               {"r", r.r},
               {"L", r.L},
               {"velocity", r.velocity},
               {"approach", std::string(to_string(r.approach))},
               {"ok", r.ok},
               {"error", r.error},
               {"U", r.U},
               {"calibration_runs", r.calibration_runs},
               {"time", r.time},
               {"path", r.path},
               {"avg_vel", r.avg_vel},
               {"energy_proxy", r.energy_proxy},
               {"max_fov_deg", r.max_fov_deg},
               {"max_joint_accel", r.max_joint_accel},
               {"max_tracking_error", r.max_tracking_error},
               {"safety_stop", r.safety_stop},
               {"trace_file", r.trace_file}};
    jr["energy_proxy_pct_of_st"] =
        r.energy_proxy_pct_of_st ? json(*r.energy_proxy_pct_of_st) : json(nullptr);
    rows.push_back(jr);
  }
  return {{"velocity_mode", velocity_mode_name(report.velocity_mode)},
          {"theta_deg", report.theta_deg},
          {"energy_unit", report.energy_normalized() ? "percent_of_ST" : "absolute"},
          {"energy_note", "kinematic proxy: integral of |qdot_des|^2 dt, not electrical energy"},
          {"rows", rows}};
}

ComparisonReport report_from_json(const json& j) {
  ComparisonReport report;
  report.velocity_mode = parse_velocity_mode(j.at("velocity_mode").get<std::string>());
  report.theta_deg = j.at("theta_deg").get<double>();
  for (const json& jr : j.at("rows")) {
    ReportRow r;
    r.pattern_index = jr.at("pattern_index").get<int>();
    r.r = jr.at("r").get<double>();
    r.L = jr.at("L").get<double>();
    r.velocity = jr.at("velocity").get<double>();
    r.approach = parse_approach(jr.at("approach").get<std::string>());
    r.ok = jr.at("ok").get<bool>();
    r.error = jr.at("error").get<std::string>();
    r.U = jr.at("U").get<double>();
    r.calibration_runs = jr.at("calibration_runs").get<int>();
    r.time = jr.at("time").get<double>();
    r.path = jr.at("path").get<double>();
    r.avg_vel = jr.at("avg_vel").get<double>();
    r.energy_proxy = jr.at("energy_proxy").get<double>();
    if (!jr.at("energy_proxy_pct_of_st").is_null())
      r.energy_proxy_pct_of_st = jr.at("energy_proxy_pct_of_st").get<double>();
    r.max_fov_deg = jr.at("max_fov_deg").get<double>();
    r.max_joint_accel = jr.at("max_joint_accel").get<double>();
    r.max_tracking_error = jr.at("max_tracking_error").get<double>();
    r.safety_stop = jr.at("safety_stop").get<bool>();
    r.trace_file = jr.at("trace_file").get<std::string>();
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string format_table(const ComparisonReport& report) {
  const bool normalized = report.energy_normalized();
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-6s %-5s %-7s %-4s %8s %8s %8s %8s %12s %9s %9s\n", "r[m]",
                "L[m]", report.velocity_mode == VelocityMode::Spray ? "U[m/s]" : "vee[m/s]",
                "app", "U[m/s]", "time[s]", "path[m]", "vel[m/s]",
                normalized ? "Eproxy[%ST]" : "Eproxy[abs]", "fov[deg]", "acc");
  out << buf;
  for (const ReportRow& r : report.rows) {
    if (!r.ok) {
      std::snprintf(buf, sizeof(buf), "%-6.2f %-5.2f %-7.2f %-4s FAILED: %s\n", r.r, r.L,
                    r.velocity, std::string(to_string(r.approach)).c_str(), r.error.c_str());
      out << buf;
      continue;
    }
    const double energy =
        normalized && r.energy_proxy_pct_of_st ? *r.energy_proxy_pct_of_st : r.energy_proxy;
    std::snprintf(buf, sizeof(buf),
                  "%-6.2f %-5.2f %-7.2f %-4s %8.2f %8.2f %8.2f %8.2f %12.2f %9.2f %9.2f\n", r.r,
                  r.L, r.velocity, std::string(to_string(r.approach)).c_str(), r.U, r.time,
                  r.path, r.avg_vel, energy, r.max_fov_deg, r.max_joint_accel);
    out << buf;
  }
  out << "Energy is a kinematic proxy (integral of |qdot_des|^2 dt) and not electrical energy.\n";
  return out.str();
}

std::vector<std::string> fov_violations(const ComparisonReport& report) {
  std::vector<std::string> out;
  for (const ReportRow& r : report.rows) {
    char buf[160];
    if (!r.ok) {
      std::snprintf(buf, sizeof(buf), "r=%.2f L=%.2f v=%.2f %s failed: %s", r.r, r.L, r.velocity,
                    std::string(to_string(r.approach)).c_str(), r.error.c_str());
      out.emplace_back(buf);
    } else if (r.approach != Approach::ST && r.max_fov_deg > report.theta_deg + 0.1) {
      std::snprintf(buf, sizeof(buf), "r=%.2f L=%.2f v=%.2f %s max FOV %.3f deg > %.1f + 0.1",
                    r.r, r.L, r.velocity, std::string(to_string(r.approach)).c_str(),
                    r.max_fov_deg, report.theta_deg);
      out.emplace_back(buf);
    }
  }
  return out;
}

std::vector<std::string> emit_plot_data(const std::string& trace_file, const std::string& out_dir) {
  std::ifstream in(trace_file);
  if (!in) throw ParseError("cannot open trace '" + trace_file + "'");
  const std::vector<TraceRecord> records = read_trace_csv(in);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::vector<std::string> paths = {(dir / "path3d.dat").string(), (dir / "mode.dat").string(),
                                          (dir / "fov.dat").string(),
                                          (dir / "joint_velocities.dat").string()};
  std::ofstream path3d(paths[0]), mode(paths[1]), fov(paths[2]), joints(paths[3]);
  if (!path3d || !mode || !fov || !joints) {
    throw std::runtime_error("cannot write plot data under " + out_dir);
  }
  path3d << "# t xe ye ze xi yi\n";
  mode << "# t mode\n";
  fov << "# t sigma_fov fov_deg\n";
  joints << "# t qd1 qd2 qd3 qd4 qd5 qd6\n";
  for (const TraceRecord& r : records) {
    path3d << r.t << ' ' << r.p_e.x() << ' ' << r.p_e.y() << ' ' << r.p_e.z() << ' ' << r.p_i.x()
           << ' ' << r.p_i.y() << '\n';
    mode << r.t << ' ' << mode_index(r.mode) << '\n';
    fov << r.t << ' ' << r.sigma_fov << ' ' << fov_angle_for_sigma(r.sigma_fov) / kDeg << '\n';
    joints << r.t;
    for (int i = 0; i < kNumJoints; ++i) joints << ' ' << r.qdot_des(i);
    joints << '\n';
  }
  return paths;
}

}  // namespace spraypaint
