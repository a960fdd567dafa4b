#include "spraypaint/simulator.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spraypaint/errors.hpp"

namespace spraypaint {

namespace {

// Elbow-up, wrist-down posture; the nozzle axis points at -z.
Vector6d nozzle_down_seed() {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  Vector6d q;
  q << 0.0, -kHalfPi, kHalfPi, -kHalfPi, -kHalfPi, 0.0;
  return q;
}

}  // namespace

Vector6d start_configuration(const LawnMowerPattern& pattern, const Surface& surface,
                             double k_bar_des, const Chain& chain) {
  const double x = pattern.x0, y = pattern.y0;
  const Eigen::Vector3d hit(x, y, surface.height(x, y));
  const Eigen::Vector3d n = surface.normal(x, y).normalized();
  double residual = 0.0;
  // Aim the seed's base rotation at the start point so the IK stays on the
  // same arm branch for every pattern.
  Vector6d seed = nozzle_down_seed();
  const Eigen::Vector3d seed_pos = forward_kinematics(chain, seed).p_e;
  seed(0) = std::atan2(y, x) - std::atan2(seed_pos.y(), seed_pos.x());
  const Vector6d q = solve_pose_dls(chain, hit + k_bar_des * n, -n, seed, &residual);
  if (residual > 1e-9) {
    throw NoConvergence("start_configuration: IK residual " + std::to_string(residual));
  }
  return q;
}

SimMetrics compute_metrics(const std::vector<TraceRecord>& records, double dt,
                           double safety_joint_speed) {
  if (records.empty()) throw std::invalid_argument("compute_metrics: empty trace");
  SimMetrics m;
  m.completion_time = records.back().t - records.front().t;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const TraceRecord& rec = records[k];
    m.max_sigma_fov = std::max(m.max_sigma_fov, rec.sigma_fov);
    if (rec.qdot_des.cwiseAbs().maxCoeff() > safety_joint_speed) m.safety_stop = true;
    if (k + 1 < records.size()) {
      const TraceRecord& next = records[k + 1];
      m.ee_path_length += (next.p_e - rec.p_e).norm();
      m.energy_proxy += rec.qdot_des.squaredNorm() * dt;
      m.max_joint_accel = std::max(m.max_joint_accel, (next.qdot_des - rec.qdot_des).norm() / dt);
      if (next.mode != rec.mode) ++m.mode_switches;
    }
  }
  m.avg_ee_velocity = m.completion_time > 0.0 ? m.ee_path_length / m.completion_time : 0.0;
  return m;
}

SimTrace run(const SimConfig& sim, const ControllerConfig& controller,
             const LawnMowerPattern& pattern, const Surface& surface, const Chain& chain) {
  if (!(sim.dt > 0.0) || !(sim.convergence_phase >= 0.0)) {
    throw std::invalid_argument("SimConfig: need dt > 0 and convergence_phase >= 0");
  }
  pattern.validate();
  const Plant plant;
  Vector6d q = sim.q_init;

  // Pre-roll: keep the nozzle normal and settle onto the pattern start.
  {
    ControllerConfig pre = controller;
    pre.approach = Approach::ST;
    SprayController preroll(pre, chain);
    const SprayTrajectory hold = SprayTrajectory::hold_start(pattern, sim.k_bar_des);
    const auto steps = static_cast<long>(std::llround(sim.convergence_phase / sim.dt));
    for (long k = 0; k < steps; ++k) {
      const StepResult res = preroll.step(k * sim.dt, q, hold, surface);
      q = plant.advance(q, res.qdot_des, sim.dt);
    }
  }

  SprayController ctrl(controller, chain);
  const SprayTrajectory traj = SprayTrajectory::lawn_mower(pattern, sim.k_bar_des);
  const auto steps = static_cast<long>(std::llround(traj.duration / sim.dt));

  SimTrace trace;
  trace.records.reserve(steps + 1);
  double max_xy_err = 0.0, max_k_err = 0.0;
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(k * sim.dt, traj.duration);
    const StepResult res = ctrl.step(t, q, traj, surface);
    const Eigen::Vector3d err = res.desired.sigma1_des - res.spray.sigma_spray;
    if (err.norm() > sim.divergence_limit) {
      std::ostringstream msg;
      msg << "spray task error " << err.norm() << " m at t = " << t << " s";
      throw Diverged(msg.str());
    }
    max_xy_err = std::max(max_xy_err, err.head<2>().norm());
    max_k_err = std::max(max_k_err, std::abs(err.z()));

    TraceRecord rec;
    rec.t = t;
    rec.q = q;
    rec.qdot_des = res.qdot_des;
    rec.mode = res.mode;
    rec.sigma_fov = res.fov.sigma_fov;
    rec.p_i = res.spray.hit.p_i;
    rec.k_bar = res.spray.hit.k_bar;
    rec.p_e = res.snapshot.p_e;
    trace.records.push_back(rec);

    if (k < steps) q = plant.advance(q, res.qdot_des, sim.dt);
  }

  trace.metrics = compute_metrics(trace.records, sim.dt, sim.safety_joint_speed);
  trace.metrics.max_tracking_error = max_xy_err;
  trace.metrics.max_distance_error = max_k_err;
  return trace;
}

nlohmann::json metrics_to_json(const SimMetrics& m) {
  return {{"completion_time", m.completion_time},
          {"ee_path_length", m.ee_path_length},
          {"avg_ee_velocity", m.avg_ee_velocity},
          {"energy_proxy", m.energy_proxy},
          {"energy_proxy_note", "integral of |qdot_des|^2 dt [rad^2/s], not electrical energy"},
          {"max_sigma_fov", m.max_sigma_fov},
          {"max_joint_accel", m.max_joint_accel},
          {"max_tracking_error", m.max_tracking_error},
          {"max_distance_error", m.max_distance_error},
          {"mode_switches", m.mode_switches},
          {"safety_stop", m.safety_stop}};
}

Calibration calibrate_speed(double target_avg_ee_vel, const SimConfig& sim,
                            const ControllerConfig& controller, LawnMowerPattern pattern,
                            const Surface& surface, const Chain& chain) {
  if (!(target_avg_ee_vel > 0.0)) {
    throw std::invalid_argument("calibrate_speed: target speed must be positive");
  }
  constexpr int kMaxRuns = 10;
  Calibration cal;
  pattern.U = target_avg_ee_vel;
  for (int it = 1; it <= kMaxRuns; ++it) {
    cal.trace = run(sim, controller, pattern, surface, chain);
    cal.U = pattern.U;
    cal.iterations = it;
    const double measured = cal.trace.metrics.avg_ee_velocity;
    if (std::abs(measured - target_avg_ee_vel) < 0.01 * target_avg_ee_vel) return cal;
    if (!(measured > 0.0)) break;
    pattern.U *= target_avg_ee_vel / measured;
  }
  throw NoConvergence("calibrate_speed: average ee speed did not reach " +
                      std::to_string(target_avg_ee_vel) + " m/s within 1 %");
}

std::string trace_csv_header() {
  return "t,q1,q2,q3,q4,q5,q6,qd1,qd2,qd3,qd4,qd5,qd6,mode,sigma_fov,xi,yi,kbar,xe,ye,ze";
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << trace_csv_header() << '\n';
  out << std::setprecision(17);
  for (const TraceRecord& r : records) {
    out << r.t;
    for (int i = 0; i < kNumJoints; ++i) out << ',' << r.q(i);
    for (int i = 0; i < kNumJoints; ++i) out << ',' << r.qdot_des(i);
    out << ',' << mode_index(r.mode) << ',' << r.sigma_fov << ',' << r.p_i.x() << ','
        << r.p_i.y() << ',' << r.k_bar << ',' << r.p_e.x() << ',' << r.p_e.y() << ','
        << r.p_e.z() << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  constexpr int kColumns = 21;
  std::vector<TraceRecord> records;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("trace: empty input (line 1)");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_csv_header()) {
    throw ParseError("trace: unexpected header at line 1");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> v;
    v.reserve(kColumns);
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("trace: bad number '" + cell + "' at line " + std::to_string(line_no));
      }
    }
    if (static_cast<int>(v.size()) != kColumns) {
      throw ParseError("trace: expected " + std::to_string(kColumns) + " columns, got " +
                       std::to_string(v.size()) + " at line " + std::to_string(line_no));
    }
    TraceRecord r;
    r.t = v[0];
    for (int i = 0; i < kNumJoints; ++i) {
      r.q(i) = v[1 + i];
      r.qdot_des(i) = v[7 + i];
    }
    switch (static_cast<int>(v[13])) {
      case 0: r.mode = Mode::Standard; break;
      case 1: r.mode = Mode::Mode1; break;
      case 2: r.mode = Mode::Mode2; break;
      default:
        throw ParseError("trace: bad mode value at line " + std::to_string(line_no));
    }
    r.sigma_fov = v[14];
    r.p_i = {v[15], v[16]};
    r.k_bar = v[17];
    r.p_e = {v[18], v[19], v[20]};
    records.push_back(r);
  }
  return records;
}

}  // namespace spraypaint
