#pragma once
// Closed-loop kinematic simulation with a perfect-tracking plant.

#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spraypaint/controller.hpp"

namespace spraypaint {

struct SimConfig {
  double dt = 0.008;  // 125 Hz
  Vector6d q_init = Vector6d::Zero();
  double convergence_phase = 3.0;  // pre-roll [s], excluded from metrics
  std::optional<double> velocity_calibration;  // target average ee speed [m/s]
  double k_bar_des = 0.3;
  double divergence_limit = 0.5;  // on |sigma1_err| [m]
  double safety_joint_speed = std::numbers::pi;  // SafetyStop diagnostic threshold [rad/s]
};

struct TraceRecord {
  double t = 0.0;
  Vector6d q = Vector6d::Zero();
  Vector6d qdot_des = Vector6d::Zero();
  Mode mode = Mode::Mode1;
  double sigma_fov = 0.0;
  Eigen::Vector2d p_i = Eigen::Vector2d::Zero();
  double k_bar = 0.0;
  Eigen::Vector3d p_e = Eigen::Vector3d::Zero();
};

struct SimMetrics {
  double completion_time = 0.0;     // [s]
  double ee_path_length = 0.0;      // [m]
  double avg_ee_velocity = 0.0;     // [m/s]
  double energy_proxy = 0.0;        // integral of |qdot_des|^2 [rad^2/s], not electrical energy
  double max_sigma_fov = 0.0;
  double max_joint_accel = 0.0;     // [rad/s^2]
  double max_tracking_error = 0.0;  // max |(x_i, y_i) - (x_spray, y_spray)| [m]
  double max_distance_error = 0.0;  // max |k_bar - k_bar_des| [m]
  int mode_switches = 0;
  bool safety_stop = false;  // some |qdot_i| exceeded SimConfig::safety_joint_speed
};

struct SimTrace {
  std::vector<TraceRecord> records;
  SimMetrics metrics;
};

// Perfect tracking: q(t + dt) = q(t) + dt * qdot_des(t).
struct Plant {
  enum class Kind { PerfectTracking };
  Kind kind = Kind::PerfectTracking;
  Vector6d advance(const Vector6d& q, const Vector6d& qdot_des, double dt) const {
    return q + dt * qdot_des;
  }
};

// Pre-roll (ST toward the pattern start for convergence_phase seconds), then
// the full pattern. The controller is fed the integrated reference.
// Throws Diverged when the spray error exceeds divergence_limit, and
// propagates controller errors.
SimTrace run(const SimConfig& sim, const ControllerConfig& controller,
             const LawnMowerPattern& pattern, const Surface& surface,
             const Chain& chain = Chain::ur5());

// Path length, average speed, completion time, energy proxy, maxima.
// Tracking errors need the desired trajectory and are filled by run().
// Throws std::invalid_argument on an empty trace.
SimMetrics compute_metrics(const std::vector<TraceRecord>& records, double dt,
                           double safety_joint_speed = std::numbers::pi);

// Metrics as a JSON object keyed by the SimMetrics field names.
nlohmann::json metrics_to_json(const SimMetrics& m);

struct Calibration {
  double U = 0.0;
  SimTrace trace;
  int iterations = 0;
};

// Fixed-point iteration U <- U * target / measured until the average ee
// speed is within 1 % of the target (max 10 runs). Throws NoConvergence.
Calibration calibrate_speed(double target_avg_ee_vel, const SimConfig& sim,
                            const ControllerConfig& controller, LawnMowerPattern pattern,
                            const Surface& surface, const Chain& chain = Chain::ur5());

// Start configuration for a pattern: DLS IK placing the nozzle k_bar_des
// above the start point along the surface normal, pointing at it.
Vector6d start_configuration(const LawnMowerPattern& pattern, const Surface& surface,
                             double k_bar_des, const Chain& chain = Chain::ur5());

// Trace CSV with header t,q1..q6,qd1..qd6,mode,sigma_fov,xi,yi,kbar,xe,ye,ze.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);
// Throws ParseError (with line number) on malformed input.
std::vector<TraceRecord> read_trace_csv(std::istream& in);
std::string trace_csv_header();

}  // namespace spraypaint
