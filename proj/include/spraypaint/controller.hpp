#pragma once
// Switched set-based controller for the spray task with a field-of-view limit.
//
// Mode 1 tracks only the spray task and lets the nozzle orientation evolve
// freely. Mode 2 additionally freezes the nozzle misalignment at its limit.
// The active mode is chosen each tick by the tangent-cone test on the FOV task
// under the mode-1 velocity. Approach ST keeps the nozzle normal at all times;
// B and D use ST on straight segments and the set-based logic on turns; C and
// D blend the joint-velocity reference across mode changes.

#include <numbers>
#include <string>
#include <string_view>

#include "spraypaint/kinematics.hpp"
#include "spraypaint/pattern.hpp"
#include "spraypaint/tasks.hpp"

namespace spraypaint {

struct SetBounds {
  double sigma_min = 0.0;
  double sigma_max = 1.0;
};

enum class Mode { Mode1, Mode2, Standard };
enum class Approach { ST, A, B, C, D };

std::string_view to_string(Mode m);
std::string_view to_string(Approach a);
// Throws std::invalid_argument for unknown names.
Approach parse_approach(std::string_view name);
int mode_index(Mode m);  // 1, 2, 0 (Standard)

struct SmoothingParams {
  double a = 110.0;  // sharpness [1/s]
  double b = 0.05;   // delay [s]
};

struct ControllerConfig {
  double theta = 20.0 * std::numbers::pi / 180.0;  // FOV limit [rad]
  double theta0 = 5.0 * std::numbers::pi / 180.0;  // buffer for C/D [rad]
  Eigen::Matrix3d Lambda1 = 0.4 * Eigen::Matrix3d::Identity();
  Eigen::Matrix4d Lambda2 = 0.4 * Eigen::Matrix4d::Identity();
  Approach approach = Approach::A;
  SmoothingParams smoothing;
  PinvOptions pinv;

  // Throws std::invalid_argument on theta <= theta0, theta0 < 0 or
  // non-positive-definite gains.
  void validate() const;
};

struct ControllerState {
  bool initialized = false;
  Mode active_mode = Mode::Mode1;
  Mode previous_mode = Mode::Mode1;
  double t_last_switch = 0.0;
  Vector6d qdot_before_switch = Vector6d::Zero();
  bool blending = false;
  Vector6d last_output = Vector6d::Zero();
  double t_last = 0.0;
};

// Field-of-view error corresponding to a misalignment angle: sqrt(2 (1 - cos theta)).
double fov_sigma_for_angle(double theta);
// Inverse of fov_sigma_for_angle: arccos(1 - sigma^2 / 2).
double fov_angle_for_sigma(double sigma);

// Tangent-cone membership of sigma_dot at sigma for the interval [min, max].
bool in_tangent_cone(double sigma_dot, double sigma, const SetBounds& bounds);

// f1 = J_spray^+ (sigma1_des_dot + Lambda1 (sigma1_des - sigma_spray)).
Vector6d mode1_velocity(const SprayTaskEval& spray, const DesiredSpray& desired,
                        const Eigen::Matrix3d& Lambda1, const PinvOptions& pinv = {});

// f2 = [J_spray; J_fov]^+ (sigma2_des_dot + Lambda2 sigma2_err) with the FOV
// target sqrt(2 (1 - cos theta_target)) and zero FOV feedforward.
Vector6d mode2_velocity(const SprayTaskEval& spray, const FovTaskEval& fov,
                        const DesiredSpray& desired, double theta_target,
                        const Eigen::Matrix4d& Lambda2, const PinvOptions& pinv = {});

// (1/pi) atan(a (t - t_last_switch - b)) + 1/2.
double smoothing_alpha(double t, double t_last_switch, double a, double b);

struct StepResult {
  Vector6d qdot_des = Vector6d::Zero();
  Mode mode = Mode::Mode1;
  bool switched = false;
  double alpha = 1.0;  // blend weight of the new reference (1 when not blending)
  DesiredSpray desired;
  KinematicSnapshot snapshot;
  SprayTaskEval spray;
  FovTaskEval fov;
};

class SprayController {
 public:
  SprayController(ControllerConfig config, Chain chain = Chain::ur5());

  // One control tick at time t and configuration q. B and D dispatch on the
  // segment tag of the desired spray. Throws std::invalid_argument when t
  // runs backwards; propagates NoIntersection / DegenerateTangent.
  StepResult step(double t, const Vector6d& q, const SprayTrajectory& trajectory,
                  const Surface& surface);

  const ControllerState& state() const { return state_; }
  const ControllerConfig& config() const { return config_; }
  void reset() { state_ = ControllerState{}; }

 private:
  ControllerConfig config_;
  Chain chain_;
  ControllerState state_;
};

}  // namespace spraypaint
