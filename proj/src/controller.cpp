#include "spraypaint/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace spraypaint {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Mode1: return "mode1";
    case Mode::Mode2: return "mode2";
    case Mode::Standard: return "standard";
  }
  return "?";
}

std::string_view to_string(Approach a) {
  switch (a) {
    case Approach::ST: return "ST";
    case Approach::A: return "A";
    case Approach::B: return "B";
    case Approach::C: return "C";
    case Approach::D: return "D";
  }
  return "?";
}

Approach parse_approach(std::string_view name) {
  if (name == "ST") return Approach::ST;
  if (name == "A") return Approach::A;
  if (name == "B") return Approach::B;
  if (name == "C") return Approach::C;
  if (name == "D") return Approach::D;
  throw std::invalid_argument("unknown approach '" + std::string(name) + "'");
}

int mode_index(Mode m) {
  switch (m) {
    case Mode::Mode1: return 1;
    case Mode::Mode2: return 2;
    case Mode::Standard: return 0;
  }
  return -1;
}

void ControllerConfig::validate() const {
  if (!(theta0 >= 0.0) || !(theta > theta0)) {
    throw std::invalid_argument("ControllerConfig: need theta > theta0 >= 0");
  }
  auto positive_definite = [](const auto& M) {
    const auto sym = (0.5 * (M + M.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<std::decay_t<decltype(sym)>> eig(sym);
    return eig.eigenvalues().minCoeff() > 0.0;
  };
  if (!positive_definite(Lambda1) || !positive_definite(Lambda2)) {
    throw std::invalid_argument("ControllerConfig: gain matrices must be positive definite");
  }
}

double fov_sigma_for_angle(double theta) { return std::sqrt(2.0 * (1.0 - std::cos(theta))); }

double fov_angle_for_sigma(double sigma) {
  const double c = std::clamp(1.0 - 0.5 * sigma * sigma, -1.0, 1.0);
  return std::acos(c);
}

bool in_tangent_cone(double sigma_dot, double sigma, const SetBounds& bounds) {
  if (bounds.sigma_min < sigma && sigma < bounds.sigma_max) return true;
  if (sigma <= bounds.sigma_min) return sigma_dot >= 0.0;
  // sigma >= sigma_max
  return sigma_dot <= 0.0;
}

Vector6d mode1_velocity(const SprayTaskEval& spray, const DesiredSpray& desired,
                        const Eigen::Matrix3d& Lambda1, const PinvOptions& pinv) {
  const Eigen::Vector3d err = desired.sigma1_des - spray.sigma_spray;
  return clik_velocity(spray.J_spray, desired.sigma1_des_dot, err, Lambda1, pinv);
}

Vector6d mode2_velocity(const SprayTaskEval& spray, const FovTaskEval& fov,
                        const DesiredSpray& desired, double theta_target,
                        const Eigen::Matrix4d& Lambda2, const PinvOptions& pinv) {
  Eigen::Matrix<double, 4, 6> J;
  J << spray.J_spray, fov.J_fov;
  Eigen::Vector4d sigma_des_dot, err;
  sigma_des_dot << desired.sigma1_des_dot, 0.0;
  err << desired.sigma1_des - spray.sigma_spray, fov_sigma_for_angle(theta_target) - fov.sigma_fov;
  return clik_velocity(J, sigma_des_dot, err, Lambda2, pinv);
}

double smoothing_alpha(double t, double t_last_switch, double a, double b) {
  return std::atan(a * (t - t_last_switch - b)) / std::numbers::pi + 0.5;
}

SprayController::SprayController(ControllerConfig config, Chain chain)
    : config_(std::move(config)), chain_(std::move(chain)) {
  config_.validate();
}

StepResult SprayController::step(double t, const Vector6d& q, const SprayTrajectory& trajectory,
                                 const Surface& surface) {
  if (state_.initialized && t < state_.t_last) {
    throw std::invalid_argument("SprayController::step: time went backwards");
  }

  StepResult res;
  res.desired = trajectory.eval(t);
  res.snapshot = forward_kinematics(chain_, q);
  res.spray = spray_task(res.snapshot, surface);
  const FovTarget target = fov_target(chain_, q, surface, res.spray.hit);
  res.fov = fov_task(res.snapshot, target.a_des, target.dA_des_dq);

  const Approach approach = config_.approach;
  const bool smooth = approach == Approach::C || approach == Approach::D;
  const bool hybrid = approach == Approach::B || approach == Approach::D;
  const bool standard = approach == Approach::ST ||
                        (hybrid && kind_of(res.desired.segment) == SegmentKind::Straight);

  Vector6d target_velocity;
  if (standard) {
    res.mode = Mode::Standard;
    target_velocity =
        mode2_velocity(res.spray, res.fov, res.desired, 0.0, config_.Lambda2, config_.pinv);
  } else {
    const Vector6d f1 = mode1_velocity(res.spray, res.desired, config_.Lambda1, config_.pinv);
    const double bound_angle = smooth ? config_.theta - config_.theta0 : config_.theta;
    const double fov_rate = res.fov.J_fov.dot(f1);
    if (in_tangent_cone(fov_rate, res.fov.sigma_fov, {0.0, fov_sigma_for_angle(bound_angle)})) {
      res.mode = Mode::Mode1;
      target_velocity = f1;
    } else {
      res.mode = Mode::Mode2;
      target_velocity = mode2_velocity(res.spray, res.fov, res.desired, config_.theta,
                                       config_.Lambda2, config_.pinv);
    }
  }

  if (!state_.initialized) {
    state_.initialized = true;
    state_.active_mode = state_.previous_mode = res.mode;
    state_.t_last_switch = t;
  } else if (res.mode != state_.active_mode) {
    res.switched = true;
    state_.previous_mode = state_.active_mode;
    state_.active_mode = res.mode;
    state_.t_last_switch = t;
    if (smooth) {
      state_.qdot_before_switch = state_.last_output;
      state_.blending = true;
    }
  }

  res.qdot_des = target_velocity;
  if (smooth && state_.blending) {
    const double alpha =
        smoothing_alpha(t, state_.t_last_switch, config_.smoothing.a, config_.smoothing.b);
    if (alpha > 0.999) {
      state_.blending = false;
    } else {
      res.alpha = alpha;
      res.qdot_des = (1.0 - alpha) * state_.qdot_before_switch + alpha * target_velocity;
    }
  }

  state_.last_output = res.qdot_des;
  state_.t_last = t;
  return res;
}

}  // namespace spraypaint
