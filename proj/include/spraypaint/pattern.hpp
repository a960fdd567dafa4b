#pragma once
// Lawn-mower spray pattern parametrized by arc length, s(t) = U t.

#include <Eigen/Dense>

#include <functional>

#include "spraypaint/tasks.hpp"

namespace spraypaint {

enum class Segment { Straight1, Turn1, Straight2, Turn2 };
enum class SegmentKind { Straight, Turn };

struct LawnMowerPattern {
  double L = 0.3;   // straight-segment length [m]
  double r = 0.07;  // turn radius [m]
  double x0 = 0.0;
  double y0 = 0.0;
  double U = 0.15;  // spray velocity along the surface [m/s]
  int laps = 2;

  double lap_length() const;
  // Pattern time for all laps at speed U.
  double duration() const;
  // Throws std::invalid_argument unless L > 0, r > 0, U > 0, laps >= 1.
  void validate() const;
};

struct DesiredSpray {
  Eigen::Vector3d sigma1_des = Eigen::Vector3d::Zero();      // (x, y, k_bar_des)
  Eigen::Vector3d sigma1_des_dot = Eigen::Vector3d::Zero();  // (xdot, ydot, 0)
  Segment segment = Segment::Straight1;
};

double path_length(const LawnMowerPattern& p);

// Planar pattern point and its derivative with respect to s at arc length s
// (any s >= 0; reduced modulo one lap).
struct PatternPoint {
  Eigen::Vector2d xy;
  Eigen::Vector2d dxy_ds;
  Segment segment;
};
PatternPoint pattern_point(const LawnMowerPattern& p, double s);

// Desired spray task at time t. Throws OutOfRange outside [0, duration].
DesiredSpray eval_pattern(const LawnMowerPattern& p, double t, double k_bar_des);

// (x_spray, y_spray, h(x_spray, y_spray)).
Eigen::Vector3d spatial_pattern(const LawnMowerPattern& p, const Surface& surface, double s);

SegmentKind segment_kind(const LawnMowerPattern& p, double s);
SegmentKind kind_of(Segment seg);

// Time-parametrized desired trajectory. The lawn-mower pattern is one source;
// any callable returning DesiredSpray for t in [0, duration] can be used.
struct SprayTrajectory {
  std::function<DesiredSpray(double)> eval;
  double duration = 0.0;

  static SprayTrajectory lawn_mower(const LawnMowerPattern& p, double k_bar_des);
  // Desired spray held at pattern time 0 with zero feedforward (pre-roll).
  static SprayTrajectory hold_start(const LawnMowerPattern& p, double k_bar_des);
};

}  // namespace spraypaint
