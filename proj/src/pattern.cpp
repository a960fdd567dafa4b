#include "spraypaint/pattern.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spraypaint/errors.hpp"

namespace spraypaint {

namespace {
constexpr double kPi = std::numbers::pi;
}

double LawnMowerPattern::lap_length() const { return 2.0 * L + 2.0 * kPi * r; }

double LawnMowerPattern::duration() const { return laps * lap_length() / U; }

void LawnMowerPattern::validate() const {
  if (!(L > 0.0) || !(r > 0.0) || !(U > 0.0) || laps < 1) {
    throw std::invalid_argument("LawnMowerPattern: need L > 0, r > 0, U > 0 and laps >= 1");
  }
}

double path_length(const LawnMowerPattern& p) { return p.laps * p.lap_length(); }

PatternPoint pattern_point(const LawnMowerPattern& p, double s) {
  const double L = p.L, r = p.r;
  double sl = std::fmod(s, p.lap_length());
  if (sl < 0.0) sl += p.lap_length();

  PatternPoint out;
  if (sl <= L) {
    out.xy = {sl + p.x0, p.y0};
    out.dxy_ds = {1.0, 0.0};
    out.segment = Segment::Straight1;
  } else if (sl <= L + kPi * r) {
    const double phi = (sl - L) / r;
    out.xy = {L + r * std::sin(phi) + p.x0, r * (1.0 - std::cos(phi)) + p.y0};
    out.dxy_ds = {std::cos(phi), std::sin(phi)};
    out.segment = Segment::Turn1;
  } else if (sl <= 2.0 * L + kPi * r) {
    out.xy = {L - (sl - L - kPi * r) + p.x0, 2.0 * r + p.y0};
    out.dxy_ds = {-1.0, 0.0};
    out.segment = Segment::Straight2;
  } else {
    const double phi = (sl - 2.0 * L - kPi * r) / r;
    out.xy = {-r * std::sin(phi) + p.x0, 2.0 * r + r * (std::cos(phi) - 1.0) + p.y0};
    out.dxy_ds = {-std::cos(phi), -std::sin(phi)};
    out.segment = Segment::Turn2;
  }
  return out;
}

DesiredSpray eval_pattern(const LawnMowerPattern& p, double t, double k_bar_des) {
  // Half a nanosecond of slack absorbs accumulated t = k * dt round-off.
  if (t < 0.0 || t > p.duration() + 5e-10) {
    throw OutOfRange("eval_pattern: t = " + std::to_string(t) + " outside [0, " +
                     std::to_string(p.duration()) + "]");
  }
  const PatternPoint pt = pattern_point(p, p.U * t);
  DesiredSpray d;
  d.sigma1_des << pt.xy, k_bar_des;
  d.sigma1_des_dot << p.U * pt.dxy_ds, 0.0;
  d.segment = pt.segment;
  return d;
}

Eigen::Vector3d spatial_pattern(const LawnMowerPattern& p, const Surface& surface, double s) {
  const Eigen::Vector2d xy = pattern_point(p, s).xy;
  return {xy.x(), xy.y(), surface.height(xy.x(), xy.y())};
}

SegmentKind kind_of(Segment seg) {
  return seg == Segment::Straight1 || seg == Segment::Straight2 ? SegmentKind::Straight
                                                                : SegmentKind::Turn;
}

SegmentKind segment_kind(const LawnMowerPattern& p, double s) {
  return kind_of(pattern_point(p, s).segment);
}

SprayTrajectory SprayTrajectory::lawn_mower(const LawnMowerPattern& p, double k_bar_des) {
  p.validate();
  return {[p, k_bar_des](double t) { return eval_pattern(p, t, k_bar_des); }, p.duration()};
}

SprayTrajectory SprayTrajectory::hold_start(const LawnMowerPattern& p, double k_bar_des) {
  p.validate();
  return {[p, k_bar_des](double) {
            DesiredSpray d = eval_pattern(p, 0.0, k_bar_des);
            d.sigma1_des_dot.setZero();
            return d;
          },
          0.0};
}

}  // namespace spraypaint
