#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spraypaint/errors.hpp"
#include "spraypaint/pattern.hpp"

using namespace spraypaint;

namespace {
constexpr double kPi = std::numbers::pi;

LawnMowerPattern make(double r, double L, double U = 0.15) {
  LawnMowerPattern p;
  p.r = r;
  p.L = L;
  p.x0 = 0.35;
  p.y0 = -0.55;
  p.U = U;
  return p;
}
}  // namespace

TEST(Pattern, StartPoint) {
  const LawnMowerPattern p = make(0.07, 0.3);
  const DesiredSpray d = eval_pattern(p, 0.0, 0.3);
  EXPECT_EQ(d.sigma1_des, Eigen::Vector3d(0.35, -0.55, 0.3));
  EXPECT_EQ(d.sigma1_des_dot, Eigen::Vector3d(0.15, 0.0, 0.0));
  EXPECT_EQ(d.segment, Segment::Straight1);
}

TEST(Pattern, EndOfFirstTurn) {
  const LawnMowerPattern p = make(0.07, 0.3);
  const PatternPoint pt = pattern_point(p, p.L + kPi * p.r);
  EXPECT_NEAR(pt.xy.x(), p.L + p.x0, 1e-12);
  EXPECT_NEAR(pt.xy.y(), 2 * p.r + p.y0, 1e-12);
  EXPECT_NEAR(pt.dxy_ds.x(), -1.0, 1e-12);
  EXPECT_NEAR(pt.dxy_ds.y(), 0.0, 1e-12);
}

TEST(Pattern, LapClosure) {
  for (const LawnMowerPattern& p : {make(0.07, 0.3), make(0.12, 0.2), make(0.16, 0.1)}) {
    for (int n = 0; n <= p.laps; ++n) {
      const PatternPoint pt = pattern_point(p, n * p.lap_length());
      EXPECT_NEAR(pt.xy.x(), p.x0, 1e-12);
      EXPECT_NEAR(pt.xy.y(), p.y0, 1e-12);
    }
  }
}

TEST(Pattern, PathLength) {
  EXPECT_NEAR(path_length(make(0.07, 0.3)), 2.0796, 1e-4);
  EXPECT_NEAR(path_length(make(0.16, 0.1)), 2.4106, 1e-4);
  LawnMowerPattern circle;
  circle.laps = 1;
  circle.L = 0.0;
  circle.r = 1.0 / (2 * kPi);
  EXPECT_NEAR(path_length(circle), 1.0, 1e-15);
}

TEST(Pattern, DurationAndValidation) {
  const LawnMowerPattern p = make(0.07, 0.3, 0.15);
  EXPECT_NEAR(p.duration(), path_length(p) / 0.15, 1e-12);
  EXPECT_NEAR(p.duration(), 13.86, 0.01);
  LawnMowerPattern bad = p;
  bad.laps = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = p;
  bad.U = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = p;
  bad.r = -0.1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Pattern, SpatialPattern) {
  const LawnMowerPattern p = make(0.07, 0.3);
  EXPECT_EQ(spatial_pattern(p, Surface::flat(-0.45), 0.0), Eigen::Vector3d(0.35, -0.55, -0.45));
  LawnMowerPattern ex = make(0.2, 0.4);
  const Eigen::Vector3d v = spatial_pattern(ex, Surface::paraboloid(), 0.0);
  EXPECT_NEAR(v.x(), 0.35, 1e-15);
  EXPECT_NEAR(v.y(), -0.55, 1e-15);
  EXPECT_NEAR(v.z(), -0.4875, 1e-12);
}

TEST(Pattern, SegmentKind) {
  const LawnMowerPattern p = make(0.07, 0.3);
  EXPECT_EQ(segment_kind(p, p.L / 2), SegmentKind::Straight);
  EXPECT_EQ(segment_kind(p, p.L + kPi * p.r / 2), SegmentKind::Turn);
  EXPECT_EQ(segment_kind(p, 2 * p.L + kPi * p.r + 0.01), SegmentKind::Turn);
  // Boundaries belong to the earlier branch.
  EXPECT_EQ(segment_kind(p, p.L), SegmentKind::Straight);
  EXPECT_EQ(segment_kind(p, p.L + kPi * p.r + 1e-9), SegmentKind::Straight);
  EXPECT_EQ(pattern_point(p, 2 * p.L + kPi * p.r).segment, Segment::Straight2);
  // Second lap.
  EXPECT_EQ(segment_kind(p, p.lap_length() + p.L / 2), SegmentKind::Straight);
  EXPECT_EQ(kind_of(Segment::Turn2), SegmentKind::Turn);
}

TEST(Pattern, SpeedInvariance) {
  for (const LawnMowerPattern& p : {make(0.07, 0.3, 0.15), make(0.12, 0.2, 0.1), make(0.16, 0.1, 0.05)}) {
    const int n = 5000;
    for (int k = 0; k <= n; ++k) {
      const double t = p.duration() * k / n;
      const DesiredSpray d = eval_pattern(p, t, 0.3);
      EXPECT_NEAR(d.sigma1_des_dot.head<2>().norm(), p.U, 1e-12);
      EXPECT_EQ(d.sigma1_des_dot.z(), 0.0);
      EXPECT_EQ(d.sigma1_des.z(), 0.3);
    }
  }
}

TEST(Pattern, DerivativeMatchesDifferences) {
  const LawnMowerPattern p = make(0.12, 0.2);
  const double h = 1e-6;
  const double boundaries[] = {0.0, p.L, p.L + kPi * p.r, 2 * p.L + kPi * p.r, p.lap_length()};
  for (int k = 1; k < 2000; ++k) {
    const double s = 2 * p.lap_length() * k / 2000.0;
    const double sl = std::fmod(s, p.lap_length());
    bool near_boundary = false;
    for (double b : boundaries) near_boundary |= std::abs(sl - b) < 10 * h;
    if (near_boundary) continue;
    const Eigen::Vector2d fd = (pattern_point(p, s + h).xy - pattern_point(p, s - h).xy) / (2 * h);
    EXPECT_LT((fd - pattern_point(p, s).dxy_ds).norm(), 1e-6) << "s = " << s;
  }
}

TEST(Pattern, DerivativeContinuousAcrossBranches) {
  const LawnMowerPattern p = make(0.16, 0.1);
  for (double b : {p.L, p.L + kPi * p.r, 2 * p.L + kPi * p.r, p.lap_length()}) {
    const PatternPoint before = pattern_point(p, b - 1e-9), after = pattern_point(p, b + 1e-9);
    EXPECT_LT((before.xy - after.xy).norm(), 1e-8);
    EXPECT_LT((before.dxy_ds - after.dxy_ds).norm(), 1e-6);
  }
}

TEST(Pattern, OutOfRange) {
  const LawnMowerPattern p = make(0.07, 0.3);
  EXPECT_THROW(eval_pattern(p, -1e-3, 0.3), OutOfRange);
  EXPECT_THROW(eval_pattern(p, p.duration() + 1e-3, 0.3), OutOfRange);
  EXPECT_NO_THROW(eval_pattern(p, p.duration(), 0.3));
}

TEST(Trajectory, HoldStartHasNoFeedforward) {
  const LawnMowerPattern p = make(0.07, 0.3);
  const SprayTrajectory hold = SprayTrajectory::hold_start(p, 0.3);
  const DesiredSpray d = hold.eval(2.5);
  EXPECT_EQ(d.sigma1_des, Eigen::Vector3d(0.35, -0.55, 0.3));
  EXPECT_EQ(d.sigma1_des_dot, Eigen::Vector3d::Zero());
  const SprayTrajectory lm = SprayTrajectory::lawn_mower(p, 0.3);
  EXPECT_DOUBLE_EQ(lm.duration, p.duration());
  EXPECT_EQ(lm.eval(1.0).sigma1_des, eval_pattern(p, 1.0, 0.3).sigma1_des);
}
