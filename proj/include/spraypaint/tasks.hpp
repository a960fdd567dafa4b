#pragma once
// Operational-space tasks: end-effector position, field of view (nozzle
// misalignment) and the spray task (intersection point + stand-off distance).

#include <functional>
#include <map>
#include <string>

#include "spraypaint/kinematics.hpp"

namespace spraypaint {

// Surface z = h(x, y) with analytic first partial derivatives.
class Surface {
 public:
  using HeightFn = std::function<double(double, double)>;
  using GradFn = std::function<Eigen::Vector2d(double, double)>;

  Surface(std::string name, HeightFn height, GradFn grad, bool planar = false);

  // h(x, y) = c.
  static Surface flat(double c);
  // h(x, y) = (x - 0.5)^2 + 0.2 y - 0.4.
  static Surface paraboloid();
  // Gradient approximated by central differences of `height`.
  static Surface from_height(std::string name, HeightFn height, double step = 1e-6);

  double height(double x, double y) const { return height_(x, y); }
  Eigen::Vector2d grad(double x, double y) const { return grad_(x, y); }
  // Unnormalized upward normal (-h_x, -h_y, 1).
  Eigen::Vector3d normal(double x, double y) const;
  // True when the normal is the same everywhere (plane).
  bool planar() const { return planar_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  HeightFn height_;
  GradFn grad_;
  bool planar_;
};

// Builds a surface from a registry name plus numeric parameters.
// Known names: "flat" {c}, "paraboloid" {}.
Surface make_surface(const std::string& name, const std::map<std::string, double>& params);

struct IntersectionResult {
  double k_bar = 0.0;                           // distance along the ray [m]
  Eigen::Vector2d p_i = Eigen::Vector2d::Zero();  // (x_i, y_i)
  double z_i = 0.0;
  Eigen::Vector3d N = Eigen::Vector3d::UnitZ();  // (-h_x, -h_y, 1) at p_i
};

struct RayOptions {
  double k_max = 5.0;       // search bracket [0, k_max]
  int scan_intervals = 200;  // bracket subdivision for the first sign change
  double tolerance = 1e-9;   // on |residual| and on the bracket width
};

// Nearest k >= 0 with z_e + a_z k = h(x_e + a_x k, y_e + a_y k).
// Throws NoIntersection when no sign change exists in [0, k_max].
IntersectionResult intersect_ray(const Surface& surface, const Eigen::Vector3d& p_e,
                                 const Eigen::Vector3d& a, const RayOptions& opts = {});

struct FovTaskEval {
  double sigma_fov = 0.0;
  RowVector6d J_fov = RowVector6d::Zero();
  Eigen::Vector3d a_des = -Eigen::Vector3d::UnitZ();
};

inline constexpr double kFovEpsilon = 1e-9;

// sigma_fov = |a_des - a|, J_fov = (a_des - a)^T (dA_des/dq - J_a) / (sigma_fov + eps).
FovTaskEval fov_task(const KinematicSnapshot& snap, const Eigen::Vector3d& a_des,
                     const Matrix36d& dA_des_dq);

// Desired nozzle axis -N/|N| at the current intersection point and its
// derivative with respect to q. The derivative is exactly zero on planar
// surfaces and a central difference (step 1e-6) otherwise.
struct FovTarget {
  Eigen::Vector3d a_des = -Eigen::Vector3d::UnitZ();
  Matrix36d dA_des_dq = Matrix36d::Zero();
};
FovTarget fov_target(const Chain& chain, const Vector6d& q, const Surface& surface,
                     const IntersectionResult& hit);

struct SprayTaskEval {
  Eigen::Vector3d sigma_spray = Eigen::Vector3d::Zero();  // (x_i, y_i, k_bar)
  Matrix36d J_spray = Matrix36d::Zero();
  RowVector6d J_dist_t = RowVector6d::Zero();
  IntersectionResult hit;
};

// Spray task with the distance Jacobian taken from the tangent plane at p_i.
// Throws DegenerateTangent when |N . a| < 1e-9, NoIntersection from the ray.
SprayTaskEval spray_task(const KinematicSnapshot& snap, const Surface& surface,
                         const RayOptions& opts = {});

struct PositionTaskEval {
  Eigen::Vector3d sigma_pos;
  Matrix36d J_pos;
};

inline PositionTaskEval position_task(const KinematicSnapshot& snap) {
  return {snap.p_e, snap.J_pos};
}

}  // namespace spraypaint
