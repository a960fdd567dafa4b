#include "spraypaint/tasks.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "spraypaint/errors.hpp"

namespace spraypaint {

Surface::Surface(std::string name, HeightFn height, GradFn grad, bool planar)
    : name_(std::move(name)), height_(std::move(height)), grad_(std::move(grad)),
      planar_(planar) {}

Surface Surface::flat(double c) {
  return Surface(
      "flat", [c](double, double) { return c; },
      [](double, double) { return Eigen::Vector2d::Zero().eval(); }, true);
}

Surface Surface::paraboloid() {
  return Surface(
      "paraboloid",
      [](double x, double y) { return (x - 0.5) * (x - 0.5) + 0.2 * y - 0.4; },
      [](double x, double) { return Eigen::Vector2d(2.0 * (x - 0.5), 0.2); });
}

Surface Surface::from_height(std::string name, HeightFn height, double step) {
  auto grad = [height, step](double x, double y) {
    return Eigen::Vector2d((height(x + step, y) - height(x - step, y)) / (2.0 * step),
                           (height(x, y + step) - height(x, y - step)) / (2.0 * step));
  };
  return Surface(std::move(name), std::move(height), std::move(grad));
}

Eigen::Vector3d Surface::normal(double x, double y) const {
  const Eigen::Vector2d g = grad(x, y);
  return {-g.x(), -g.y(), 1.0};
}

Surface make_surface(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "flat") {
    auto it = params.find("c");
    if (it == params.end()) throw std::invalid_argument("surface 'flat' needs parameter 'c'");
    return Surface::flat(it->second);
  }
  if (name == "paraboloid") return Surface::paraboloid();
  throw std::invalid_argument("unknown surface '" + name + "'");
}

IntersectionResult intersect_ray(const Surface& surface, const Eigen::Vector3d& p_e,
                                 const Eigen::Vector3d& a, const RayOptions& opts) {
  auto residual = [&](double k) {
    return p_e.z() + a.z() * k - surface.height(p_e.x() + a.x() * k, p_e.y() + a.y() * k);
  };
  auto slope = [&](double k) {
    const Eigen::Vector2d g = surface.grad(p_e.x() + a.x() * k, p_e.y() + a.y() * k);
    return a.z() - g.x() * a.x() - g.y() * a.y();
  };

  // First sign change on a uniform scan of [0, k_max].
  double lo = 0.0;
  double g_lo = residual(lo);
  double hi = lo, g_hi = g_lo;
  bool bracketed = g_lo == 0.0;
  const double step = opts.k_max / opts.scan_intervals;
  for (int i = 1; i <= opts.scan_intervals && !bracketed; ++i) {
    hi = step * i;
    g_hi = residual(hi);
    if ((g_lo > 0.0) != (g_hi > 0.0) || g_hi == 0.0) {
      bracketed = true;
    } else {
      lo = hi;
      g_lo = g_hi;
    }
  }
  if (!bracketed) {
    throw NoIntersection("nozzle ray does not reach the surface within k_max = " +
                         std::to_string(opts.k_max) + " m");
  }

  // Safeguarded Newton on the bracket.
  double k = g_lo == 0.0 ? lo : (g_hi == 0.0 ? hi : 0.5 * (lo + hi));
  for (int it = 0; it < 200 && g_lo != 0.0 && g_hi != 0.0; ++it) {
    const double g = residual(k);
    if (std::abs(g) < 1e-3 * opts.tolerance) break;
    if ((g > 0.0) == (g_lo > 0.0)) {
      lo = k;
      g_lo = g;
    } else {
      hi = k;
      g_hi = g;
    }
    const double d = slope(k);
    double next = d != 0.0 ? k - g / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15) {
      k = next;
      break;
    }
    k = next;
  }

  IntersectionResult hit;
  hit.k_bar = k;
  hit.p_i = p_e.head<2>() + k * a.head<2>();
  hit.z_i = surface.height(hit.p_i.x(), hit.p_i.y());
  hit.N = surface.normal(hit.p_i.x(), hit.p_i.y());
  return hit;
}

FovTaskEval fov_task(const KinematicSnapshot& snap, const Eigen::Vector3d& a_des,
                     const Matrix36d& dA_des_dq) {
  FovTaskEval out;
  out.a_des = a_des;
  const Eigen::Vector3d diff = a_des - snap.a;
  out.sigma_fov = diff.norm();
  out.J_fov = diff.transpose() * (dA_des_dq - snap.J_a) / (out.sigma_fov + kFovEpsilon);
  return out;
}

FovTarget fov_target(const Chain& chain, const Vector6d& q, const Surface& surface,
                     const IntersectionResult& hit) {
  FovTarget target;
  target.a_des = -hit.N.normalized();
  if (surface.planar()) return target;

  constexpr double kStep = 1e-6;
  auto direction_at = [&](const Vector6d& qq) -> Eigen::Vector3d {
    const KinematicSnapshot s = forward_kinematics(chain, qq);
    return -intersect_ray(surface, s.p_e, s.a).N.normalized();
  };
  for (int i = 0; i < kNumJoints; ++i) {
    Vector6d qp = q, qm = q;
    qp(i) += kStep;
    qm(i) -= kStep;
    target.dA_des_dq.col(i) = (direction_at(qp) - direction_at(qm)) / (2.0 * kStep);
  }
  return target;
}

SprayTaskEval spray_task(const KinematicSnapshot& snap, const Surface& surface,
                         const RayOptions& opts) {
  SprayTaskEval out;
  out.hit = intersect_ray(surface, snap.p_e, snap.a, opts);
  const Eigen::Vector3d& n = out.hit.N;
  const Eigen::Vector3d p_i(out.hit.p_i.x(), out.hit.p_i.y(), out.hit.z_i);

  // Distance to the tangent plane at p_i along the ray: k_t = -num / den.
  const double num = n.dot(snap.p_e - p_i);
  const double den = n.dot(snap.a);
  if (std::abs(den) < 1e-9) {
    throw DegenerateTangent("nozzle ray is parallel to the tangent plane at the hit point");
  }
  const RowVector6d n_Jpos = n.transpose() * snap.J_pos;
  const RowVector6d n_Ja = n.transpose() * snap.J_a;
  out.J_dist_t = -n_Jpos / den + num * n_Ja / (den * den);

  const double k = out.hit.k_bar;
  out.sigma_spray << out.hit.p_i, k;
  for (int r = 0; r < 2; ++r) {
    out.J_spray.row(r) = snap.J_pos.row(r) + k * snap.J_a.row(r) + snap.a(r) * out.J_dist_t;
  }
  out.J_spray.row(2) = out.J_dist_t;
  return out;
}

}  // namespace spraypaint
