#include "spraypaint/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spraypaint {

namespace {

// UR5 D-H table.
std::vector<DHRow> ur5_rows() {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  return {
      {0.0, kHalfPi, 0.089, 0.0},
      {-0.425, 0.0, 0.0, 0.0},
      {-0.392, 0.0, 0.0, 0.0},
      {0.0, kHalfPi, 0.109, 0.0},
      {0.0, -kHalfPi, 0.095, 0.0},
      {0.0, 0.0, 0.082, 0.0},
  };
}

}  // namespace

Chain::Chain() : rows_(ur5_rows()) {}

Chain::Chain(std::vector<DHRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty() || rows_.size() > static_cast<std::size_t>(kNumJoints)) {
    throw std::invalid_argument("Chain: expected 1.." + std::to_string(kNumJoints) +
                                " D-H rows, got " + std::to_string(rows_.size()));
  }
}

Eigen::Matrix4d dh_transform(const DHRow& row, double q) {
  const double theta = q + row.theta_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d T;
  T << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return T;
}

KinematicSnapshot forward_kinematics(const Chain& chain, const Vector6d& q) {
  const int n = chain.size();
  // Frame origins and z-axes 0..n in base coordinates.
  std::vector<Eigen::Vector3d> origin(n + 1), zaxis(n + 1);
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  origin[0].setZero();
  zaxis[0] = Eigen::Vector3d::UnitZ();
  for (int i = 0; i < n; ++i) {
    T = T * dh_transform(chain.rows()[i], q(i));
    origin[i + 1] = T.block<3, 1>(0, 3);
    zaxis[i + 1] = T.block<3, 1>(0, 2);
  }

  KinematicSnapshot snap;
  snap.p_e = origin[n];
  snap.a = zaxis[n];
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d& z = zaxis[i];
    snap.J_pos.col(i) = z.cross(snap.p_e - origin[i]);
    snap.J_a.col(i) = z.cross(snap.a);
  }
  return snap;
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& J, const PinvOptions& opts) {
  if (J.size() == 0) return Eigen::MatrixXd::Zero(J.cols(), J.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::VectorXd inv(s.size());
  const double lambda2 = opts.lambda * opts.lambda;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    inv(i) = s(i) < opts.sigma_tol ? s(i) / (s(i) * s(i) + lambda2) : 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector6d clik_velocity(const Eigen::MatrixXd& J, const Eigen::VectorXd& sigma_des_dot,
                       const Eigen::VectorXd& sigma_err, const Eigen::MatrixXd& Lambda,
                       const PinvOptions& opts) {
  const Eigen::Index m = J.rows();
  if (J.cols() != kNumJoints || sigma_des_dot.size() != m || sigma_err.size() != m ||
      Lambda.rows() != m || Lambda.cols() != m) {
    throw std::invalid_argument("clik_velocity: dimension mismatch (J is " +
                                std::to_string(J.rows()) + "x" + std::to_string(J.cols()) +
                                ")");
  }
  return pseudoinverse(J, opts) * (sigma_des_dot + Lambda * sigma_err);
}

Vector6d solve_pose_dls(const Chain& chain, const Eigen::Vector3d& p_target,
                        const Eigen::Vector3d& a_target, const Vector6d& seed, double* residual,
                        int max_iterations) {
  constexpr double kDamping = 0.05;
  constexpr double kTolerance = 1e-12;
  Vector6d q = seed;
  double err_norm = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const KinematicSnapshot snap = forward_kinematics(chain, q);
    Vector6d err;
    err << p_target - snap.p_e, a_target.normalized() - snap.a;
    err_norm = err.norm();
    if (err_norm < kTolerance) break;
    Eigen::Matrix<double, 6, 6> J;
    J << snap.J_pos, snap.J_a;
    const Eigen::Matrix<double, 6, 6> JJt =
        J * J.transpose() + kDamping * kDamping * Eigen::Matrix<double, 6, 6>::Identity();
    q += J.transpose() * JJt.ldlt().solve(err);
  }
  if (residual != nullptr) *residual = err_norm;
  return q;
}

}  // namespace spraypaint
