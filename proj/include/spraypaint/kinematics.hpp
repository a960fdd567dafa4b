#pragma once
// D-H serial-chain forward kinematics for the UR5 and pseudoinverse / CLIK helpers.

#include <Eigen/Dense>

#include <vector>

namespace spraypaint {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix36d = Eigen::Matrix<double, 3, 6>;
using RowVector6d = Eigen::Matrix<double, 1, 6>;

inline constexpr int kNumJoints = 6;

struct DHRow {
  double a = 0.0;             // link length [m]
  double alpha = 0.0;         // link twist [rad]
  double d = 0.0;             // link offset [m]
  double theta_offset = 0.0;  // added to the joint variable [rad]
};

// Ordered list of standard (distal) D-H rows. The default constructor yields
// the UR5. Shorter chains (1..6 rows) are accepted for testing; the joint
// vector stays 6-dimensional and trailing Jacobian columns are zero.
class Chain {
 public:
  Chain();
  explicit Chain(std::vector<DHRow> rows);

  static Chain ur5() { return Chain(); }

  const std::vector<DHRow>& rows() const { return rows_; }
  int size() const { return static_cast<int>(rows_.size()); }

 private:
  std::vector<DHRow> rows_;
};

struct JointState {
  Vector6d q = Vector6d::Zero();
  Vector6d qdot = Vector6d::Zero();
};

struct KinematicSnapshot {
  Eigen::Vector3d p_e = Eigen::Vector3d::Zero();  // origin of the last frame
  Eigen::Vector3d a = Eigen::Vector3d::UnitZ();   // z-axis of the last frame
  Matrix36d J_pos = Matrix36d::Zero();
  Matrix36d J_a = Matrix36d::Zero();  // d a / d q
};

// 4x4 homogeneous transform of one D-H row at joint value q.
Eigen::Matrix4d dh_transform(const DHRow& row, double q);

// End-effector position, nozzle axis and their analytic (geometric) Jacobians.
KinematicSnapshot forward_kinematics(const Chain& chain, const Vector6d& q);

struct PinvOptions {
  double sigma_tol = 1e-4;  // singular values below this are damped
  double lambda = 1e-3;     // damping factor for s < sigma_tol
};

// Moore-Penrose pseudoinverse through SVD. Singular values s < sigma_tol are
// inverted as s / (s^2 + lambda^2) so near-singular input never blows up.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& J, const PinvOptions& opts = {});

// qdot = J^+ (sigma_des_dot + Lambda * sigma_err).
// Throws std::invalid_argument on dimension mismatch.
Vector6d clik_velocity(const Eigen::MatrixXd& J, const Eigen::VectorXd& sigma_des_dot,
                       const Eigen::VectorXd& sigma_err, const Eigen::MatrixXd& Lambda,
                       const PinvOptions& opts = {});

// Damped least-squares IK placing the end effector at `p_target` with nozzle
// axis `a_target`. Used offline to produce start configurations. Returns the
// final joint vector; `residual` receives the remaining task error norm.
Vector6d solve_pose_dls(const Chain& chain, const Eigen::Vector3d& p_target,
                        const Eigen::Vector3d& a_target, const Vector6d& seed,
                        double* residual = nullptr, int max_iterations = 2000);

}  // namespace spraypaint
