#pragma once

#include "chainplan/pose.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>
#include <vector>

namespace chainplan {

using JointConfig = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Planar serial arm of revolute joints. Link i rotates about the end of link i-1.
struct ArmModel {
  Pose2 base;
  std::vector<double> links;
  JointConfig q_lower;
  JointConfig q_upper;

  int dof() const { return static_cast<int>(links.size()); }
  /// Throws std::invalid_argument on non-positive links, inverted limits or size mismatch.
  void validate() const;
};

/// Tolerance used when comparing joint values against limits.
inline constexpr double kJointTol = 1e-9;

Pose2 forward_kinematics(const ArmModel& arm, const JointConfig& q);

/// Base, each joint, and the end-effector: dof + 1 points.
std::vector<Eigen::Vector2d> link_points(const ArmModel& arm, const JointConfig& q);

/// d(x, y, theta)/dq in the world frame.
Jacobian jacobian(const ArmModel& arm, const JointConfig& q);

bool within_limits(const ArmModel& arm, const JointConfig& q, double tol = kJointTol);

/// IK class label: sign of the elbow joint (+1 elbow-down, -1 elbow-up, 0 straight).
int elbow_class(const JointConfig& q);

/// Every joint-limit-respecting solution reaching `target` to 1e-8.
/// Planar 3R only. Elbow-down solutions come first; empty when unreachable.
std::vector<JointConfig> enumerate_ik(const ArmModel& arm, const Pose2& target);

struct DiffIkParams {
  double damping = 1e-4;
  int max_iters = 100;
  double tol = 1e-10;
  double max_joint_step = 0.2;
};

enum class IkFailure { None, Limit, Diverged, Jump };
std::string_view to_string(IkFailure f);

struct IkStep {
  JointConfig q;
  IkFailure failure = IkFailure::None;
  bool ok() const { return failure == IkFailure::None; }
};

/// Damped least-squares tracking of `target` starting from q_prev.
///
/// A converged point is rejected as Limit when outside the joint box, and as Jump
/// when it moved more than max_joint_step in any joint or changed elbow class.
IkStep differential_ik_step(const ArmModel& arm, const JointConfig& q_prev, const Pose2& target,
                            const DiffIkParams& params = {});

/// Task-space error (dx, dy, wrapped dtheta) of `actual` relative to `target`.
Eigen::Vector3d pose_error(const Pose2& target, const Pose2& actual);

struct BoundaryFlags {
  std::vector<bool> joints;
  bool any = false;
};

/// Closed comparison: joint j is flagged when q_j <= lower_j + eps or q_j >= upper_j - eps.
BoundaryFlags is_near_boundary(const ArmModel& arm, const JointConfig& q, double eps);

/// (q_upper - q)^T (q - q_lower).
double flexibility_score(const ArmModel& arm, const JointConfig& q);

}  // namespace chainplan
