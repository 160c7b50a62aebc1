#include "chainplan/arm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chainplan {

void ArmModel::validate() const {
  if (links.empty()) throw std::invalid_argument("arm has no links");
  for (double l : links)
    if (!(l > 0.0)) throw std::invalid_argument("link lengths must be positive");
  if (q_lower.size() != dof() || q_upper.size() != dof())
    throw std::invalid_argument("joint limit vectors must have one entry per link");
  for (int j = 0; j < dof(); ++j)
    if (!(q_lower[j] < q_upper[j])) throw std::invalid_argument("joint limits require lower < upper");
}

namespace {

void check_size(const ArmModel& arm, const JointConfig& q) {
  if (q.size() != arm.dof()) throw std::invalid_argument("joint config length does not match arm dof");
}

}  // namespace

Pose2 forward_kinematics(const ArmModel& arm, const JointConfig& q) {
  check_size(arm, q);
  double x = arm.base.x, y = arm.base.y, th = arm.base.theta;
  for (int j = 0; j < arm.dof(); ++j) {
    th += q[j];
    x += arm.links[j] * std::cos(th);
    y += arm.links[j] * std::sin(th);
  }
  return Pose2(x, y, th);
}

std::vector<Eigen::Vector2d> link_points(const ArmModel& arm, const JointConfig& q) {
  check_size(arm, q);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(arm.links.size() + 1);
  Eigen::Vector2d p(arm.base.x, arm.base.y);
  double th = arm.base.theta;
  pts.push_back(p);
  for (int j = 0; j < arm.dof(); ++j) {
    th += q[j];
    p += arm.links[j] * Eigen::Vector2d(std::cos(th), std::sin(th));
    pts.push_back(p);
  }
  return pts;
}

Jacobian jacobian(const ArmModel& arm, const JointConfig& q) {
  const auto pts = link_points(arm, q);
  const Eigen::Vector2d& ee = pts.back();
  Jacobian J(3, arm.dof());
  for (int j = 0; j < arm.dof(); ++j) {
    const Eigen::Vector2d r = ee - pts[j];
    J(0, j) = -r.y();
    J(1, j) = r.x();
    J(2, j) = 1.0;
  }
  return J;
}

bool within_limits(const ArmModel& arm, const JointConfig& q, double tol) {
  check_size(arm, q);
  for (int j = 0; j < arm.dof(); ++j)
    if (q[j] < arm.q_lower[j] - tol || q[j] > arm.q_upper[j] + tol) return false;
  return true;
}

int elbow_class(const JointConfig& q) {
  if (q.size() < 2 || q[1] == 0.0) return 0;
  return q[1] > 0.0 ? 1 : -1;
}

Eigen::Vector3d pose_error(const Pose2& target, const Pose2& actual) {
  return {actual.x - target.x, actual.y - target.y, normalize_angle(actual.theta - target.theta)};
}

namespace {

// All 2*pi shifts of `a` that land inside [lo, hi] (clamped onto the limits when
// within tolerance).
std::vector<double> periodic_candidates(double a, double lo, double hi) {
  std::vector<double> out;
  const double two_pi = 2.0 * kPi;
  const double k0 = std::ceil((lo - kJointTol - a) / two_pi);
  for (double k = k0;; k += 1.0) {
    const double v = a + k * two_pi;
    if (v > hi + kJointTol) break;
    if (v >= lo - kJointTol) out.push_back(std::clamp(v, lo, hi));
  }
  return out;
}

}  // namespace

std::vector<JointConfig> enumerate_ik(const ArmModel& arm, const Pose2& target) {
  if (arm.dof() != 3) throw std::invalid_argument("analytic IK enumeration requires a planar 3R arm");
  const double l1 = arm.links[0], l2 = arm.links[1], l3 = arm.links[2];
  const Pose2 local = compose(invert(arm.base), target);
  const double phi = local.theta;
  const double wx = local.x - l3 * std::cos(phi);
  const double wy = local.y - l3 * std::sin(phi);
  const double r2 = wx * wx + wy * wy;
  double c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c2 > 1.0 + 1e-10 || c2 < -1.0 - 1e-10) return {};
  c2 = std::clamp(c2, -1.0, 1.0);
  // Snap rounding noise at full extension or full fold so the straight solution is not split in two.
  if (1.0 - std::abs(c2) < 1e-12) c2 = c2 > 0.0 ? 1.0 : -1.0;

  std::vector<double> elbows{std::acos(c2)};
  if (elbows[0] > 1e-12 && elbows[0] < kPi - 1e-12) elbows.push_back(-elbows[0]);

  std::vector<JointConfig> out;
  for (double q2 : elbows) {
    const double q1 = std::atan2(wy, wx) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
    const double q3 = phi - q1 - q2;
    const auto c1 = periodic_candidates(normalize_angle(q1), arm.q_lower[0], arm.q_upper[0]);
    const auto cc2 = periodic_candidates(normalize_angle(q2), arm.q_lower[1], arm.q_upper[1]);
    const auto c3 = periodic_candidates(normalize_angle(q3), arm.q_lower[2], arm.q_upper[2]);
    for (double a : c1)
      for (double b : cc2)
        for (double c : c3) {
          JointConfig q(3);
          q << a, b, c;
          const Eigen::Vector3d err = pose_error(target, forward_kinematics(arm, q));
          const bool dup = std::any_of(out.begin(), out.end(), [&](const JointConfig& o) {
            return (o - q).cwiseAbs().maxCoeff() < 1e-6;
          });
          if (err.norm() <= 1e-8 && !dup) out.push_back(q);
        }
  }
  return out;
}

std::string_view to_string(IkFailure f) {
  switch (f) {
    case IkFailure::None: return "none";
    case IkFailure::Limit: return "limit";
    case IkFailure::Diverged: return "diverged";
    case IkFailure::Jump: return "jump";
  }
  return "unknown";
}

IkStep differential_ik_step(const ArmModel& arm, const JointConfig& q_prev, const Pose2& target,
                            const DiffIkParams& params) {
  check_size(arm, q_prev);
  JointConfig q = q_prev;
  const double lambda2 = params.damping * params.damping;
  bool converged = false;
  for (int it = 0; it <= params.max_iters; ++it) {
    const Eigen::Vector3d err = pose_error(target, forward_kinematics(arm, q));
    if (err.norm() <= params.tol) {
      converged = true;
      break;
    }
    if (it == params.max_iters) break;
    const Jacobian J = jacobian(arm, q);
    const Eigen::Matrix3d A = J * J.transpose() + lambda2 * Eigen::Matrix3d::Identity();
    Eigen::VectorXd dq = -J.transpose() * A.ldlt().solve(err);
    const double m = dq.cwiseAbs().maxCoeff();
    if (m > params.max_joint_step) dq *= params.max_joint_step / m;
    q += dq;
  }
  if (!converged) return {q_prev, IkFailure::Diverged};
  if (!within_limits(arm, q)) return {q, IkFailure::Limit};
  const int c0 = elbow_class(q_prev), c1 = elbow_class(q);
  if ((q - q_prev).cwiseAbs().maxCoeff() > params.max_joint_step || c0 * c1 < 0) return {q, IkFailure::Jump};
  for (int j = 0; j < arm.dof(); ++j) q[j] = std::clamp(q[j], arm.q_lower[j], arm.q_upper[j]);
  return {q, IkFailure::None};
}

BoundaryFlags is_near_boundary(const ArmModel& arm, const JointConfig& q, double eps) {
  check_size(arm, q);
  BoundaryFlags f;
  f.joints.resize(static_cast<std::size_t>(arm.dof()));
  for (int j = 0; j < arm.dof(); ++j) {
    const bool hit = q[j] <= arm.q_lower[j] + eps || q[j] >= arm.q_upper[j] - eps;
    f.joints[static_cast<std::size_t>(j)] = hit;
    f.any = f.any || hit;
  }
  return f;
}

double flexibility_score(const ArmModel& arm, const JointConfig& q) {
  check_size(arm, q);
  return (arm.q_upper - q).dot(q - arm.q_lower);
}

}  // namespace chainplan
