#pragma once

#include "chainplan/plan.hpp"
#include "chainplan/world.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace chainplan {

/// Position-based force control gains, diagonal in (x, y, theta).
struct ControlGains {
  Eigen::Vector3d k_p = Eigen::Vector3d::Constant(1e-3);
  // With K = 1000 and dt = 0.008 the loop needs k_v K / dt < 0.5 (see README).
  Eigen::Vector3d k_v = Eigen::Vector3d::Constant(1e-6);
  double dt = 0.008;  // s

  void validate() const;
};

struct ComplianceStep {
  Eigen::VectorXd q_c;
  bool singular = false;  // damped pseudo-inverse used instead of J^-1
};

/// q_c + J^-1 (k_p f_e + k_v (f_e - f_e_prev) / dt).
ComplianceStep compliance_step(const Eigen::Vector3d& f_e, const Eigen::Vector3d& f_e_prev, const ControlGains& gains,
                               const Jacobian& J, const Eigen::VectorXd& q_c_prev);

struct SimParams {
  ControlGains gains;
  Eigen::Vector2d base_offset = Eigen::Vector2d::Zero();  // follower base error, m
  Eigen::Vector3d stiffness = Eigen::Vector3d::Constant(1000.0);
  double f_break = 200.0;  // N
  int settle_steps = 125;  // final pose held this many periods
};

struct TraceRecord {
  int step = 0;
  int phase = 0;
  std::string tag;  // "segment", "settle", or one of the switch phase tags
  Eigen::VectorXd q_t;
  Eigen::VectorXd q_c;
  Eigen::VectorXd q;
  Eigen::Vector3d f_r = Eigen::Vector3d::Zero();
  Eigen::Vector3d f_e = Eigen::Vector3d::Zero();
  double residual = 0.0;  // follower grasp error, pose_distance
  bool singular = false;
};

struct ExecutionTrace {
  std::vector<TraceRecord> records;
  bool aborted = false;
  std::string abort_reason;

  double peak_force() const;
  /// |f_e| at the last record.
  double steady_state_force() const;
};

/// Leader (arm 0) tracks the plan exactly; follower (arm 1) sits on a base displaced by
/// base_offset and adds the compliance margin while both arms grasp. Switch phases run open
/// loop and reset the margin.
ExecutionTrace simulate_execution(const CompositePlan& plan, const GraspSet& G, const WorldDescription& world,
                                  const SimParams& params = {});

}  // namespace chainplan
