#pragma once

#include "chainplan/tree.hpp"
#include "chainplan/world.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chainplan {

struct ClosedChainSegment {
  CompositePath waypoints;
};

struct IkSwitchPhase {
  VertexId vertex = -1;
  RegraspAction action;
};

using PlanPhase = std::variant<ClosedChainSegment, IkSwitchPhase>;

/// Alternating closed-chain segments and IK-switch actions.
struct CompositePlan {
  std::vector<PlanPhase> phases;

  int switch_count() const;
  const CompositeConfig& first() const;
  const CompositeConfig& last() const;
};

struct ValidationParams {
  double residual_tol = kChainTol;
  double w_rot = 0.3;
  double max_joint_step = 0.2 + 1e-9;    // closed-chain waypoint continuity
  double max_swing_step = 0.02 + 1e-9;   // free-arm waypoint continuity
};

struct Violation {
  std::size_t phase = 0;
  std::string message;
};

/// Replays a plan: grasp residual and collisions at every closed-chain waypoint, joint
/// continuity, endpoint agreement between phases, and static equilibrium whenever an arm is
/// released. Returns the first violation.
std::optional<Violation> validate_plan(const CompositePlan& plan, const CompositeConfig& c_start,
                                       const Pose2& T_goal, const GraspSet& G, const WorldDescription& world,
                                       const ValidationParams& params = {});

}  // namespace chainplan
