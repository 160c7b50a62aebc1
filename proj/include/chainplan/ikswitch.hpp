#pragma once

#include "chainplan/plan.hpp"
#include "chainplan/planner.hpp"
#include "chainplan/tree.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace chainplan {

/// Vertices along the solution: root of tree 0, ..., the connection, ..., root of tree 1.
std::vector<VertexId> global_path_vertices(const Forest& forest, const Connection& conn);

enum class Path2Status { Ok, GoFailed, BackFailed };
std::string_view to_string(Path2Status s);

struct Path2Result {
  Path2Status status = Path2Status::GoFailed;
  CompositePath go;    // c -> placement, c's IK classes
  CompositePath back;  // placement -> c_child, c_child's IK classes
};

/// Closed-chain legs to and from a placement. The object may rest on support surfaces.
Path2Result compute_path2(const CompositeConfig& c, const Pose2& T_place, const CompositeConfig& c_child,
                          const GraspSet& G, const WorldDescription& world, const PlannerParams& params);

/// BiRRT in the joint space of arm `arm` with everything else frozen as in `parked`. The
/// result is shortcut and densified to params.regrasp_resolution.
std::optional<JointPath> plan_regrasp_path(const JointConfig& q_from, const JointConfig& q_to, int arm,
                                           const CompositeConfig& parked, const WorldDescription& world, Rng& rng,
                                           const PlannerParams& params);

/// Open, retreat, swing, approach, close for one arm at a parked placement. `parked` holds the
/// arm at its pre-switch grasp config; q_to is the post-switch grasp config.
std::optional<ArmSwitch> plan_arm_switch(const CompositeConfig& parked, int arm, const JointConfig& q_to,
                                         const GraspSet& G, const WorldDescription& world, Rng& rng,
                                         const PlannerParams& params);

/// Arms whose joint configs differ between pre and post, lowest index first.
std::vector<int> switching_arms(const CompositeConfig& pre, const CompositeConfig& post);

/// A full IK-switch for one switch request; nullopt after params.n_max_switch attempts.
std::optional<RegraspAction> plan_regrasp_action(const SwitchRequest& req, const GraspSet& G,
                                                 const WorldDescription& world, Rng& rng,
                                                 const PlannerParams& params);

struct IkSwitchOutcome {
  bool ok = false;
  SwitchFailure failure;
};

/// The first flagged edge along the global path that has no action yet.
std::optional<SwitchFailure> first_pending_switch(const Forest& forest, const Connection& conn);

/// Plans every pending switch along the global path, storing actions on the tree edges (and
/// on the connection). Stops at the first edge that cannot be switched.
IkSwitchOutcome plan_ik_switch(Forest& forest, Connection& conn, const GraspSet& G, const WorldDescription& world,
                               const PlannerParams& params, Rng& rng);

/// Assembles the plan along the global path. Every flagged edge must carry an action.
CompositePlan build_plan(const Forest& forest, const Connection& conn);

}  // namespace chainplan
