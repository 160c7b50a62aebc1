#pragma once

#include "chainplan/equilibrium.hpp"
#include "chainplan/plan.hpp"
#include "chainplan/tree.hpp"
#include "chainplan/world.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chainplan {

enum class GoalHeuristic { Random, NearestToStart, MostFlexible };

struct PlannerParams {
  // Stage 1.
  int n_max = 2000;
  int r_max = 1;
  double step = 0.05;  // object path discretization, metric units
  double w_rot = 0.3;  // m/rad
  double eps_boundary = 0.05;
  std::uint64_t seed = 0;
  PlanarBounds bounds{-1.0, 1.0, 0.0, 1.0};
  double d_ext = 0.4;
  double r_blacklist = 0.1;
  GoalHeuristic goal_heuristic = GoalHeuristic::NearestToStart;
  DiffIkParams ik;
  int refine_depth = 8;  // sub-step halvings allowed before a failing step is final

  // Stage 2.
  int n_max_switch = 20;
  int n_max_regrasp = 3000;
  double regrasp_resolution = 0.02;  // rad
  double regrasp_extend = 0.3;       // rad, BiRRT extension length
  int shortcut_attempts = 100;
  double retreat = 0.05;  // m, gripper back-off along the approach axis
  int retreat_steps = 10;
  PlacementParams placement;

  /// Test hook: the first N stage-2 invocations fail at their first flagged edge.
  int inject_stage2_failures = 0;
  /// Run Forest::audit after every tree mutation and throw on violation.
  bool audit = false;
  /// Optional sink for one line per tree mutation.
  std::function<void(const std::string&)> log;
};

class NoGoalIk : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chain-closed, collision-free composite at T_goal chosen among all IK combinations.
/// Throws NoGoalIk when some arm cannot reach its grasp or every combination collides.
CompositeConfig select_goal_composite(const Pose2& T_goal, const GraspSet& G, const WorldDescription& world,
                                      GoalHeuristic heuristic, const CompositeConfig& c_start, Rng& rng);

/// Closest vertex of tree `t` among those with regrasp_count <= budget. With
/// hosting_regrasp, vertices inside a blacklist ball are skipped. Ties go to the lowest id.
std::optional<VertexId> nearest_neighbor(const Forest& forest, int t, const Pose2& T, int budget, double w_rot,
                                         bool hosting_regrasp = false);

enum class PathStatus { Reached, NeedRegrasp, Trapped };
std::string_view to_string(PathStatus s);

struct PathResult {
  PathStatus status = PathStatus::Trapped;
  CompositePath path;  // starts with c_start
  std::optional<CompositeConfig> c_regrasp;
};

/// Follows the object path with the closed chain. A failing step is retried at half length,
/// up to refine_depth times; a failing arm pressed against a joint limit yields NeedRegrasp.
PathResult compute_path(const CompositeConfig& c_start, const PosePath2& object_path, const GraspSet& G,
                        const WorldDescription& world, const PlannerParams& params,
                        const CollisionQuery& collision = {});

/// Swaps arm `index` to its most flexible other IK solution at the current object pose.
std::optional<CompositeConfig> get_regrasp_config(const CompositeConfig& c, int index, const GraspSet& G,
                                                  const WorldDescription& world,
                                                  const CollisionQuery& collision = {});

std::optional<VertexId> extend(Forest& forest, int t, const Pose2& T_rand, const PlannerParams& params,
                               const GraspSet& G, const WorldDescription& world);

/// Bridge between a fresh vertex and the opposite tree. `path` runs from v_near's config to
/// v_new's pose; with need_regrasp the switch sits at its end.
struct Connection {
  VertexId v_new = -1;
  VertexId v_near = -1;
  CompositePath path;
  bool need_regrasp = false;
  bool has_regrasp = false;
  std::optional<RegraspAction> action;  // v_near -> v_new direction
};

std::optional<Connection> connect(const Forest& forest, VertexId v_new, const PlannerParams& params,
                                  const GraspSet& G, const WorldDescription& world);

/// Identifies the flagged edge whose stage-2 planning failed.
struct SwitchFailure {
  bool on_connection = false;
  VertexId vertex = -1;  // owner of the failing inbound edge when !on_connection
};

/// Drops the failing edge, keeps the bridge as a tree edge (re-rooting the severed subtree
/// into the opposite tree) and blacklists the failed switch pose.
void reorganize(Forest& forest, const Connection& conn, const SwitchFailure& fail, const PlannerParams& params);

enum class PlanStatus { Success, Failure };

struct PlanStats {
  int iterations = 0;
  int stage2_failures = 0;
  int regrasp_count = 0;
  double global_seconds = 0.0;
  double regrasp_seconds = 0.0;
  double total_seconds = 0.0;
  std::size_t vertices = 0;
};

struct PlanOutcome {
  PlanStatus status = PlanStatus::Failure;
  CompositePlan plan;
  PlanStats stats;
};

/// Two-stage planning query. Throws NoGoalIk, or std::invalid_argument when c_start is not
/// chain-closed and collision-free.
PlanOutcome plan(const CompositeConfig& c_start, const Pose2& T_goal, const PlannerParams& params,
                 const GraspSet& G, const WorldDescription& world);

}  // namespace chainplan
