#pragma once

#include "chainplan/world.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chainplan {

using VertexId = int;
using CompositePath = std::vector<CompositeConfig>;
using JointPath = std::vector<JointConfig>;

/// Where along an edge the IK-switch sits, in the parent-to-child direction.
enum class SwitchSite { None, AtChild, AtParent };

/// One arm's release/swing/regrasp with the object parked.
struct ArmSwitch {
  int arm = -1;
  JointPath retreat;   // grasp config -> backed-off config (gripper open)
  JointPath swing;     // backed-off config in the old IK class -> backed-off config in the new one
  JointPath approach;  // backed-off config -> grasp config in the new IK class
};

/// A planned IK-switch: closed-chain descent to a placement, per-arm switches, and the return.
struct RegraspAction {
  Pose2 place;
  CompositePath go;    // pre-switch config -> placement (old classes)
  std::vector<ArmSwitch> switches;
  CompositePath back;  // placement (new classes) -> post-switch config
};

/// Same action traversed in the opposite direction.
RegraspAction reversed(const RegraspAction& a);

/// Pre- and post-switch configurations of a flagged edge in the direction it is traversed.
struct SwitchRequest {
  CompositeConfig pre;
  CompositeConfig post;
  Pose2 pose() const { return pre.object; }
};

struct TreeVertex {
  VertexId id = -1;
  int tree = 0;
  CompositeConfig config;
  /// Path from the parent's config to this config. A switch at one end makes that end differ
  /// from the neighboring config in the switching arms only.
  CompositePath inbound_path;
  SwitchSite site = SwitchSite::None;
  bool has_regrasp = false;
  std::optional<RegraspAction> regrasp_action;  // parent-to-child direction
  int regrasp_count = 0;
  std::optional<VertexId> parent;
  std::vector<VertexId> children;

  bool need_regrasp() const { return site != SwitchSite::None; }
};

struct BlacklistBall {
  Pose2 center;
  double radius = 0.1;
};

struct Tree {
  VertexId root = -1;
  std::vector<BlacklistBall> blacklist;
};

/// The two search trees over a shared vertex store; ids are stable across reorganization.
class Forest {
 public:
  Forest(const CompositeConfig& start_root, const CompositeConfig& goal_root);

  const TreeVertex& vertex(VertexId id) const { return vertices_.at(static_cast<std::size_t>(id)); }
  TreeVertex& vertex(VertexId id) { return vertices_.at(static_cast<std::size_t>(id)); }
  const std::vector<TreeVertex>& vertices() const { return vertices_; }
  const Tree& tree(int t) const { return trees_.at(static_cast<std::size_t>(t)); }
  Tree& tree(int t) { return trees_.at(static_cast<std::size_t>(t)); }
  std::size_t size() const { return vertices_.size(); }
  std::size_t tree_size(int t) const;

  VertexId add_vertex(VertexId parent, CompositeConfig config, CompositePath inbound, SwitchSite site);

  /// Pre/post configs of the switch on `id`'s inbound edge, traversed parent -> child.
  SwitchRequest switch_request(VertexId id) const;
  Pose2 switch_pose(VertexId id) const;

  /// Makes `id` the child of `new_parent` (in the other tree) through `edge`, reversing parent
  /// links along the path from `id` up to `cut`. The edge above `cut` is dropped.
  void reroot(VertexId cut, VertexId id, VertexId new_parent, CompositePath edge, SwitchSite site,
              bool has_regrasp, std::optional<RegraspAction> action);

  bool blacklisted(const Pose2& p, double w_rot) const;
  void add_blacklist(const BlacklistBall& ball);

  /// Checks single root per tree, acyclic parent links, child/parent symmetry, reachability and
  /// regrasp-count bookkeeping. Returns a description of the first violation.
  std::optional<std::string> audit() const;

 private:
  void recount(VertexId from);

  std::vector<TreeVertex> vertices_;
  std::vector<Tree> trees_;
};

}  // namespace chainplan
