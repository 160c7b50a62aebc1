#pragma once

#include "chainplan/arm.hpp"
#include "chainplan/geometry2d.hpp"
#include "chainplan/pose.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chainplan {

/// Fixed object-to-end-effector transforms, one per arm.
struct GraspSet {
  std::vector<Pose2> grasps;
};

/// (q_1, ..., q_k, T_obj).
struct CompositeConfig {
  std::vector<JointConfig> arms;
  Pose2 object;
};

/// A support surface is a segment whose outward normal is the left perpendicular of b - a.
struct SupportSurface {
  geom::Segment seg;
  Eigen::Vector2d normal() const;
  Eigen::Vector2d tangent() const;
  /// Signed distance of p above the surface line.
  double height(const Eigen::Vector2d& p) const;
  /// True when p projects inside the segment extent.
  bool spans(const Eigen::Vector2d& p, double tol = 1e-9) const;
};

struct ObjectModel {
  std::vector<Eigen::Vector2d> vertices;  // object frame, convex, counterclockwise
  double mass = 1.0;                      // kg
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
};

struct WorldDescription {
  std::vector<ArmModel> arms;
  ObjectModel object;
  std::vector<SupportSurface> surfaces;
  std::vector<geom::Segment> obstacles;
  double friction_mu = 0.5;
  double grip_force_max = 50.0;  // N
  Eigen::Vector2d gravity{0.0, -9.81};
  double inflation = 0.01;  // m, clearance required between collision segments
  /// Length at the distal end of each arm's last link excluded from link/object checks
  /// while the arm holds (or hovers at) its grasp.
  std::vector<double> grasp_exclusion;

  void validate() const;
  double exclusion(std::size_t arm) const;
  std::vector<Eigen::Vector2d> object_vertices(const Pose2& T_obj) const;
};

Pose2 project(const CompositeConfig& c);

/// Per-arm pose_distance between the end-effector and its grasp target.
std::vector<double> grasp_residual(const CompositeConfig& c, const GraspSet& G, const WorldDescription& world,
                                   double w_rot = 0.3);

inline constexpr double kChainTol = 1e-8;
bool chain_closed(const CompositeConfig& c, const GraspSet& G, const WorldDescription& world,
                  double tol = kChainTol);

struct CollisionQuery {
  /// Object may rest on (but not penetrate) support surfaces.
  bool allow_support_contact = false;
  /// Per arm: apply the grasp-contact exclusion to the last link. Empty means every arm.
  std::vector<bool> exclude_tip;
};

inline constexpr double kContactTol = 1e-9;

/// Description of the first collision found, or nullopt when the configuration is free.
std::optional<std::string> find_collision(const CompositeConfig& c, const WorldDescription& world,
                                          const CollisionQuery& query = {});
bool collision_free(const CompositeConfig& c, const WorldDescription& world, const CollisionQuery& query = {});

struct ChainParams {
  DiffIkParams ik;
  double w_rot = 0.3;
  CollisionQuery collision;
};

enum class ChainFailure { None, Ik, Collision };

struct ChainStep {
  std::optional<CompositeConfig> config;
  ChainFailure kind = ChainFailure::None;
  int arm = -1;  // first failing arm for Ik failures
  IkFailure ik = IkFailure::None;
  bool ok() const { return config.has_value(); }
};

/// Follows the object to T_obj with one differential IK step per arm.
ChainStep compute_composite_config(const CompositeConfig& c_prev, const Pose2& T_obj, const GraspSet& G,
                                   const WorldDescription& world, const ChainParams& params = {});

/// Arm configurations equal within tol (max abs joint difference) and object poses equal.
bool same_composite(const CompositeConfig& a, const CompositeConfig& b, double tol = 1e-6);

}  // namespace chainplan
