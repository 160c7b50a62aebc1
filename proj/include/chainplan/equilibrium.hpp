#pragma once

#include "chainplan/pose.hpp"
#include "chainplan/world.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace chainplan {

enum class ContactKind { Environment, Grasp };

struct Contact {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();       // world frame
  ContactKind kind = ContactKind::Environment;
  Eigen::Vector2d normal = Eigen::Vector2d::UnitY();  // environment contacts only, unit, into the object
  int arm = -1;                                       // grasp contacts only
};

struct ContactSet {
  std::vector<Contact> points;
};

/// Gravity force and moment the contact forces must supply: [-m g; -m (p_com x g)].
struct WrenchGI {
  Eigen::Vector2d force = Eigen::Vector2d::Zero();
  double moment = 0.0;
};

WrenchGI gravito_inertial_wrench(double mass, const Eigen::Vector2d& p_com, const Eigen::Vector2d& g);

struct EquilibriumResult {
  bool feasible = false;
  std::vector<Eigen::Vector2d> forces;  // one per contact when feasible
};

/// Does some set of contact forces balance the wrench?
///
/// Environment contacts lie in the two-edge friction cone |f_t| <= mu f_n, f_n >= 0.
/// Grasp contacts are bounded per axis by f_grip_max.
EquilibriumResult equilibrium_feasible(const WrenchGI& wrench, const ContactSet& contacts, double mu,
                                       double f_grip_max);

/// Sum of forces and moments of a witness, for residual checks.
WrenchGI contact_wrench(const ContactSet& contacts, std::span<const Eigen::Vector2d> forces);

inline constexpr double kSupportContactTol = 1e-6;

/// Environment contacts (object vertices on a support surface) plus the grasp points of
/// every arm in `holding`.
ContactSet placement_contacts(const Pose2& T_obj, const WorldDescription& world, const GraspSet& G,
                              const std::vector<bool>& holding);

/// Equilibrium at T_obj with each arm of `released` let go in turn (all others holding).
/// With no released arms, checks the configuration with every arm holding.
bool placement_in_equilibrium(const Pose2& T_obj, const WorldDescription& world, const GraspSet& G,
                              std::span<const int> released);

struct PlacementParams {
  double sigma_translation = 0.02;  // m
  double sigma_rotation = 0.05;     // rad
  int max_iters = 30;
};

/// Drops the object onto the nearest support surface below it. When `align_edge` is set, the
/// lowest edge with the smallest angle to the surface is first rotated parallel to it.
/// nullopt when no surface lies under the object.
std::optional<Pose2> drop_onto_support(const Pose2& T_obj, const WorldDescription& world, bool align_edge);

/// Searches near T_obj for a placement touching a support surface that every arm can still
/// reach and that stays in equilibrium while each released arm lets go.
std::optional<Pose2> sample_placement_config(const Pose2& T_obj, const WorldDescription& world, const GraspSet& G,
                                             std::span<const int> released, Rng& rng,
                                             const PlacementParams& params = {});

}  // namespace chainplan
