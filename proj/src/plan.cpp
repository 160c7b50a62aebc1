#include "chainplan/plan.hpp"

#include "chainplan/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace chainplan {

int CompositePlan::switch_count() const {
  return static_cast<int>(std::count_if(phases.begin(), phases.end(), [](const PlanPhase& p) {
    return std::holds_alternative<IkSwitchPhase>(p);
  }));
}

const CompositeConfig& CompositePlan::first() const {
  if (phases.empty()) throw std::logic_error("empty plan");
  if (const auto* s = std::get_if<ClosedChainSegment>(&phases.front())) return s->waypoints.front();
  return std::get<IkSwitchPhase>(phases.front()).action.go.front();
}

const CompositeConfig& CompositePlan::last() const {
  if (phases.empty()) throw std::logic_error("empty plan");
  if (const auto* s = std::get_if<ClosedChainSegment>(&phases.back())) return s->waypoints.back();
  return std::get<IkSwitchPhase>(phases.back()).action.back.back();
}

namespace {

constexpr double kJunctionTol = 1e-9;

class Replay {
 public:
  Replay(const GraspSet& G, const WorldDescription& world, const ValidationParams& params)
      : G_(G), world_(world), params_(params) {}

  // Closed-chain waypoints: every arm grasping.
  std::optional<std::string> chain(const CompositePath& path, bool allow_contact, const char* what) const {
    if (path.empty()) return std::string(what) + ": empty path";
    CollisionQuery q;
    q.allow_support_contact = allow_contact;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto& c = path[k];
      if (c.arms.size() != world_.arms.size()) return at(what, k, "wrong number of arms");
      const auto r = grasp_residual(c, G_, world_, params_.w_rot);
      for (std::size_t i = 0; i < r.size(); ++i)
        if (!(r[i] <= params_.residual_tol)) return at(what, k, "grasp residual of arm " + std::to_string(i) + " is " + num(r[i]));
      for (std::size_t i = 0; i < c.arms.size(); ++i)
        if (!within_limits(world_.arms[i], c.arms[i])) return at(what, k, "arm " + std::to_string(i) + " outside joint limits");
      if (auto col = find_collision(c, world_, q)) return at(what, k, "collision: " + *col);
      if (k > 0) {
        const double j = max_joint_jump(path[k - 1], c);
        if (j > params_.max_joint_step) return at(what, k, "joint jump " + num(j) + " rad");
      }
    }
    return std::nullopt;
  }

  // Free-arm waypoints of one switch with the object parked.
  std::optional<std::string> arm_path(const CompositeConfig& parked, int arm, const JointPath& path, bool tip_free,
                                      double max_step, const char* what) const {
    const auto a = static_cast<std::size_t>(arm);
    CompositeConfig c = parked;
    CollisionQuery q;
    q.allow_support_contact = true;
    q.exclude_tip.assign(world_.arms.size(), true);
    if (tip_free) q.exclude_tip[a] = false;
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (path[k].size() != world_.arms[a].dof()) return at(what, k, "wrong joint count");
      if (!within_limits(world_.arms[a], path[k])) return at(what, k, "outside joint limits");
      c.arms[a] = path[k];
      if (auto col = find_collision(c, world_, q)) return at(what, k, "collision: " + *col);
      if (k > 0 && (path[k] - path[k - 1]).cwiseAbs().maxCoeff() > max_step)
        return at(what, k, "joint jump " + num((path[k] - path[k - 1]).cwiseAbs().maxCoeff()) + " rad");
    }
    return std::nullopt;
  }

  static double max_joint_jump(const CompositeConfig& a, const CompositeConfig& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.arms.size(); ++i) m = std::max(m, (a.arms[i] - b.arms[i]).cwiseAbs().maxCoeff());
    return m;
  }

  static bool same(const CompositeConfig& a, const CompositeConfig& b) {
    if (a.arms.size() != b.arms.size()) return false;
    if (pose_distance(a.object, b.object, 1.0) > kJunctionTol) return false;
    return max_joint_jump(a, b) <= kJunctionTol;
  }

  static std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  }

 private:
  static std::string at(const char* what, std::size_t k, const std::string& msg) {
    return std::string(what) + " waypoint " + std::to_string(k) + ": " + msg;
  }

  const GraspSet& G_;
  const WorldDescription& world_;
  const ValidationParams& params_;
};

std::optional<std::string> check_switch(const Replay& replay, const RegraspAction& a, const GraspSet& G,
                                        const WorldDescription& world, const ValidationParams& params) {
  if (a.switches.empty()) return "switch action with no arm switches";
  if (a.go.empty() || a.back.empty()) return "switch action with an empty leg";

  // Equilibrium first: a relocated placement is reported as such rather than as a residual.
  std::vector<int> released;
  for (const auto& s : a.switches) {
    if (s.arm < 0 || static_cast<std::size_t>(s.arm) >= world.arms.size()) return "switch of an unknown arm";
    released.push_back(s.arm);
  }
  for (const int arm : released) {
    const int one[] = {arm};
    if (!placement_in_equilibrium(a.place, world, G, one))
      return "equilibrium infeasible at the placement with arm " + std::to_string(arm) + " released";
  }

  if (pose_distance(a.go.back().object, a.place, params.w_rot) > kJunctionTol) return "go leg does not end at the placement";
  if (pose_distance(a.back.front().object, a.place, params.w_rot) > kJunctionTol)
    return "back leg does not start at the placement";
  if (auto e = replay.chain(a.go, true, "go")) return e;

  CompositeConfig parked = a.go.back();
  for (const auto& s : a.switches) {
    const auto i = static_cast<std::size_t>(s.arm);
    if (s.retreat.empty() || s.swing.empty() || s.approach.empty()) return "arm switch with an empty phase";
    if ((s.retreat.front() - parked.arms[i]).cwiseAbs().maxCoeff() > kJunctionTol) return "retreat does not start at the grasp";
    if ((s.swing.front() - s.retreat.back()).cwiseAbs().maxCoeff() > kJunctionTol) return "swing does not start after retreat";
    if ((s.approach.front() - s.swing.back()).cwiseAbs().maxCoeff() > kJunctionTol) return "approach does not start after swing";
    const Pose2 grasp = compose(a.place, G.grasps[i]);
    const double drift = pose_distance(forward_kinematics(world.arms[i], s.approach.back()), grasp, params.w_rot);
    if (drift > params.residual_tol) return "arm " + std::to_string(s.arm) + " regrasps a different grasp pose";
    if (auto e = replay.arm_path(parked, s.arm, s.retreat, false, params.max_joint_step, "retreat")) return e;
    if (auto e = replay.arm_path(parked, s.arm, s.swing, true, params.max_swing_step, "swing")) return e;
    if (auto e = replay.arm_path(parked, s.arm, s.approach, false, params.max_joint_step, "approach")) return e;
    parked.arms[i] = s.approach.back();
  }
  if (!Replay::same(parked, a.back.front())) return "back leg does not start at the switched configuration";
  if (auto e = replay.chain(a.back, true, "back")) return e;
  return std::nullopt;
}

}  // namespace

std::optional<Violation> validate_plan(const CompositePlan& plan, const CompositeConfig& c_start,
                                       const Pose2& T_goal, const GraspSet& G, const WorldDescription& world,
                                       const ValidationParams& params) {
  if (plan.phases.empty()) return Violation{0, "plan has no phases"};
  const Replay replay(G, world, params);
  if (!Replay::same(plan.first(), c_start)) return Violation{0, "plan does not start at the start configuration"};

  const CompositeConfig* prev_end = nullptr;
  for (std::size_t p = 0; p < plan.phases.size(); ++p) {
    const PlanPhase& ph = plan.phases[p];
    if (const auto* seg = std::get_if<ClosedChainSegment>(&ph)) {
      if (seg->waypoints.empty()) return Violation{p, "empty segment"};
      if (prev_end && !Replay::same(*prev_end, seg->waypoints.front()))
        return Violation{p, "segment does not start where the previous phase ended"};
      if (auto e = replay.chain(seg->waypoints, false, "segment")) return Violation{p, *e};
      prev_end = &seg->waypoints.back();
    } else {
      const auto& sw = std::get<IkSwitchPhase>(ph);
      if (auto e = check_switch(replay, sw.action, G, world, params)) return Violation{p, *e};
      if (prev_end && !Replay::same(*prev_end, sw.action.go.front()))
        return Violation{p, "switch does not start where the previous phase ended"};
      prev_end = &sw.action.back.back();
    }
  }
  if (pose_distance(plan.last().object, T_goal, params.w_rot) > kJunctionTol)
    return Violation{plan.phases.size() - 1, "plan does not end at the goal pose"};
  return std::nullopt;
}

}  // namespace chainplan
