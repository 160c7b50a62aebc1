#include "chainplan/ikswitch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chainplan {

namespace {

// One hop of the global path, oriented in the direction of travel.
struct Hop {
  VertexId from = -1;
  VertexId to = -1;
  bool on_connection = false;
  VertexId owner = -1;  // vertex whose inbound edge this is
  bool forward = true;  // travel agrees with the stored (parent -> child) direction
  bool flagged = false;
  bool planned = false;
};

std::vector<Hop> global_hops(const Forest& forest, const Connection& conn) {
  const auto verts = global_path_vertices(forest, conn);
  std::vector<Hop> hops;
  for (std::size_t k = 0; k + 1 < verts.size(); ++k) {
    Hop h;
    h.from = verts[k];
    h.to = verts[k + 1];
    const TreeVertex& a = forest.vertex(h.from);
    const TreeVertex& b = forest.vertex(h.to);
    if (b.parent && *b.parent == a.id) {
      h.owner = b.id;
    } else if (a.parent && *a.parent == b.id) {
      h.owner = a.id;
      h.forward = false;
    } else {
      h.on_connection = true;
      h.owner = conn.v_new;
      h.forward = h.from == conn.v_near;
    }
    if (h.on_connection) {
      h.flagged = conn.need_regrasp;
      h.planned = conn.has_regrasp;
    } else {
      h.flagged = forest.vertex(h.owner).need_regrasp();
      h.planned = forest.vertex(h.owner).has_regrasp;
    }
    hops.push_back(h);
  }
  return hops;
}

SwitchRequest stored_request(const Forest& forest, const Connection& conn, const Hop& h) {
  if (h.on_connection) return {conn.path.back(), forest.vertex(conn.v_new).config};
  return forest.switch_request(h.owner);
}

CollisionQuery parked_query(std::size_t n_arms, int free_arm) {
  CollisionQuery q;
  q.allow_support_contact = true;
  q.exclude_tip.assign(n_arms, true);
  if (free_arm >= 0) q.exclude_tip[static_cast<std::size_t>(free_arm)] = false;
  return q;
}

class ArmSpace {
 public:
  /// With `tip_free` the released arm's whole last link is checked; otherwise the open
  /// gripper may still straddle the grasp.
  ArmSpace(const CompositeConfig& parked, int arm, const WorldDescription& world, double resolution,
           bool tip_free = true)
      : c_(parked), arm_(arm), world_(world), resolution_(resolution),
        query_(parked_query(parked.arms.size(), tip_free ? arm : -1)) {}

  bool valid(const JointConfig& q) const {
    if (!within_limits(world_.arms[static_cast<std::size_t>(arm_)], q)) return false;
    c_.arms[static_cast<std::size_t>(arm_)] = q;
    return collision_free(c_, world_, query_);
  }

  bool motion_valid(const JointConfig& a, const JointConfig& b) const {
    const double span = (b - a).cwiseAbs().maxCoeff();
    const int n = std::max(1, static_cast<int>(std::ceil(span / resolution_)));
    for (int k = 1; k <= n; ++k)
      if (!valid(a + (b - a) * (static_cast<double>(k) / n))) return false;
    return true;
  }

 private:
  mutable CompositeConfig c_;
  int arm_;
  const WorldDescription& world_;
  double resolution_;
  CollisionQuery query_;
};

struct RrtNode {
  JointConfig q;
  int parent = -1;
};

int nearest_node(const std::vector<RrtNode>& tree, const JointConfig& q) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const double d = (tree[i].q - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

enum class Grow { Trapped, Advanced, Reached };

Grow grow(std::vector<RrtNode>& tree, const JointConfig& target, const ArmSpace& space, double step) {
  const int near = nearest_node(tree, target);
  const JointConfig& qn = tree[static_cast<std::size_t>(near)].q;
  const double d = (target - qn).norm();
  const bool reach = d <= step;
  const JointConfig q_new = reach ? target : JointConfig(qn + (target - qn) * (step / d));
  if (!space.motion_valid(qn, q_new)) return Grow::Trapped;
  tree.push_back({q_new, near});
  return reach ? Grow::Reached : Grow::Advanced;
}

JointPath trace(const std::vector<RrtNode>& tree, int leaf) {
  JointPath p;
  for (int i = leaf; i >= 0; i = tree[static_cast<std::size_t>(i)].parent) p.push_back(tree[static_cast<std::size_t>(i)].q);
  std::reverse(p.begin(), p.end());
  return p;
}

// Backs the gripper off along its approach axis with the closed-chain arm held by DLS steps.
std::optional<JointPath> retreat_path(const ArmSpace& hover, const ArmSpace& free_space, const ArmModel& arm,
                                      const JointConfig& q_grasp, const PlannerParams& params) {
  const Pose2 ee = forward_kinematics(arm, q_grasp);
  JointPath path{q_grasp};
  for (int k = 1; k <= params.retreat_steps; ++k) {
    const double s = params.retreat * static_cast<double>(k) / params.retreat_steps;
    const IkStep step = differential_ik_step(arm, path.back(), compose(ee, Pose2(-s, 0.0, 0.0)), params.ik);
    if (!step.ok() || !hover.valid(step.q)) return std::nullopt;
    path.push_back(step.q);
  }
  if (!free_space.valid(path.back())) return std::nullopt;
  return path;
}

}  // namespace

std::string_view to_string(Path2Status s) {
  switch (s) {
    case Path2Status::Ok: return "OK";
    case Path2Status::GoFailed: return "GO_FAILED";
    case Path2Status::BackFailed: return "BACK_FAILED";
  }
  return "?";
}

std::vector<VertexId> global_path_vertices(const Forest& forest, const Connection& conn) {
  auto up = [&](VertexId v) {
    std::vector<VertexId> chain{v};
    while (forest.vertex(chain.back()).parent) chain.push_back(*forest.vertex(chain.back()).parent);
    return chain;  // v ... root
  };
  const bool new_in_start_tree = forest.vertex(conn.v_new).tree == 0;
  auto first = up(new_in_start_tree ? conn.v_new : conn.v_near);
  const auto second = up(new_in_start_tree ? conn.v_near : conn.v_new);
  std::reverse(first.begin(), first.end());
  first.insert(first.end(), second.begin(), second.end());
  return first;
}

std::vector<int> switching_arms(const CompositeConfig& pre, const CompositeConfig& post) {
  std::vector<int> arms;
  for (std::size_t i = 0; i < pre.arms.size(); ++i)
    if ((pre.arms[i] - post.arms[i]).cwiseAbs().maxCoeff() > 1e-6) arms.push_back(static_cast<int>(i));
  return arms;
}

Path2Result compute_path2(const CompositeConfig& c, const Pose2& T_place, const CompositeConfig& c_child,
                          const GraspSet& G, const WorldDescription& world, const PlannerParams& params) {
  CollisionQuery contact;
  contact.allow_support_contact = true;
  Path2Result res;

  PathResult go = compute_path(c, interpolate_pose_path(c.object, T_place, params.w_rot), G, world, params, contact);
  if (go.status != PathStatus::Reached) return res;
  res.go = std::move(go.path);

  // The switching arms take the placement IK solution in the post-switch class.
  CompositeConfig placed = res.go.back();
  for (const int i : switching_arms(c, c_child)) {
    const auto a = static_cast<std::size_t>(i);
    const int cls = elbow_class(c_child.arms[a]);
    std::optional<JointConfig> pick;
    for (const auto& q : enumerate_ik(world.arms[a], compose(T_place, G.grasps[a]))) {
      if (elbow_class(q) != cls) continue;
      if (!pick || (q - c_child.arms[a]).norm() < (*pick - c_child.arms[a]).norm()) pick = q;
    }
    if (!pick) {
      res.status = Path2Status::BackFailed;
      return res;
    }
    placed.arms[a] = *pick;
  }
  if (!collision_free(placed, world, contact)) {
    res.status = Path2Status::BackFailed;
    return res;
  }

  PathResult back =
      compute_path(placed, interpolate_pose_path(T_place, c_child.object, params.w_rot), G, world, params, contact);
  if (back.status != PathStatus::Reached || !same_composite(back.path.back(), c_child)) {
    res.status = Path2Status::BackFailed;
    return res;
  }
  back.path.back() = c_child;
  res.back = std::move(back.path);
  res.status = Path2Status::Ok;
  return res;
}

std::optional<JointPath> plan_regrasp_path(const JointConfig& q_from, const JointConfig& q_to, int arm,
                                           const CompositeConfig& parked, const WorldDescription& world, Rng& rng,
                                           const PlannerParams& params) {
  const ArmSpace space(parked, arm, world, params.regrasp_resolution);
  if (!space.valid(q_from) || !space.valid(q_to)) return std::nullopt;
  if ((q_from - q_to).cwiseAbs().maxCoeff() <= 1e-12) return JointPath{q_from};

  const ArmModel& model = world.arms[static_cast<std::size_t>(arm)];
  JointPath path;
  if (space.motion_valid(q_from, q_to)) {
    path = {q_from, q_to};
  } else {
    std::vector<RrtNode> ta{{q_from, -1}}, tb{{q_to, -1}};
    bool a_is_start = true;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < params.n_max_regrasp && path.empty(); ++it) {
      JointConfig q_rand(model.dof());
      for (int j = 0; j < model.dof(); ++j) q_rand[j] = model.q_lower[j] + u(rng) * (model.q_upper[j] - model.q_lower[j]);
      if (grow(ta, q_rand, space, params.regrasp_extend) != Grow::Trapped) {
        const JointConfig q_new = ta.back().q;
        Grow g = Grow::Advanced;
        while (g == Grow::Advanced) g = grow(tb, q_new, space, params.regrasp_extend);
        if (g == Grow::Reached) {
          JointPath pa = trace(ta, static_cast<int>(ta.size()) - 1);
          JointPath pb = trace(tb, static_cast<int>(tb.size()) - 1);
          pb.pop_back();  // q_new appears in both
          std::reverse(pb.begin(), pb.end());
          pa.insert(pa.end(), pb.begin(), pb.end());
          if (!a_is_start) std::reverse(pa.begin(), pa.end());
          path = std::move(pa);
        }
      }
      std::swap(ta, tb);
      a_is_start = !a_is_start;
    }
    if (path.empty()) return std::nullopt;

    for (int k = 0; k < params.shortcut_attempts && path.size() > 2; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, path.size() - 1);
      std::size_t i = pick(rng), j = pick(rng);
      if (i > j) std::swap(i, j);
      if (j <= i + 1) continue;
      if (space.motion_valid(path[i], path[j]))
        path.erase(path.begin() + static_cast<std::ptrdiff_t>(i) + 1, path.begin() + static_cast<std::ptrdiff_t>(j));
    }
  }

  JointPath dense{path.front()};
  for (std::size_t k = 1; k < path.size(); ++k) {
    const JointConfig& a = path[k - 1];
    const JointConfig& b = path[k];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).cwiseAbs().maxCoeff() / params.regrasp_resolution)));
    for (int s = 1; s < n; ++s) dense.push_back(a + (b - a) * (static_cast<double>(s) / n));
    dense.push_back(b);
  }
  return dense;
}

std::optional<ArmSwitch> plan_arm_switch(const CompositeConfig& parked, int arm, const JointConfig& q_to,
                                         const GraspSet& G, const WorldDescription& world, Rng& rng,
                                         const PlannerParams& params) {
  (void)G;
  const ArmModel& model = world.arms.at(static_cast<std::size_t>(arm));
  const ArmSpace hover(parked, arm, world, params.regrasp_resolution, false);
  const ArmSpace free_space(parked, arm, world, params.regrasp_resolution, true);

  const auto retreat = retreat_path(hover, free_space, model, parked.arms[static_cast<std::size_t>(arm)], params);
  if (!retreat) return std::nullopt;
  const auto reverse_approach = retreat_path(hover, free_space, model, q_to, params);
  if (!reverse_approach) return std::nullopt;
  auto swing = plan_regrasp_path(retreat->back(), reverse_approach->back(), arm, parked, world, rng, params);
  if (!swing) return std::nullopt;

  ArmSwitch sw;
  sw.arm = arm;
  sw.retreat = *retreat;
  sw.swing = std::move(*swing);
  sw.approach.assign(reverse_approach->rbegin(), reverse_approach->rend());
  return sw;
}

std::optional<RegraspAction> plan_regrasp_action(const SwitchRequest& req, const GraspSet& G,
                                                 const WorldDescription& world, Rng& rng,
                                                 const PlannerParams& params) {
  const auto released = switching_arms(req.pre, req.post);
  if (released.empty()) throw std::logic_error("switch request with no switching arm");
  for (int attempt = 0; attempt < params.n_max_switch; ++attempt) {
    const auto place = sample_placement_config(req.pose(), world, G, released, rng, params.placement);
    if (!place) return std::nullopt;  // the search is already randomized internally
    Path2Result legs = compute_path2(req.pre, *place, req.post, G, world, params);
    if (legs.status != Path2Status::Ok) continue;

    RegraspAction act;
    act.place = *place;
    CompositeConfig parked = legs.go.back();
    bool ok = true;
    for (const int arm : released) {
      const JointConfig& q_to = legs.back.front().arms[static_cast<std::size_t>(arm)];
      auto sw = plan_arm_switch(parked, arm, q_to, G, world, rng, params);
      if (!sw) {
        ok = false;
        break;
      }
      parked.arms[static_cast<std::size_t>(arm)] = q_to;
      act.switches.push_back(std::move(*sw));
    }
    if (!ok) continue;
    act.go = std::move(legs.go);
    act.back = std::move(legs.back);
    return act;
  }
  return std::nullopt;
}

std::optional<SwitchFailure> first_pending_switch(const Forest& forest, const Connection& conn) {
  for (const Hop& h : global_hops(forest, conn))
    if (h.flagged && !h.planned) return SwitchFailure{h.on_connection, h.on_connection ? -1 : h.owner};
  return std::nullopt;
}

IkSwitchOutcome plan_ik_switch(Forest& forest, Connection& conn, const GraspSet& G, const WorldDescription& world,
                               const PlannerParams& params, Rng& rng) {
  IkSwitchOutcome out;
  for (const Hop& h : global_hops(forest, conn)) {
    if (!h.flagged || h.planned) continue;
    auto act = plan_regrasp_action(stored_request(forest, conn, h), G, world, rng, params);
    if (!act) {
      out.failure = {h.on_connection, h.on_connection ? -1 : h.owner};
      return out;
    }
    if (h.on_connection) {
      conn.action = std::move(act);
      conn.has_regrasp = true;
    } else {
      TreeVertex& v = forest.vertex(h.owner);
      v.regrasp_action = std::move(act);
      v.has_regrasp = true;
    }
  }
  out.ok = true;
  return out;
}

CompositePlan build_plan(const Forest& forest, const Connection& conn) {
  CompositePlan plan;
  const auto hops = global_hops(forest, conn);
  CompositePath seg{forest.vertex(hops.empty() ? conn.v_near : hops.front().from).config};

  auto append = [&seg](const CompositePath& p) {
    for (std::size_t k = 1; k < p.size(); ++k) seg.push_back(p[k]);
  };
  auto emit_switch = [&](VertexId owner, const RegraspAction& a, const CompositeConfig& post) {
    plan.phases.push_back(ClosedChainSegment{std::move(seg)});
    plan.phases.push_back(IkSwitchPhase{owner, a});
    seg = {post};
  };

  for (const Hop& h : hops) {
    CompositePath path;
    SwitchSite stored_site = SwitchSite::None;
    const RegraspAction* stored = nullptr;
    if (h.on_connection) {
      path = conn.path;
      if (conn.need_regrasp) stored_site = SwitchSite::AtChild;
      if (conn.action) stored = &*conn.action;
    } else {
      const TreeVertex& v = forest.vertex(h.owner);
      path = v.inbound_path;
      stored_site = v.site;
      if (v.regrasp_action) stored = &*v.regrasp_action;
    }
    if (stored_site != SwitchSite::None && !stored) throw std::logic_error("build_plan: unplanned switch");
    if (!h.forward) std::reverse(path.begin(), path.end());

    // Switch position in travel direction.
    const bool at_start = (stored_site == SwitchSite::AtParent) == h.forward && stored_site != SwitchSite::None;
    const bool at_end = stored_site != SwitchSite::None && !at_start;
    std::optional<RegraspAction> act;
    if (stored) act = h.forward ? *stored : reversed(*stored);

    if (at_start) emit_switch(h.owner, *act, path.front());
    append(path);
    if (at_end) emit_switch(h.owner, *act, forest.vertex(h.to).config);
  }
  plan.phases.push_back(ClosedChainSegment{std::move(seg)});
  return plan;
}

}  // namespace chainplan
