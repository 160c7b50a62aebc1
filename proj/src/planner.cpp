#include "chainplan/planner.hpp"

#include "chainplan/ikswitch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace chainplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void log_line(const PlannerParams& params, const std::string& s) {
  if (params.log) params.log(s);
}

void audit_or_throw(const Forest& forest, const PlannerParams& params) {
  if (!params.audit) return;
  if (auto err = forest.audit()) throw std::logic_error("tree audit failed: " + *err);
}

ChainParams chain_params(const PlannerParams& params, const CollisionQuery& collision) {
  ChainParams cp;
  cp.ik = params.ik;
  cp.w_rot = params.w_rot;
  cp.collision = collision;
  return cp;
}

double joint_distance(const CompositeConfig& a, const CompositeConfig& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.arms.size(); ++i) s += (a.arms[i] - b.arms[i]).squaredNorm();
  return std::sqrt(s);
}

}  // namespace

std::string_view to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Reached: return "REACHED";
    case PathStatus::NeedRegrasp: return "NEED_REGRASP";
    case PathStatus::Trapped: return "TRAPPED";
  }
  return "?";
}

CompositeConfig select_goal_composite(const Pose2& T_goal, const GraspSet& G, const WorldDescription& world,
                                      GoalHeuristic heuristic, const CompositeConfig& c_start, Rng& rng) {
  std::vector<std::vector<JointConfig>> sols;
  for (std::size_t i = 0; i < world.arms.size(); ++i) {
    sols.push_back(enumerate_ik(world.arms[i], compose(T_goal, G.grasps.at(i))));
    if (sols.back().empty()) throw NoGoalIk("arm " + std::to_string(i) + " cannot reach its grasp at the goal");
  }

  // Mixed-radix walk over the Cartesian product; the last arm varies fastest.
  std::size_t total = 1;
  for (const auto& s : sols) total *= s.size();
  std::vector<CompositeConfig> candidates;
  for (std::size_t n = 0; n < total; ++n) {
    CompositeConfig c;
    c.object = T_goal;
    c.arms.resize(sols.size());
    std::size_t r = n;
    for (std::size_t i = sols.size(); i-- > 0;) {
      c.arms[i] = sols[i][r % sols[i].size()];
      r /= sols[i].size();
    }
    if (collision_free(c, world)) candidates.push_back(std::move(c));
  }
  if (candidates.empty()) throw NoGoalIk("every goal IK combination collides");

  switch (heuristic) {
    case GoalHeuristic::Random: {
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      return candidates[pick(rng)];
    }
    case GoalHeuristic::NearestToStart: {
      std::size_t best = 0;
      for (std::size_t k = 1; k < candidates.size(); ++k)
        if (joint_distance(candidates[k], c_start) < joint_distance(candidates[best], c_start)) best = k;
      return candidates[best];
    }
    case GoalHeuristic::MostFlexible: {
      auto score = [&](const CompositeConfig& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < c.arms.size(); ++i) s += flexibility_score(world.arms[i], c.arms[i]);
        return s;
      };
      std::size_t best = 0;
      for (std::size_t k = 1; k < candidates.size(); ++k)
        if (score(candidates[k]) > score(candidates[best])) best = k;
      return candidates[best];
    }
  }
  return candidates.front();
}

std::optional<VertexId> nearest_neighbor(const Forest& forest, int t, const Pose2& T, int budget, double w_rot,
                                         bool hosting_regrasp) {
  std::optional<VertexId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& v : forest.vertices()) {
    if (v.tree != t || v.regrasp_count > budget) continue;
    if (hosting_regrasp && forest.blacklisted(v.config.object, w_rot)) continue;
    const double d = pose_distance(v.config.object, T, w_rot);
    if (d < best_d) {  // strict: the lowest id wins ties
      best_d = d;
      best = v.id;
    }
  }
  return best;
}

std::optional<CompositeConfig> get_regrasp_config(const CompositeConfig& c, int index, const GraspSet& G,
                                                  const WorldDescription& world, const CollisionQuery& collision) {
  const auto i = static_cast<std::size_t>(index);
  const auto sols = enumerate_ik(world.arms.at(i), compose(c.object, G.grasps.at(i)));
  std::optional<CompositeConfig> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& q : sols) {
    if ((q - c.arms[i]).cwiseAbs().maxCoeff() <= 1e-6) continue;
    if (elbow_class(q) == elbow_class(c.arms[i])) continue;
    const double s = flexibility_score(world.arms[i], q);
    if (s <= best_score) continue;
    CompositeConfig cand = c;
    cand.arms[i] = q;
    if (!collision_free(cand, world, collision)) continue;
    best_score = s;
    best = std::move(cand);
  }
  return best;
}

PathResult compute_path(const CompositeConfig& c_start, const PosePath2& object_path, const GraspSet& G,
                        const WorldDescription& world, const PlannerParams& params, const CollisionQuery& collision) {
  const ChainParams cp = chain_params(params, collision);
  const auto poses = discretize_path(object_path, params.step, params.w_rot);

  PathResult res;
  res.path.push_back(c_start);
  for (std::size_t k = 1; k < poses.size(); ++k) {
    if (poses[k] == poses[k - 1]) continue;
    // Sub-step the segment, halving on failure. The step never grows back, so a failure that
    // persists after refine_depth halvings is reported close to where it happens.
    const PosePath2 seg = interpolate_pose_path(poses[k - 1], poses[k], params.w_rot);
    double s = 0.0, h = 1.0;
    int halvings = 0;
    std::optional<ChainStep> failure;
    while (s < 1.0) {
      const double s_next = std::min(1.0, s + h);
      const Pose2 T = s_next >= 1.0 ? poses[k] : seg.eval(s_next);
      ChainStep m = compute_composite_config(res.path.back(), T, G, world, cp);
      if (m.ok()) {
        res.path.push_back(std::move(*m.config));
        s = s_next;
        continue;
      }
      if (halvings == params.refine_depth) {
        failure = std::move(m);
        break;
      }
      h *= 0.5;
      ++halvings;
    }
    if (!failure) continue;

    if (failure->kind == ChainFailure::Ik && failure->arm >= 0) {
      const auto a = static_cast<std::size_t>(failure->arm);
      if (is_near_boundary(world.arms[a], res.path.back().arms[a], params.eps_boundary).any) {
        res.c_regrasp = get_regrasp_config(res.path.back(), failure->arm, G, world, collision);
        if (res.c_regrasp) {
          res.status = PathStatus::NeedRegrasp;
          return res;
        }
      }
    }
    res.status = PathStatus::Trapped;
    return res;
  }
  res.status = PathStatus::Reached;
  return res;
}

std::optional<VertexId> extend(Forest& forest, int t, const Pose2& T_rand, const PlannerParams& params,
                               const GraspSet& G, const WorldDescription& world) {
  const auto near = nearest_neighbor(forest, t, T_rand, params.r_max, params.w_rot);
  if (!near) return std::nullopt;
  const CompositeConfig c_near = forest.vertex(*near).config;
  const int near_count = forest.vertex(*near).regrasp_count;

  const double d = pose_distance(c_near.object, T_rand, params.w_rot);
  if (d <= 1e-12) return std::nullopt;
  const Pose2 target = d > params.d_ext ? interpolate_pose_path(c_near.object, T_rand, params.w_rot).eval(params.d_ext / d)
                                        : T_rand;
  PathResult r = compute_path(c_near, interpolate_pose_path(c_near.object, target, params.w_rot), G, world, params);

  if (r.status == PathStatus::Reached) {
    CompositeConfig end = r.path.back();
    const VertexId id = forest.add_vertex(*near, std::move(end), std::move(r.path), SwitchSite::None);
    log_line(params, "extend tree=" + std::to_string(t) + " vertex=" + std::to_string(id) + " parent=" +
                         std::to_string(*near));
    return id;
  }
  if (r.status == PathStatus::NeedRegrasp && near_count < params.r_max && r.path.size() > 1 &&
      !forest.blacklisted(r.c_regrasp->object, params.w_rot)) {
    const VertexId id = forest.add_vertex(*near, std::move(*r.c_regrasp), std::move(r.path), SwitchSite::AtChild);
    log_line(params, "extend tree=" + std::to_string(t) + " vertex=" + std::to_string(id) + " parent=" +
                         std::to_string(*near) + " need_regrasp");
    return id;
  }
  return std::nullopt;
}

std::optional<Connection> connect(const Forest& forest, VertexId v_new, const PlannerParams& params,
                                  const GraspSet& G, const WorldDescription& world) {
  const TreeVertex& vn = forest.vertex(v_new);
  const int other = 1 - vn.tree;
  const int budget = params.r_max - vn.regrasp_count;
  const auto near = nearest_neighbor(forest, other, vn.config.object, budget, params.w_rot);
  if (!near) return std::nullopt;
  const TreeVertex& vb = forest.vertex(*near);

  PathResult r =
      compute_path(vb.config, interpolate_pose_path(vb.config.object, vn.config.object, params.w_rot), G, world, params);
  if (r.status != PathStatus::Reached) return std::nullopt;

  Connection conn;
  conn.v_new = v_new;
  conn.v_near = *near;
  conn.path = std::move(r.path);
  conn.path.back().object = vn.config.object;
  if (same_composite(conn.path.back(), vn.config)) {
    conn.path.back() = vn.config;
    return conn;
  }
  if (vn.regrasp_count + vb.regrasp_count < params.r_max && !forest.blacklisted(vn.config.object, params.w_rot)) {
    conn.need_regrasp = true;
    return conn;
  }
  return std::nullopt;
}

void reorganize(Forest& forest, const Connection& conn, const SwitchFailure& fail, const PlannerParams& params) {
  if (fail.on_connection) {
    // The bridge itself cannot switch; nothing in the trees changes.
    forest.add_blacklist({conn.path.back().object, params.r_blacklist});
    log_line(params, "reorganize connection v_new=" + std::to_string(conn.v_new) + " blacklisted sizes=" +
                         std::to_string(forest.tree_size(0)) + "+" + std::to_string(forest.tree_size(1)) + "/" +
                         std::to_string(forest.size()));
    audit_or_throw(forest, params);
    return;
  }

  const Pose2 center = forest.switch_pose(fail.vertex);
  const int fail_tree = forest.vertex(fail.vertex).tree;
  const std::size_t total = forest.size();
  if (fail_tree == forest.vertex(conn.v_new).tree) {
    forest.reroot(fail.vertex, conn.v_new, conn.v_near, conn.path,
                  conn.need_regrasp ? SwitchSite::AtChild : SwitchSite::None, conn.has_regrasp, conn.action);
  } else {
    CompositePath rev(conn.path.rbegin(), conn.path.rend());
    std::optional<RegraspAction> act;
    if (conn.action) act = reversed(*conn.action);
    forest.reroot(fail.vertex, conn.v_near, conn.v_new, std::move(rev),
                  conn.need_regrasp ? SwitchSite::AtParent : SwitchSite::None, conn.has_regrasp, std::move(act));
  }
  forest.add_blacklist({center, params.r_blacklist});
  if (forest.size() != total) throw std::logic_error("reorganize changed the vertex count");
  log_line(params, "reorganize cut=" + std::to_string(fail.vertex) + " into tree=" + std::to_string(1 - fail_tree) +
                       " sizes=" + std::to_string(forest.tree_size(0)) + "+" + std::to_string(forest.tree_size(1)) +
                       "/" + std::to_string(total));
  audit_or_throw(forest, params);
}

PlanOutcome plan(const CompositeConfig& c_start, const Pose2& T_goal, const PlannerParams& params,
                 const GraspSet& G, const WorldDescription& world) {
  if (params.n_max <= 0 || params.r_max < 0 || params.step <= 0.0 || params.w_rot <= 0.0 || params.d_ext <= 0.0)
    throw std::invalid_argument("planner parameters out of range");
  if (!chain_closed(c_start, G, world)) throw std::invalid_argument("start configuration is not chain-closed");
  if (auto col = find_collision(c_start, world)) throw std::invalid_argument("start configuration collides: " + *col);

  const auto t0 = Clock::now();
  Rng rng(params.seed);
  PlanOutcome out;

  if (pose_distance(c_start.object, T_goal, params.w_rot) <= 1e-12) {
    out.status = PlanStatus::Success;
    out.plan.phases.push_back(ClosedChainSegment{{c_start}});
    out.stats.total_seconds = out.stats.global_seconds = seconds_since(t0);
    out.stats.vertices = 1;
    return out;
  }

  const CompositeConfig c_goal = select_goal_composite(T_goal, G, world, params.goal_heuristic, c_start, rng);
  Forest forest(c_start, c_goal);
  int injected = 0;
  double regrasp_seconds = 0.0;
  int f = 0;

  for (int it = 0; it < params.n_max; ++it) {
    out.stats.iterations = it + 1;
    const Pose2 T_rand = sample_object_pose(params.bounds, rng);
    if (const auto v = extend(forest, f, T_rand, params, G, world)) {
      audit_or_throw(forest, params);
      if (auto conn = connect(forest, *v, params, G, world)) {
        const auto ts = Clock::now();
        IkSwitchOutcome sw;
        std::optional<SwitchFailure> forced;
        if (injected < params.inject_stage2_failures) forced = first_pending_switch(forest, *conn);
        if (forced) {
          ++injected;
          sw.failure = *forced;
        } else {
          sw = plan_ik_switch(forest, *conn, G, world, params, rng);
        }
        regrasp_seconds += seconds_since(ts);
        if (sw.ok) {
          out.status = PlanStatus::Success;
          out.plan = build_plan(forest, *conn);
          break;
        }
        ++out.stats.stage2_failures;
        reorganize(forest, *conn, sw.failure, params);
      }
    }
    f = 1 - f;
  }

  out.stats.total_seconds = seconds_since(t0);
  out.stats.regrasp_seconds = regrasp_seconds;
  out.stats.global_seconds = out.stats.total_seconds - regrasp_seconds;
  out.stats.vertices = forest.size();
  out.stats.regrasp_count = out.plan.switch_count();
  return out;
}

}  // namespace chainplan
