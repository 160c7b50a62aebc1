#include "chainplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace chainplan {

Eigen::Vector2d SupportSurface::tangent() const { return (seg.b - seg.a).normalized(); }

Eigen::Vector2d SupportSurface::normal() const {
  const Eigen::Vector2d t = tangent();
  return {-t.y(), t.x()};
}

double SupportSurface::height(const Eigen::Vector2d& p) const { return normal().dot(p - seg.a); }

bool SupportSurface::spans(const Eigen::Vector2d& p, double tol) const {
  const Eigen::Vector2d d = seg.b - seg.a;
  const double s = (p - seg.a).dot(d) / d.squaredNorm();
  return s >= -tol && s <= 1.0 + tol;
}

void WorldDescription::validate() const {
  if (arms.empty()) throw std::invalid_argument("world has no arms");
  for (const auto& a : arms) a.validate();
  if (!geom::is_convex_ccw(object.vertices))
    throw std::invalid_argument("object polygon must be convex, counterclockwise, with at least 3 vertices");
  if (!(object.mass > 0.0)) throw std::invalid_argument("object mass must be positive");
  if (!(friction_mu >= 0.0)) throw std::invalid_argument("friction coefficient must be nonnegative");
  if (!(grip_force_max >= 0.0)) throw std::invalid_argument("grip force bound must be nonnegative");
  if (!(inflation >= 0.0)) throw std::invalid_argument("inflation radius must be nonnegative");
  if (!grasp_exclusion.empty() && grasp_exclusion.size() != arms.size())
    throw std::invalid_argument("grasp_exclusion needs one entry per arm");
  for (const auto& s : surfaces)
    if ((s.seg.b - s.seg.a).norm() == 0.0) throw std::invalid_argument("degenerate support surface");
}

double WorldDescription::exclusion(std::size_t arm) const {
  return grasp_exclusion.empty() ? 0.03 : grasp_exclusion.at(arm);
}

std::vector<Eigen::Vector2d> WorldDescription::object_vertices(const Pose2& T_obj) const {
  std::vector<Eigen::Vector2d> out;
  out.reserve(object.vertices.size());
  for (const auto& v : object.vertices) out.push_back(T_obj.apply(v));
  return out;
}

Pose2 project(const CompositeConfig& c) { return c.object; }

std::vector<double> grasp_residual(const CompositeConfig& c, const GraspSet& G, const WorldDescription& world,
                                   double w_rot) {
  if (c.arms.size() != world.arms.size() || G.grasps.size() != world.arms.size())
    throw std::invalid_argument("composite config, grasp set and world disagree on arm count");
  std::vector<double> r;
  r.reserve(c.arms.size());
  for (std::size_t i = 0; i < c.arms.size(); ++i)
    r.push_back(pose_distance(forward_kinematics(world.arms[i], c.arms[i]), compose(c.object, G.grasps[i]), w_rot));
  return r;
}

bool chain_closed(const CompositeConfig& c, const GraspSet& G, const WorldDescription& world, double tol) {
  const auto r = grasp_residual(c, G, world);
  return std::all_of(r.begin(), r.end(), [tol](double v) { return v <= tol; });
}

namespace {

std::vector<geom::Segment> arm_segments(const ArmModel& arm, const JointConfig& q) {
  const auto pts = link_points(arm, q);
  std::vector<geom::Segment> segs;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) segs.push_back({pts[j], pts[j + 1]});
  return segs;
}

std::string describe(const char* what, std::size_t arm, std::size_t link) {
  std::ostringstream os;
  os << what << " (arm " << arm << ", link " << link << ")";
  return os.str();
}

}  // namespace

std::optional<std::string> find_collision(const CompositeConfig& c, const WorldDescription& world,
                                          const CollisionQuery& query) {
  const double r = world.inflation;
  const auto poly = world.object_vertices(c.object);

  for (std::size_t k = 0; k < world.obstacles.size(); ++k)
    if (geom::polygon_segment_distance(poly, world.obstacles[k]) < r) return "object/obstacle " + std::to_string(k);

  for (std::size_t k = 0; k < world.surfaces.size(); ++k) {
    const auto& s = world.surfaces[k];
    const double d = geom::polygon_segment_distance(poly, s.seg);
    if (query.allow_support_contact) {
      if (d > 0.0) continue;
      const bool below = std::any_of(poly.begin(), poly.end(), [&](const Eigen::Vector2d& p) {
        return s.spans(p) && s.height(p) < -kContactTol;
      });
      if (below) return "object/surface penetration " + std::to_string(k);
    } else if (d < r) {
      return "object/surface " + std::to_string(k);
    }
  }

  std::vector<std::vector<geom::Segment>> segs;
  segs.reserve(world.arms.size());
  for (std::size_t i = 0; i < world.arms.size(); ++i) segs.push_back(arm_segments(world.arms[i], c.arms.at(i)));

  for (std::size_t i = 0; i < segs.size(); ++i) {
    const bool exclude = query.exclude_tip.empty() || query.exclude_tip.at(i);
    for (std::size_t j = 0; j < segs[i].size(); ++j) {
      const auto& s = segs[i][j];
      for (const auto& o : world.obstacles)
        if (geom::segment_distance(s, o) < r) return describe("link/obstacle", i, j);
      for (const auto& sf : world.surfaces)
        if (geom::segment_distance(s, sf.seg) < r) return describe("link/surface", i, j);

      geom::Segment probe = s;
      if (exclude && j + 1 == segs[i].size()) {
        const double len = (s.b - s.a).norm();
        const double cut = world.exclusion(i);
        if (len <= cut) continue;
        probe.b = s.b - (s.b - s.a) * (cut / len);
      }
      if (geom::polygon_segment_distance(poly, probe) < r) return describe("link/object", i, j);
    }
    for (std::size_t j = 0; j < segs[i].size(); ++j)
      for (std::size_t l = j + 2; l < segs[i].size(); ++l)
        if (geom::segment_distance(segs[i][j], segs[i][l]) < r) return describe("self", i, j);
  }

  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t m = i + 1; m < segs.size(); ++m)
      for (std::size_t j = 0; j < segs[i].size(); ++j)
        for (const auto& t : segs[m])
          if (geom::segment_distance(segs[i][j], t) < r) return describe("arm/arm", i, j);
  return std::nullopt;
}

bool collision_free(const CompositeConfig& c, const WorldDescription& world, const CollisionQuery& query) {
  return !find_collision(c, world, query).has_value();
}

ChainStep compute_composite_config(const CompositeConfig& c_prev, const Pose2& T_obj, const GraspSet& G,
                                   const WorldDescription& world, const ChainParams& params) {
  ChainStep out;
  CompositeConfig next;
  next.object = T_obj;
  next.arms.reserve(c_prev.arms.size());
  for (std::size_t i = 0; i < c_prev.arms.size(); ++i) {
    const IkStep s = differential_ik_step(world.arms[i], c_prev.arms[i], compose(T_obj, G.grasps[i]), params.ik);
    if (!s.ok()) {
      out.kind = ChainFailure::Ik;
      out.arm = static_cast<int>(i);
      out.ik = s.failure;
      return out;
    }
    next.arms.push_back(s.q);
  }
  if (!collision_free(next, world, params.collision)) {
    out.kind = ChainFailure::Collision;
    return out;
  }
  out.config = std::move(next);
  return out;
}

bool same_composite(const CompositeConfig& a, const CompositeConfig& b, double tol) {
  if (a.arms.size() != b.arms.size() || !(a.object == b.object)) return false;
  for (std::size_t i = 0; i < a.arms.size(); ++i) {
    if (a.arms[i].size() != b.arms[i].size()) return false;
    if ((a.arms[i] - b.arms[i]).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace chainplan
