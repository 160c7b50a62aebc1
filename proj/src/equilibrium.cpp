#include "chainplan/equilibrium.hpp"

#include "chainplan/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chainplan {

WrenchGI gravito_inertial_wrench(double mass, const Eigen::Vector2d& p_com, const Eigen::Vector2d& g) {
  return {-mass * g, -mass * geom::cross(p_com, g)};
}

WrenchGI contact_wrench(const ContactSet& contacts, std::span<const Eigen::Vector2d> forces) {
  WrenchGI w;
  for (std::size_t i = 0; i < contacts.points.size(); ++i) {
    w.force += forces[i];
    w.moment += geom::cross(contacts.points[i].p, forces[i]);
  }
  return w;
}

EquilibriumResult equilibrium_feasible(const WrenchGI& wrench, const ContactSet& contacts, double mu,
                                       double f_grip_max) {
  // Columns: environment contacts contribute two cone-edge weights; grasp contacts contribute
  // shifted per-axis forces u, v in [0, 2F] with slacks (f = (u - F, v - F)).
  Eigen::Index n = 0, extra_rows = 0;
  for (const auto& c : contacts.points) {
    n += c.kind == ContactKind::Environment ? 2 : 4;
    extra_rows += c.kind == ContactKind::Grasp ? 2 : 0;
  }
  const double F = f_grip_max;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 + extra_rows, n);
  Eigen::VectorXd b(3 + extra_rows);
  b.head<2>() = wrench.force;
  b[2] = wrench.moment;
  b.tail(extra_rows).setConstant(2.0 * F);

  Eigen::Index col = 0, row = 3;
  for (const auto& c : contacts.points) {
    if (c.kind == ContactKind::Environment) {
      const Eigen::Vector2d nrm = c.normal.normalized();
      const Eigen::Vector2d t(-nrm.y(), nrm.x());
      for (const double sgn : {1.0, -1.0}) {
        const Eigen::Vector2d d = nrm + sgn * mu * t;
        A.block<2, 1>(0, col) = d;
        A(2, col) = geom::cross(c.p, d);
        ++col;
      }
    } else {
      // u -> x axis, v -> y axis.
      A(0, col) = 1.0;
      A(2, col) = -c.p.y();
      A(1, col + 1) = 1.0;
      A(2, col + 1) = c.p.x();
      b[0] += F;
      b[1] += F;
      b[2] += F * (c.p.x() - c.p.y());
      A(row, col) = 1.0;
      A(row, col + 2) = 1.0;
      A(row + 1, col + 1) = 1.0;
      A(row + 1, col + 3) = 1.0;
      col += 4;
      row += 2;
    }
  }

  EquilibriumResult res;
  if (contacts.points.empty()) {
    res.feasible = wrench.force.norm() <= 1e-9 && std::abs(wrench.moment) <= 1e-9;
    return res;
  }
  const lp::FeasibilityResult lpres = lp::find_feasible_point(A, b);
  if (!lpres.feasible) return res;

  col = 0;
  for (const auto& c : contacts.points) {
    if (c.kind == ContactKind::Environment) {
      Eigen::Vector2d f = Eigen::Vector2d::Zero();
      for (int k = 0; k < 2; ++k) f += lpres.x[col + k] * A.block<2, 1>(0, col + k);
      res.forces.push_back(f);
      col += 2;
    } else {
      res.forces.emplace_back(std::min(lpres.x[col], 2.0 * F) - F, std::min(lpres.x[col + 1], 2.0 * F) - F);
      col += 4;
    }
  }
  const WrenchGI got = contact_wrench(contacts, res.forces);
  res.feasible = (got.force - wrench.force).norm() <= 1e-7 && std::abs(got.moment - wrench.moment) <= 1e-7;
  if (!res.feasible) res.forces.clear();
  return res;
}

ContactSet placement_contacts(const Pose2& T_obj, const WorldDescription& world, const GraspSet& G,
                              const std::vector<bool>& holding) {
  ContactSet cs;
  const auto poly = world.object_vertices(T_obj);
  for (const auto& s : world.surfaces)
    for (const auto& p : poly)
      if (s.spans(p) && std::abs(s.height(p)) <= kSupportContactTol)
        cs.points.push_back({p, ContactKind::Environment, s.normal(), -1});
  for (std::size_t i = 0; i < G.grasps.size(); ++i)
    if (i < holding.size() && holding[i])
      cs.points.push_back({compose(T_obj, G.grasps[i]).translation(), ContactKind::Grasp,
                           Eigen::Vector2d::Zero(), static_cast<int>(i)});
  return cs;
}

bool placement_in_equilibrium(const Pose2& T_obj, const WorldDescription& world, const GraspSet& G,
                              std::span<const int> released) {
  const WrenchGI w = gravito_inertial_wrench(world.object.mass, T_obj.apply(world.object.com), world.gravity);
  std::vector<bool> holding(G.grasps.size(), true);
  if (released.empty())
    return equilibrium_feasible(w, placement_contacts(T_obj, world, G, holding), world.friction_mu,
                                world.grip_force_max)
        .feasible;
  for (const int arm : released) {
    holding.assign(G.grasps.size(), true);
    holding.at(static_cast<std::size_t>(arm)) = false;
    const auto res = equilibrium_feasible(w, placement_contacts(T_obj, world, G, holding), world.friction_mu,
                                          world.grip_force_max);
    if (!res.feasible) return false;
  }
  return true;
}

namespace {

// Surface directly beneath the object with the smallest gap; the gap is returned too.
std::optional<std::pair<std::size_t, double>> nearest_support(const std::vector<Eigen::Vector2d>& poly,
                                                              const WorldDescription& world) {
  std::optional<std::pair<std::size_t, double>> best;
  for (std::size_t k = 0; k < world.surfaces.size(); ++k) {
    const auto& s = world.surfaces[k];
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& p : poly)
      if (s.spans(p)) gap = std::min(gap, s.height(p));
    if (!std::isfinite(gap) || gap < -kContactTol) continue;
    if (!best || gap < best->second) best = {{k, gap}};
  }
  return best;
}

}  // namespace

std::optional<Pose2> drop_onto_support(const Pose2& T_obj, const WorldDescription& world, bool align_edge) {
  auto poly = world.object_vertices(T_obj);
  const auto sup = nearest_support(poly, world);
  if (!sup) return std::nullopt;
  const SupportSurface& s = world.surfaces[sup->first];
  Pose2 T = T_obj;

  if (align_edge) {
    std::size_t low = 0;
    for (std::size_t i = 1; i < poly.size(); ++i)
      if (s.height(poly[i]) < s.height(poly[low])) low = i;
    const std::size_t n = poly.size();
    const Eigen::Vector2d t = s.tangent();
    double best = std::numeric_limits<double>::infinity();
    for (const std::size_t other : {(low + n - 1) % n, (low + 1) % n}) {
      const Eigen::Vector2d e = poly[other] - poly[low];
      // Angle of the edge line relative to the surface line, folded into (-pi/2, pi/2].
      double a = std::atan2(geom::cross(t, e), t.dot(e));
      if (a > kPi / 2) a -= kPi;
      if (a <= -kPi / 2) a += kPi;
      if (std::abs(a) < std::abs(best)) best = a;
    }
    if (std::abs(best) > 1e-12) T = Pose2(T.x, T.y, T.theta - best);
    poly = world.object_vertices(T);
  }

  double gap = std::numeric_limits<double>::infinity();
  for (const auto& p : poly)
    if (s.spans(p)) gap = std::min(gap, s.height(p));
  if (!std::isfinite(gap)) return std::nullopt;
  if (std::abs(gap) <= kContactTol) return T;
  const Eigen::Vector2d shift = -gap * s.normal();
  return Pose2(T.x + shift.x(), T.y + shift.y(), T.theta);
}

std::optional<Pose2> sample_placement_config(const Pose2& T_obj, const WorldDescription& world, const GraspSet& G,
                                             std::span<const int> released, Rng& rng,
                                             const PlacementParams& params) {
  std::normal_distribution<double> nt(0.0, params.sigma_translation);
  std::normal_distribution<double> nr(0.0, params.sigma_rotation);
  CollisionQuery object_only;
  object_only.allow_support_contact = true;

  auto acceptable = [&](const Pose2& T) {
    for (std::size_t i = 0; i < world.arms.size(); ++i)
      if (enumerate_ik(world.arms[i], compose(T, G.grasps[i])).empty()) return false;
    const auto poly = world.object_vertices(T);
    for (const auto& o : world.obstacles)
      if (geom::polygon_segment_distance(poly, o) < world.inflation) return false;
    for (const auto& s : world.surfaces)
      for (const auto& p : poly)
        if (s.spans(p) && s.height(p) < -kContactTol && geom::polygon_segment_distance(poly, s.seg) == 0.0)
          return false;
    return placement_in_equilibrium(T, world, G, released);
  };

  for (int it = 0; it < params.max_iters; ++it) {
    Pose2 T = T_obj;
    if (it > 0) T = Pose2(T.x + nt(rng), T.y + nt(rng), T.theta + nr(rng));
    for (const bool align : {true, false}) {
      auto cand = drop_onto_support(T, world, align);
      if (!cand) continue;
      if (it > 0) {
        const auto sup = nearest_support(world.object_vertices(*cand), world);
        if (sup) {
          const Eigen::Vector2d d = nt(rng) * world.surfaces[sup->first].tangent();
          cand = Pose2(cand->x + d.x(), cand->y + d.y(), cand->theta);
        }
      }
      if (acceptable(*cand)) return cand;
    }
  }
  return std::nullopt;
}

}  // namespace chainplan
