#include "doctest.h"

#include "chainplan/equilibrium.hpp"
#include "chainplan/simplex.hpp"
#include "oracles.hpp"
#include "testbed.hpp"

#include <cmath>

using namespace chainplan;

namespace {

const Eigen::Vector2d kG(0.0, -9.81);

Contact floor_at(double x, double y = 0.0) { return {{x, y}, ContactKind::Environment, {0.0, 1.0}, -1}; }
Contact grasp_at(double x, double y) { return {{x, y}, ContactKind::Grasp, Eigen::Vector2d::Zero(), 0}; }

bool witness_ok(const WrenchGI& w, const ContactSet& cs, const EquilibriumResult& r, double mu, double fmax) {
  const WrenchGI got = contact_wrench(cs, r.forces);
  if ((got.force - w.force).norm() > 1e-7 || std::abs(got.moment - w.moment) > 1e-7) return false;
  for (std::size_t i = 0; i < cs.points.size(); ++i) {
    const auto& c = cs.points[i];
    const Eigen::Vector2d f = r.forces[i];
    if (c.kind == ContactKind::Environment) {
      const double fn = f.dot(c.normal), ft = f.dot(Eigen::Vector2d(-c.normal.y(), c.normal.x()));
      if (fn < -1e-7 || std::abs(ft) > mu * fn + 1e-7) return false;
    } else if (f.cwiseAbs().maxCoeff() > fmax + 1e-7) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("phase-one simplex") {
  Eigen::MatrixXd A(2, 3);
  A << 1, 1, 1, 1, -1, 0;
  Eigen::VectorXd b(2);
  b << 1, 0.2;
  const auto r = lp::find_feasible_point(A, b);
  REQUIRE(r.feasible);
  CHECK((A * r.x - b).norm() < 1e-9);
  CHECK(r.x.minCoeff() >= 0.0);

  b << 1, 2;  // x1 - x2 = 2 with x1 <= 1
  CHECK_FALSE(lp::find_feasible_point(A, b).feasible);

  Eigen::MatrixXd N(1, 2);
  N << 1, 1;
  Eigen::VectorXd m(1);
  m << -1;  // negative right-hand side
  CHECK_FALSE(lp::find_feasible_point(N, m).feasible);
}

TEST_CASE("gravito_inertial_wrench") {
  const WrenchGI a = gravito_inertial_wrench(1.0, {0, 0}, kG);
  CHECK(a.force.x() == 0.0);
  CHECK(a.force.y() == doctest::Approx(9.81));
  CHECK(a.moment == 0.0);
  const WrenchGI b = gravito_inertial_wrench(1.0, {0.5, 0}, kG);
  CHECK(b.moment == doctest::Approx(4.905));
  const WrenchGI c = gravito_inertial_wrench(2.0, {0.5, 0}, kG);
  CHECK(c.force.y() == doctest::Approx(2 * b.force.y()));
  CHECK(c.moment == doctest::Approx(2 * b.moment));
}

TEST_CASE("equilibrium_feasible examples") {
  SUBCASE("resting flat") {
    ContactSet cs{{floor_at(-0.15), floor_at(0.15)}};
    const WrenchGI w = gravito_inertial_wrench(1.0, {0.0, 0.05}, kG);
    const auto r = equilibrium_feasible(w, cs, 0.5, 50);
    REQUIRE(r.feasible);
    CHECK(witness_ok(w, cs, r, 0.5, 50));
  }
  SUBCASE("balanced on a vertex with the COM outside") {
    ContactSet cs{{floor_at(0.0)}};
    const WrenchGI w = gravito_inertial_wrench(1.0, {0.2, 0.05}, kG);
    CHECK_FALSE(equilibrium_feasible(w, cs, 0.5, 50).feasible);
    CHECK_FALSE(oracle::equilibrium_line(w, cs, 0.5, 50));
  }
  SUBCASE("held at the far edge") {
    ContactSet cs{{floor_at(0.0), grasp_at(0.3, 0.05)}};
    const WrenchGI w = gravito_inertial_wrench(1.0, {0.2, 0.05}, kG);
    const auto r = equilibrium_feasible(w, cs, 0.5, 50);
    CHECK(r.feasible == oracle::equilibrium_line(w, cs, 0.5, 50));
    CHECK(r.feasible == oracle::equilibrium_grid(w, cs, 0.5, 50));
    CHECK(r.feasible);
    CHECK(witness_ok(w, cs, r, 0.5, 50));
    // A weak gripper cannot hold it.
    CHECK_FALSE(equilibrium_feasible(w, cs, 0.5, 1.0).feasible);
    CHECK_FALSE(oracle::equilibrium_line(w, cs, 0.5, 1.0));
  }
}

TEST_CASE("equilibrium_feasible agrees with the oracles on random instances") {
  Rng rng(31);
  std::uniform_real_distribution<double> u(-0.3, 0.3), mu_d(0.1, 1.0), f_d(1.0, 20.0), m_d(0.2, 3.0);
  std::uniform_int_distribution<int> kind(0, 3);
  int feasible = 0, disagree = 0;
  for (int i = 0; i < 100; ++i) {
    ContactSet cs;
    const int n = kind(rng) == 0 ? 1 : 2;
    for (int k = 0; k < n; ++k) {
      if (kind(rng) < 2) {
        // Floor or wall contact.
        const bool wall = kind(rng) == 0;
        cs.points.push_back(wall ? Contact{{0.3, u(rng) + 0.3}, ContactKind::Environment, {-1.0, 0.0}, -1} : floor_at(u(rng)));
      } else {
        cs.points.push_back(grasp_at(u(rng), 0.05 + u(rng) * 0.2));
      }
    }
    const double mu = mu_d(rng), fmax = f_d(rng);
    const WrenchGI w = gravito_inertial_wrench(m_d(rng), {u(rng), 0.05}, kG);
    const auto r = equilibrium_feasible(w, cs, mu, fmax);
    const bool ref = oracle::equilibrium_line(w, cs, mu, fmax);
    if (r.feasible != ref) ++disagree;
    if (n == 2) CHECK(ref == oracle::equilibrium_grid(w, cs, mu, fmax));
    if (r.feasible) {
      ++feasible;
      CHECK(witness_ok(w, cs, r, mu, fmax));
    }
  }
  CHECK(disagree == 0);
  CHECK(feasible > 15);
  CHECK(feasible < 85);
}

TEST_CASE("translation invariance") {
  Rng rng(32);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 50; ++i) {
    ContactSet cs{{floor_at(u(rng)), grasp_at(u(rng), 0.1)}};
    const Eigen::Vector2d com(u(rng), 0.05), d(u(rng) * 5, u(rng) * 5);
    ContactSet moved = cs;
    for (auto& c : moved.points) c.p += d;
    const bool a = equilibrium_feasible(gravito_inertial_wrench(1, com, kG), cs, 0.4, 5).feasible;
    const bool b = equilibrium_feasible(gravito_inertial_wrench(1, com + d, kG), moved, 0.4, 5).feasible;
    CHECK(a == b);
  }
}

TEST_CASE("placement sampling") {
  const Scenario sc = testbed::load("fig1a");
  const auto& w = sc.world;
  const GraspSet& G = sc.grasps;
  const int released[] = {1};
  Rng rng(5);

  SUBCASE("already placed") {
    const Pose2 T(-0.15, 0.05, 0.0);
    const auto p = sample_placement_config(T, w, G, released, rng);
    REQUIRE(p.has_value());
    CHECK(*p == T);
  }
  SUBCASE("pure drop") {
    const auto p = drop_onto_support(Pose2(-0.15, 0.15, 0.0), w, true);
    REQUIRE(p.has_value());
    CHECK(p->x == doctest::Approx(-0.15));
    CHECK(p->y == doctest::Approx(0.05));
    CHECK(std::abs(p->theta) < 1e-9);
    const auto q = sample_placement_config(Pose2(-0.15, 0.15, 0.0), w, G, released, rng);
    REQUIRE(q.has_value());
    CHECK(q->y == doctest::Approx(0.05));
  }
  SUBCASE("tilted object is aligned") {
    // Closest feature analysis by hand: the bottom edge is 0.2 rad off the floor line.
    const auto p = drop_onto_support(Pose2(-0.15, 0.2, 0.2), w, true);
    REQUIRE(p.has_value());
    CHECK(std::abs(normalize_angle(p->theta - 0.2) + 0.2) < 1e-9);
    const auto v = drop_onto_support(Pose2(-0.15, 0.2, 0.2), w, false);
    REQUIRE(v.has_value());
    CHECK(v->theta == doctest::Approx(0.2));
  }
  SUBCASE("results touch a surface and balance") {
    Rng r2(6);
    std::uniform_real_distribution<double> ux(-0.3, 0.0), uy(0.06, 0.3), ut(-0.4, 0.4);
    int found = 0;
    for (int i = 0; i < 30; ++i) {
      const auto p = sample_placement_config(Pose2(ux(r2), uy(r2), ut(r2)), w, G, released, r2);
      if (!p) continue;
      ++found;
      const auto poly = w.object_vertices(*p);
      double lowest = 1e9;
      for (const auto& v : poly) lowest = std::min(lowest, std::abs(w.surfaces[0].height(v)));
      CHECK(lowest <= 1e-9);
      CHECK(placement_in_equilibrium(*p, w, G, released));
    }
    CHECK(found > 10);
  }
  SUBCASE("no support under the object") {
    WorldDescription bare = w;
    bare.surfaces.clear();
    CHECK_FALSE(sample_placement_config(Pose2(-0.15, 0.2, 0), bare, G, released, rng).has_value());
  }
}
