#include "doctest.h"

#include "chainplan/pose.hpp"
#include "oracles.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>

using namespace chainplan;

TEST_CASE("compose and invert") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Pose2 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    const Pose2 id = compose(a, invert(a));
    CHECK(std::abs(id.x) < 1e-9);
    CHECK(std::abs(id.y) < 1e-9);
    CHECK(std::abs(id.theta) < 1e-9);
    // Matrix product oracle.
    const Pose2 ab = compose(a, b);
    const Pose2 m = oracle::from_matrix(oracle::homogeneous(a.x, a.y, a.theta) * oracle::homogeneous(b.x, b.y, b.theta));
    CHECK(pose_distance(ab, m, 1.0) < 1e-12);
    CHECK(ab.theta > -kPi);
    CHECK(ab.theta <= kPi);
  }
  const Pose3 s(Eigen::Vector3d(1, 2, 3), Eigen::Quaterniond(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 1, 0).normalized())));
  const Pose3 id = compose(s, invert(s));
  CHECK(id.t.norm() < 1e-9);
  CHECK(std::abs(std::abs(id.q.w()) - 1.0) < 1e-9);
}

TEST_CASE("normalize_angle keeps (-pi, pi]") {
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
}

TEST_CASE("sample_object_pose") {
  SUBCASE("collapsed box returns the point") {
    PlanarBounds b{0.3, 0.3, -0.2, -0.2};
    Rng rng(11);
    for (int i = 0; i < 10; ++i) {
      const Pose2 p = sample_object_pose(b, rng);
      CHECK(p.x == 0.3);
      CHECK(p.y == -0.2);
    }
    SpatialBounds s{Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)};
    CHECK(sample_object_pose(s, rng).t == Eigen::Vector3d(1, 2, 3));
  }
  SUBCASE("same seed, same poses") {
    PlanarBounds b{-1, 1, -1, 1};
    Rng r1(5), r2(5);
    for (int i = 0; i < 20; ++i) CHECK(sample_object_pose(b, r1) == sample_object_pose(b, r2));
  }
  SUBCASE("angle histogram is uniform") {
    PlanarBounds b{0, 1, 0, 1};
    Rng rng(2024);
    constexpr int n = 10000, bins = 16;
    std::array<int, bins> h{};
    for (int i = 0; i < n; ++i) {
      const double th = sample_object_pose(b, rng).theta;
      const int k = std::min(bins - 1, static_cast<int>((th + kPi) / (2 * kPi) * bins));
      ++h[static_cast<std::size_t>(k)];
    }
    double chi2 = 0;
    for (int c : h) chi2 += (c - n / double(bins)) * (c - n / double(bins)) / (n / double(bins));
    CHECK(chi2 < 30.578);  // chi^2 critical value, 15 dof, alpha 0.01
  }
  SUBCASE("mean geodesic between samples is pi/2") {
    PlanarBounds b{0, 1, 0, 1};
    Rng rng(77);
    constexpr int n = 10000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double g = geodesic(sample_object_pose(b, rng), sample_object_pose(b, rng));
      sum += g;
      sq += g * g;
    }
    const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean - kPi / 2) < 3 * sd / std::sqrt(n));
  }
  SUBCASE("inverted bounds throw") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_object_pose(PlanarBounds{1, 0, 0, 1}, rng), std::invalid_argument);
  }
}

TEST_CASE("pose_distance") {
  CHECK(pose_distance(Pose2(), Pose2(), 0.3) == 0.0);
  CHECK(pose_distance(Pose2(0, 0, 0), Pose2(3, 4, 0), 0.7) == doctest::Approx(5.0));
  CHECK(pose_distance(Pose2(0, 0, 0), Pose2(0, 0, kPi), 1.0) == doctest::Approx(kPi));
  // Brute-force minimum over angle wrappings.
  auto brute = [](double a, double b) {
    double best = 1e9;
    for (int k = -3; k <= 3; ++k) best = std::min(best, std::abs(a - b + 2 * kPi * k));
    return best;
  };
  const double b = -kPi + 1e-9;
  CHECK(pose_distance(Pose2(0, 0, 0), Pose2(0, 0, b), 1.0) == doctest::Approx(brute(0, b)).epsilon(1e-12));
  CHECK(pose_distance(Pose2(0, 0, 0), Pose2(0, 0, b), 1.0) == doctest::Approx(kPi).epsilon(1e-8));

  SUBCASE("metric axioms") {
    Rng rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto draw = [&] { return Pose2(u(rng), u(rng), u(rng) * 2); };
    for (int i = 0; i < 1000; ++i) {
      const Pose2 a = draw(), c = draw(), d = draw();
      CHECK(pose_distance(a, c, 0.3) >= 0.0);
      CHECK(pose_distance(a, c, 0.3) == pose_distance(c, a, 0.3));
      CHECK(pose_distance(a, a, 0.3) == 0.0);
      CHECK(pose_distance(a, d, 0.3) <= pose_distance(a, c, 0.3) + pose_distance(c, d, 0.3) + 1e-9);
    }
    CHECK(pose_distance(Pose2(0, 0, 0), Pose2(0, 0, 1e-12), 0.3) > 0.0);
  }
}

TEST_CASE("interpolate_pose_path") {
  const Pose2 a(0, 0, 0), b(2, 0, kPi / 2);
  const auto p = interpolate_pose_path(a, b, 0.3);
  const Pose2 m = p.eval(0.5);
  CHECK(m.x == doctest::Approx(1.0));
  CHECK(m.y == doctest::Approx(0.0));
  CHECK(m.theta == doctest::Approx(kPi / 4));
  CHECK(p.eval(0.0) == a);
  CHECK(p.eval(1.0) == b);

  const auto c = interpolate_pose_path(a, a, 0.3);
  for (double s : {0.0, 0.3, 0.9}) CHECK(c.eval(s) == a);

  // Short arc across the wrap.
  const auto w = interpolate_pose_path(Pose2(0, 0, 3.0), Pose2(0, 0, -3.0), 0.3);
  CHECK(std::abs(w.eval(0.5).theta) == doctest::Approx(kPi));

  SUBCASE("Lipschitz bound on samples") {
    Rng rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
      const auto q = interpolate_pose_path(Pose2(u(rng), u(rng), u(rng)), Pose2(u(rng), u(rng), u(rng)), 0.3);
      const double h = 0.01;
      for (double s = 0; s + h <= 1.0; s += h) CHECK(pose_distance(q.eval(s), q.eval(s + h), 0.3) <= q.lipschitz * h + 1e-12);
    }
  }

  SUBCASE("spatial midpoint halves the rotation") {
    const Pose3 s0;
    const Pose3 s1(Eigen::Vector3d(2, 0, 0), Eigen::Quaterniond(Eigen::AngleAxisd(kPi / 2, Eigen::Vector3d::UnitZ())));
    const Pose3 mid = interpolate_pose_path(s0, s1, 0.3).eval(0.5);
    // Independent axis-angle halving.
    const Eigen::AngleAxisd half(Eigen::AngleAxisd(s1.q).angle() / 2, Eigen::AngleAxisd(s1.q).axis());
    CHECK(mid.q.angularDistance(Eigen::Quaterniond(half)) < 1e-12);
    CHECK((mid.t - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
  }
}

TEST_CASE("discretize_path") {
  const Pose2 a(0, 0, 0);
  const auto c = discretize_path(interpolate_pose_path(a, a, 0.3), 0.1, 0.3);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == a);
  CHECK(c[1] == a);

  const auto l = discretize_path(interpolate_pose_path(a, Pose2(1, 0, 0), 0.3), 0.25, 0.3);
  REQUIRE(l.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(l[static_cast<std::size_t>(i)].x == doctest::Approx(0.25 * i));

  const auto m = discretize_path(interpolate_pose_path(a, Pose2(0.6, 0.8, 0), 0.3), 0.3, 0.3);
  CHECK(m.size() == 5);
  for (std::size_t i = 1; i < m.size(); ++i) CHECK(pose_distance(m[i - 1], m[i], 0.3) <= 0.3 + 1e-12);

  Rng rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Pose2 s(u(rng), u(rng), u(rng)), e(u(rng), u(rng), u(rng));
    const auto d = discretize_path(interpolate_pose_path(s, e, 0.3), 0.05, 0.3);
    CHECK(d.front() == s);
    CHECK(d.back() == e);
  }
  CHECK_THROWS_AS(discretize_path(interpolate_pose_path(a, a, 0.3), 0.0, 0.3), std::invalid_argument);
}
