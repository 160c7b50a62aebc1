#include "chainplan/pose.hpp"

#include <algorithm>
#include <cmath>

namespace chainplan {

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Eigen::Matrix2d Pose2::rotation() const {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return Pose2(a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.theta + b.theta);
}

Pose2 invert(const Pose2& a) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return Pose2(-c * a.x - s * a.y, s * a.x - c * a.y, -a.theta);
}

Pose3 compose(const Pose3& a, const Pose3& b) { return Pose3(a.q * b.t + a.t, a.q * b.q); }

Pose3 invert(const Pose3& a) {
  const Eigen::Quaterniond qi = a.q.conjugate();
  return Pose3(-(qi * a.t), qi);
}

namespace {

template <class F>
Pose dispatch2(const Pose& a, const Pose& b, F&& f) {
  if (a.index() != b.index()) throw std::invalid_argument("pose kinds differ (planar vs spatial)");
  if (const auto* pa = std::get_if<Pose2>(&a)) return f(*pa, std::get<Pose2>(b));
  return f(std::get<Pose3>(a), std::get<Pose3>(b));
}

// Relative rotation a^-1 b with nonnegative scalar part.
Eigen::Quaterniond relative_rotation(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  Eigen::Quaterniond d = (a.conjugate() * b).normalized();
  if (d.w() < 0.0) d.coeffs() = -d.coeffs();
  return d;
}

}  // namespace

Pose compose(const Pose& a, const Pose& b) {
  return dispatch2(a, b, [](const auto& x, const auto& y) -> Pose { return compose(x, y); });
}

Pose invert(const Pose& a) {
  return std::visit([](const auto& p) -> Pose { return invert(p); }, a);
}

double geodesic(const Pose2& a, const Pose2& b) { return std::abs(normalize_angle(b.theta - a.theta)); }

double geodesic(const Pose3& a, const Pose3& b) {
  const Eigen::Quaterniond d = relative_rotation(a.q, b.q);
  return 2.0 * std::atan2(d.vec().norm(), d.w());
}

double pose_distance(const Pose2& a, const Pose2& b, double w_rot) {
  return std::hypot(b.x - a.x, b.y - a.y) + w_rot * geodesic(a, b);
}

double pose_distance(const Pose3& a, const Pose3& b, double w_rot) {
  return (b.t - a.t).norm() + w_rot * geodesic(a, b);
}

double pose_distance(const Pose& a, const Pose& b, double w_rot) {
  if (a.index() != b.index()) throw std::invalid_argument("pose kinds differ (planar vs spatial)");
  if (const auto* pa = std::get_if<Pose2>(&a)) return pose_distance(*pa, std::get<Pose2>(b), w_rot);
  return pose_distance(std::get<Pose3>(a), std::get<Pose3>(b), w_rot);
}

Pose2 sample_object_pose(const PlanarBounds& bounds, Rng& rng) {
  if (bounds.x_min > bounds.x_max || bounds.y_min > bounds.y_max || bounds.theta_min > bounds.theta_max)
    throw std::invalid_argument("sampling bounds have min > max");
  std::uniform_real_distribution<double> ux(bounds.x_min, bounds.x_max);
  std::uniform_real_distribution<double> uy(bounds.y_min, bounds.y_max);
  std::uniform_real_distribution<double> ua(bounds.theta_min, bounds.theta_max);
  const double x = ux(rng);
  const double y = uy(rng);
  const double a = ua(rng);
  return Pose2(x, y, a);
}

Pose3 sample_object_pose(const SpatialBounds& bounds, Rng& rng) {
  if ((bounds.min.array() > bounds.max.array()).any())
    throw std::invalid_argument("sampling bounds have min > max");
  Eigen::Vector3d t;
  for (int i = 0; i < 3; ++i) {
    std::uniform_real_distribution<double> u(bounds.min[i], bounds.max[i]);
    t[i] = u(rng);
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u1 = u01(rng), u2 = u01(rng), u3 = u01(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(2.0 * kPi * u3), a * std::sin(2.0 * kPi * u2),
                             a * std::cos(2.0 * kPi * u2), b * std::sin(2.0 * kPi * u3));
  return Pose3(t, q);
}

template <>
Pose2 PosePath<Pose2>::eval(double s) const {
  if (s <= 0.0) return start;
  if (s >= 1.0) return end;
  const double dth = normalize_angle(end.theta - start.theta);
  return Pose2(start.x + s * (end.x - start.x), start.y + s * (end.y - start.y), start.theta + s * dth);
}

template <>
Pose3 PosePath<Pose3>::eval(double s) const {
  if (s <= 0.0) return start;
  if (s >= 1.0) return end;
  const Eigen::Quaterniond d = relative_rotation(start.q, end.q);
  const double angle = 2.0 * std::atan2(d.vec().norm(), d.w());
  Eigen::Quaterniond step = Eigen::Quaterniond::Identity();
  if (angle > 0.0) step = Eigen::Quaterniond(Eigen::AngleAxisd(s * angle, d.vec().normalized()));
  return Pose3(start.t + s * (end.t - start.t), start.q * step);
}

PosePath2 interpolate_pose_path(const Pose2& a, const Pose2& b, double w_rot) {
  return PosePath2{PathKind::LinearGeodesic, a, b, w_rot, pose_distance(a, b, w_rot)};
}

PosePath3 interpolate_pose_path(const Pose3& a, const Pose3& b, double w_rot) {
  return PosePath3{PathKind::LinearGeodesic, a, b, w_rot, pose_distance(a, b, w_rot)};
}

namespace {

template <class P>
std::vector<P> discretize_impl(const PosePath<P>& path, double step, double w_rot) {
  if (!(step > 0.0)) throw std::invalid_argument("discretization step must be positive");
  const double len = pose_distance(path.start, path.end, w_rot);
  const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(len / step)));
  std::vector<P> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  out.push_back(path.start);
  for (std::int64_t i = 1; i < n; ++i) out.push_back(path.eval(static_cast<double>(i) / static_cast<double>(n)));
  out.push_back(path.end);
  return out;
}

}  // namespace

std::vector<Pose2> discretize_path(const PosePath2& path, double step, double w_rot) {
  return discretize_impl(path, step, w_rot);
}

std::vector<Pose3> discretize_path(const PosePath3& path, double step, double w_rot) {
  return discretize_impl(path, step, w_rot);
}

}  // namespace chainplan
