#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

namespace chainplan {

using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Planar rigid transform. theta is kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  Eigen::Vector2d translation() const { return {x, y}; }
  Eigen::Matrix2d rotation() const;
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const { return rotation() * p + translation(); }

  bool operator==(const Pose2&) const = default;
};

/// Spatial rigid transform with a unit quaternion rotation.
struct Pose3 {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();

  Pose3() = default;
  Pose3(const Eigen::Vector3d& t_, const Eigen::Quaterniond& q_) : t(t_), q(q_.normalized()) {}

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return q * p + t; }
};

using Pose = std::variant<Pose2, Pose3>;

Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 invert(const Pose2& a);
Pose3 compose(const Pose3& a, const Pose3& b);
Pose3 invert(const Pose3& a);
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& a);

/// Shortest angular distance on SO(2), in [0, pi].
double geodesic(const Pose2& a, const Pose2& b);
/// Rotation angle of a^-1 b on SO(3), in [0, pi].
double geodesic(const Pose3& a, const Pose3& b);

/// Translation distance plus w_rot times the rotation geodesic.
double pose_distance(const Pose2& a, const Pose2& b, double w_rot);
double pose_distance(const Pose3& a, const Pose3& b, double w_rot);
double pose_distance(const Pose& a, const Pose& b, double w_rot);

struct PlanarBounds {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double theta_min = -3.141592653589793, theta_max = 3.141592653589793;
};

struct SpatialBounds {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
};

/// Translation uniform in the box, angle uniform on (-pi, pi].
Pose2 sample_object_pose(const PlanarBounds& bounds, Rng& rng);
/// Translation uniform in the box, rotation uniform on SO(3) (Shoemake).
Pose3 sample_object_pose(const SpatialBounds& bounds, Rng& rng);

enum class PathKind { LinearGeodesic };

/// Straight-line translation with shortest-geodesic rotation, parameterized on [0, 1].
///
/// `lipschitz` bounds the metric distance between eval(s) and eval(s + h) by
/// lipschitz * h; for this family it is the metric length of the path.
template <class P>
struct PosePath {
  PathKind kind = PathKind::LinearGeodesic;
  P start;
  P end;
  double w_rot = 0.3;
  double lipschitz = 0.0;

  P eval(double s) const;
  double length() const { return lipschitz; }
};

template <>
Pose2 PosePath<Pose2>::eval(double s) const;
template <>
Pose3 PosePath<Pose3>::eval(double s) const;

using PosePath2 = PosePath<Pose2>;
using PosePath3 = PosePath<Pose3>;

PosePath2 interpolate_pose_path(const Pose2& a, const Pose2& b, double w_rot = 0.3);
/// Antipodal rotations take the geodesic through the relative quaternion with
/// nonnegative scalar part.
PosePath3 interpolate_pose_path(const Pose3& a, const Pose3& b, double w_rot = 0.3);

/// Samples from start to end inclusive with consecutive metric gaps <= step.
/// First and last samples are bit-equal to the path endpoints.
std::vector<Pose2> discretize_path(const PosePath2& path, double step, double w_rot);
std::vector<Pose3> discretize_path(const PosePath3& path, double step, double w_rot);

}  // namespace chainplan
