#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace chainplan::geom {

using Vec2 = Eigen::Vector2d;

struct Segment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
};

double cross(const Vec2& u, const Vec2& v);

double point_segment_distance(const Vec2& p, const Segment& s);
bool segments_intersect(const Segment& s, const Segment& t);
double segment_distance(const Segment& s, const Segment& t);

/// Polygon vertices are counterclockwise and convex.
bool point_in_convex_polygon(const Vec2& p, std::span<const Vec2> poly);
/// Zero when the segment touches or enters the polygon.
double polygon_segment_distance(std::span<const Vec2> poly, const Segment& s);

bool is_convex_ccw(std::span<const Vec2> poly);
double polygon_area(std::span<const Vec2> poly);

}  // namespace chainplan::geom
