#include "r2f/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace r2f
{

double wrap_degrees(double deg)
{
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) {
    w += 360.0;
  } else if (w > 180.0) {
    w -= 360.0;
  }
  return w;
}

std::optional<double> ray_aabb(const Vec3 & origin, const Vec3 & inv_dir, const Aabb & box)
{
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double inv = inv_dir[axis];
    if (std::isinf(inv)) {
      // Parallel to this slab: inside or never.
      if (origin[axis] < box.min[axis] || origin[axis] > box.max[axis]) {
        return std::nullopt;
      }
      continue;
    }
    double t0 = (box.min[axis] - origin[axis]) * inv;
    double t1 = (box.max[axis] - origin[axis]) * inv;
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) {
      return std::nullopt;
    }
  }
  if (t_far < 0.0) {
    return std::nullopt;
  }
  return std::max(t_near, 0.0);
}

double point_rect_distance(const Vec2 & p, const Rect2 & r)
{
  const double dx = std::max({r.min.x() - p.x(), 0.0, p.x() - r.max.x()});
  const double dy = std::max({r.min.y() - p.y(), 0.0, p.y() - r.max.y()});
  return std::hypot(dx, dy);
}

double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) {
    return (p - a).norm();
  }
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

namespace
{

bool segments_intersect(const Vec2 & p1, const Vec2 & p2, const Vec2 & q1, const Vec2 & q2)
{
  auto cross = [](const Vec2 & o, const Vec2 & a, const Vec2 & b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

double segment_rect_distance(const Vec2 & a, const Vec2 & b, const Rect2 & r)
{
  if (r.contains(a) || r.contains(b)) {
    return 0.0;
  }
  const Vec2 corners[4] = {r.min, {r.max.x(), r.min.y()}, r.max, {r.min.x(), r.max.y()}};
  for (int i = 0; i < 4; ++i) {
    if (segments_intersect(a, b, corners[i], corners[(i + 1) % 4])) {
      return 0.0;
    }
  }
  double d = std::min(point_rect_distance(a, r), point_rect_distance(b, r));
  for (const auto & c : corners) {
    d = std::min(d, point_segment_distance(c, a, b));
  }
  return d;
}

}  // namespace r2f
