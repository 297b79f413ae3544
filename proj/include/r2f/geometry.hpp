#ifndef R2F_GEOMETRY_HPP
#define R2F_GEOMETRY_HPP

#include <optional>

#include "r2f/common.hpp"

namespace r2f
{

struct Aabb
{
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Aabb() = default;
  Aabb(const Vec3 & lo, const Vec3 & hi) : min(lo), max(hi) {}

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 size() const { return max - min; }
  double volume() const { return size().prod(); }
  bool valid() const { return (max.array() >= min.array()).all(); }

  bool contains(const Vec3 & p) const
  {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool strictly_contains(const Vec3 & p) const
  {
    return (p.array() > min.array()).all() && (p.array() < max.array()).all();
  }
  bool contains(const Aabb & other) const { return contains(other.min) && contains(other.max); }
  bool intersects(const Aabb & other) const
  {
    return (min.array() <= other.max.array()).all() && (other.min.array() <= max.array()).all();
  }
};

/// Axis-aligned rectangle in the ground plane.
struct Rect2
{
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  static Rect2 footprint(const Aabb & box) { return {box.min.head<2>(), box.max.head<2>()}; }
  bool contains(const Vec2 & p) const
  {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Slab test. `inv_dir` is the component-wise reciprocal of the ray direction
/// (infinities allowed). Returns the entry parameter t >= 0 of the first
/// intersection, or nullopt if the ray misses or the box lies behind it.
/// A ray starting inside the box reports t = 0.
std::optional<double> ray_aabb(const Vec3 & origin, const Vec3 & inv_dir, const Aabb & box);

/// Euclidean distance from a point to a rectangle (0 inside).
double point_rect_distance(const Vec2 & p, const Rect2 & r);

/// Minimum distance between segment [a, b] and a rectangle (0 if they touch).
double segment_rect_distance(const Vec2 & a, const Vec2 & b, const Rect2 & r);

/// Distance from point p to segment [a, b].
double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b);

}  // namespace r2f

#endif  // R2F_GEOMETRY_HPP
