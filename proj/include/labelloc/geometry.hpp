#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace labelloc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [-pi, pi) using atan2(sin, cos). +pi maps to -pi.
/// Throws InvalidArgument on non-finite input.
double wrap_angle(double phi);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// SE(2) pose. The constructor wraps theta; x and y must be finite.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_);

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2D&) const = default;
};

/// Rigid-body composition a ∘ b (b expressed in a's frame).
Pose2D compose(const Pose2D& a, const Pose2D& b);

/// Maps a point from the local frame of `frame` into the world frame.
Vec2 transform_point(const Pose2D& frame, Vec2 local);

class Ray {
 public:
  /// `direction` is normalized here; zero-length directions and
  /// non-positive ranges are rejected.
  Ray(Vec2 origin, Vec2 direction, double max_range);
  static Ray from_heading(Vec2 origin, double heading, double max_range);

  Vec2 origin() const { return origin_; }
  Vec2 direction() const { return direction_; }
  double max_range() const { return max_range_; }
  Vec2 at(double t) const { return origin_ + direction_ * t; }

 private:
  Vec2 origin_;
  Vec2 direction_;
  double max_range_;
};

/// Simple polygon with non-zero area, implicitly closed.
class Polygon {
 public:
  /// Throws ValidationError if fewer than 3 vertices, zero area, or
  /// self-intersecting.
  explicit Polygon(std::vector<Vec2> vertices);

  std::span<const Vec2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  double area() const;  // unsigned
  Vec2 centroid() const;
  /// Boundary points count as inside.
  bool contains(Vec2 p) const;

  /// Smallest enclosing circle around the vertex centroid (not minimal).
  Vec2 bound_center() const { return bound_center_; }
  double bound_radius() const { return bound_radius_; }
  Vec2 min_corner() const { return min_; }
  Vec2 max_corner() const { return max_; }

 private:
  std::vector<Vec2> vertices_;
  Vec2 bound_center_;
  double bound_radius_ = 0.0;
  Vec2 min_, max_;
};

Polygon make_rectangle(Vec2 center, double width, double height,
                       double yaw = 0.0);

/// Smallest t in [0, max_range] at which the ray touches the polygon
/// boundary; 0 if the origin is inside.
std::optional<double> ray_polygon_hit(const Ray& ray, const Polygon& poly);

/// Same predicate as ray_polygon_hit without building a Ray. `dir` must be
/// unit length. Used on hot paths.
bool ray_hits_polygon(Vec2 origin, Vec2 dir, double max_range,
                      const Polygon& poly);

/// Closed segment intersection.
bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

}  // namespace labelloc
