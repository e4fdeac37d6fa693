#include "labelloc/geometry.hpp"

#include <algorithm>
#include <limits>

#include "labelloc/errors.hpp"

namespace labelloc {

double wrap_angle(double phi) {
  if (!std::isfinite(phi)) {
    throw InvalidArgument("wrap_angle: non-finite angle");
  }
  double wrapped = std::atan2(std::sin(phi), std::cos(phi));
  if (wrapped >= kPi) wrapped = -kPi;
  return wrapped;
}

Pose2D::Pose2D(double x_, double y_, double theta_)
    : x(x_), y(y_), theta(wrap_angle(theta_)) {
  if (!std::isfinite(x_) || !std::isfinite(y_)) {
    throw InvalidArgument("Pose2D: non-finite position");
  }
}

Pose2D compose(const Pose2D& a, const Pose2D& b) {
  const Vec2 p = transform_point(a, {b.x, b.y});
  return {p.x, p.y, a.theta + b.theta};
}

Vec2 transform_point(const Pose2D& frame, Vec2 local) {
  return rotate(local, frame.theta) + frame.position();
}

Ray::Ray(Vec2 origin, Vec2 direction, double max_range)
    : origin_(origin), max_range_(max_range) {
  const double n = norm(direction);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidArgument("Ray: direction must be non-zero and finite");
  }
  if (!(max_range > 0.0)) {
    throw InvalidArgument("Ray: max_range must be positive");
  }
  direction_ = direction * (1.0 / n);
}

Ray Ray::from_heading(Vec2 origin, double heading, double max_range) {
  return Ray(origin, {std::cos(heading), std::sin(heading)}, max_range);
}

namespace {

double signed_area(std::span<const Vec2> v) {
  double acc = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    acc += cross(v[i], v[(i + 1) % n]);
  }
  return 0.5 * acc;
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({norm(b - a), norm(c - a), 1.0});
  if (std::abs(v) <= 1e-12 * scale * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

// Hit parameter of the ray p + t*d (d unit) against segment [a, b].
std::optional<double> edge_hit(Vec2 p, Vec2 d, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const Vec2 w = a - p;
  const double denom = cross(d, e);
  const double elen = norm(e);
  constexpr double kEps = 1e-12;
  if (std::abs(denom) <= kEps * elen) {
    if (std::abs(cross(w, d)) > kEps * std::max(1.0, norm(w))) {
      return std::nullopt;  // parallel, disjoint
    }
    const double ta = dot(a - p, d);
    const double tb = dot(b - p, d);
    if (std::max(ta, tb) < 0.0) return std::nullopt;
    return std::max(0.0, std::min(ta, tb));
  }
  const double t = cross(w, e) / denom;
  const double s = cross(w, d) / denom;
  if (t < 0.0 || s < -kEps || s > 1.0 + kEps) return std::nullopt;
  return t;
}

}  // namespace

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) {
    throw ValidationError("polygon needs at least 3 vertices, got " +
                          std::to_string(n));
  }
  for (const Vec2& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw ValidationError("polygon has a non-finite vertex");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (vertices_[i] == vertices_[(i + 1) % n]) {
      throw ValidationError("polygon has a repeated consecutive vertex");
    }
  }
  if (std::abs(signed_area(vertices_)) <= 1e-12) {
    throw ValidationError("polygon has zero area");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a0 = vertices_[i], a1 = vertices_[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 b0 = vertices_[j], b1 = vertices_[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common vertex.
        const Vec2 shared = (j == i + 1) ? a1 : a0;
        const Vec2 other_a = (j == i + 1) ? a0 : a1;
        const Vec2 other_b = (j == i + 1) ? b1 : b0;
        if (orientation(shared, other_a, other_b) == 0 &&
            dot(other_a - shared, other_b - shared) > 0.0) {
          throw ValidationError("polygon folds back on itself");
        }
        continue;
      }
      if (segments_intersect(a0, a1, b0, b1)) {
        throw ValidationError("polygon is self-intersecting");
      }
    }
  }

  min_ = max_ = vertices_.front();
  Vec2 mean;
  for (const Vec2& v : vertices_) {
    min_ = {std::min(min_.x, v.x), std::min(min_.y, v.y)};
    max_ = {std::max(max_.x, v.x), std::max(max_.y, v.y)};
    mean = mean + v;
  }
  bound_center_ = mean * (1.0 / static_cast<double>(n));
  for (const Vec2& v : vertices_) {
    bound_radius_ = std::max(bound_radius_, norm(v - bound_center_));
  }
}

double Polygon::area() const { return std::abs(signed_area(vertices_)); }

Vec2 Polygon::centroid() const {
  const double a = signed_area(vertices_);
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
    const Vec2 p = vertices_[i], q = vertices_[(i + 1) % n];
    const double c = cross(p, q);
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

bool Polygon::contains(Vec2 p) const {
  bool inside = false;
  for (std::size_t i = 0, n = vertices_.size(), j = n - 1; i < n; j = i++) {
    const Vec2 a = vertices_[i], b = vertices_[j];
    if (orientation(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

Polygon make_rectangle(Vec2 center, double width, double height, double yaw) {
  const double hw = 0.5 * width, hh = 0.5 * height;
  std::vector<Vec2> v;
  for (Vec2 corner : {Vec2{-hw, -hh}, Vec2{hw, -hh}, Vec2{hw, hh}, Vec2{-hw, hh}}) {
    v.push_back(center + rotate(corner, yaw));
  }
  return Polygon(std::move(v));
}

std::optional<double> ray_polygon_hit(const Ray& ray, const Polygon& poly) {
  const Vec2 p = ray.origin();
  if (poly.contains(p)) return 0.0;
  std::optional<double> best;
  const auto v = poly.vertices();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const auto t = edge_hit(p, ray.direction(), v[i], v[(i + 1) % n]);
    if (t && *t <= ray.max_range() && (!best || *t < *best)) best = t;
  }
  return best;
}

bool ray_hits_polygon(Vec2 origin, Vec2 dir, double max_range,
                      const Polygon& poly) {
  // Cheap reject against the bounding circle.
  const Vec2 to_c = poly.bound_center() - origin;
  const double r = poly.bound_radius();
  const double along = dot(to_c, dir);
  const double dist2 = dot(to_c, to_c);
  if (dist2 > r * r) {
    if (along < 0.0 || along - r > max_range) return false;
    const double perp = cross(dir, to_c);
    if (perp * perp > r * r) return false;
  }
  const auto v = poly.vertices();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const auto t = edge_hit(origin, dir, v[i], v[(i + 1) % n]);
    if (t && *t <= max_range) return true;
  }
  return poly.contains(origin);
}

}  // namespace labelloc
