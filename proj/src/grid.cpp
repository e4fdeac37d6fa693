#include "labelloc/grid.hpp"

#include "labelloc/errors.hpp"

namespace labelloc {

OccupancyGridMap::OccupancyGridMap(int width, int height, double resolution,
                                   Pose2D origin, CellState fill)
    : width_(width),
      height_(height),
      resolution_(resolution),
      origin_(origin),
      cos_(std::cos(origin.theta)),
      sin_(std::sin(origin.theta)) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("OccupancyGridMap: width and height must be positive");
  }
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvalidArgument("OccupancyGridMap: resolution must be positive");
  }
  cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

Vec2 OccupancyGridMap::world_to_grid(Vec2 p) const {
  const double dx = p.x - origin_.x, dy = p.y - origin_.y;
  const double inv = 1.0 / resolution_;
  return {(cos_ * dx + sin_ * dy) * inv, (-sin_ * dx + cos_ * dy) * inv};
}

Vec2 OccupancyGridMap::grid_to_world(Vec2 g) const {
  const double gx = g.x * resolution_, gy = g.y * resolution_;
  return {origin_.x + cos_ * gx - sin_ * gy, origin_.y + sin_ * gx + cos_ * gy};
}

std::optional<GridIndex> OccupancyGridMap::cell_of(Vec2 p) const {
  const Vec2 g = world_to_grid(p);
  if (!(g.x >= 0.0) || !(g.y >= 0.0)) return std::nullopt;
  const GridIndex idx{static_cast<int>(g.y), static_cast<int>(g.x)};
  if (!in_bounds(idx)) return std::nullopt;
  return idx;
}

Vec2 OccupancyGridMap::cell_center(GridIndex idx) const {
  return grid_to_world({idx.col + 0.5, idx.row + 0.5});
}

bool OccupancyGridMap::is_free(Vec2 p) const {
  const auto idx = cell_of(p);
  return idx && at(*idx) == CellState::kFree;
}

double cast_ray_occupancy(const Ray& ray, const OccupancyGridMap& grid) {
  const auto start = grid.cell_of(ray.origin());
  if (!start) {
    throw OutOfBounds("cast_ray_occupancy: ray origin outside the grid");
  }
  if (grid.occupied(*start)) return 0.0;
  const double step = 0.5 * grid.resolution();
  const auto steps = static_cast<long>(ray.max_range() / step);
  for (long k = 1; k <= steps; ++k) {
    const auto idx = grid.cell_of(ray.at(k * step));
    if (!idx) break;
    if (grid.occupied(*idx)) {
      return std::min(norm(grid.cell_center(*idx) - ray.origin()), ray.max_range());
    }
  }
  return ray.max_range();
}

}  // namespace labelloc
