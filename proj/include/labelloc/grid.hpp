#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "labelloc/geometry.hpp"

namespace labelloc {

enum class CellState : std::uint8_t { kFree = 0, kOccupied = 1, kUnknown = 2 };

struct GridIndex {
  int row = 0;  // y
  int col = 0;  // x
  bool operator==(const GridIndex&) const = default;
};

/// Row-major occupancy grid. Row 0 is the bottom row (smallest y); cell
/// (0, 0)'s lower-left corner sits at `origin`.
class OccupancyGridMap {
 public:
  OccupancyGridMap(int width, int height, double resolution, Pose2D origin,
                   CellState fill = CellState::kFree);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Pose2D& origin() const { return origin_; }
  std::size_t cell_count() const { return cells_.size(); }

  bool in_bounds(GridIndex idx) const {
    return idx.row >= 0 && idx.col >= 0 && idx.row < height_ && idx.col < width_;
  }
  CellState at(GridIndex idx) const { return cells_[offset(idx)]; }
  void set(GridIndex idx, CellState s) { cells_[offset(idx)] = s; }
  bool occupied(GridIndex idx) const { return at(idx) == CellState::kOccupied; }
  std::size_t offset(GridIndex idx) const {
    return static_cast<std::size_t>(idx.row) * width_ + idx.col;
  }
  const std::vector<CellState>& cells() const { return cells_; }

  /// World point to continuous grid coordinates in cells (col, row) where
  /// integer values are cell corners.
  Vec2 world_to_grid(Vec2 p) const;
  Vec2 grid_to_world(Vec2 g) const;
  /// Cell containing p, or nullopt outside the grid.
  std::optional<GridIndex> cell_of(Vec2 p) const;
  Vec2 cell_center(GridIndex idx) const;
  /// Cell containing p is free.
  bool is_free(Vec2 p) const;

 private:
  int width_;
  int height_;
  double resolution_;
  Pose2D origin_;
  double cos_, sin_;
  std::vector<CellState> cells_;
};

/// Distance in meters from ray origin to the center of the first occupied
/// cell crossed, sampling every resolution/2; max_range when nothing is hit
/// or the ray leaves the grid. Returns 0 if the origin cell is occupied.
/// Throws OutOfBounds if the origin is outside the grid.
double cast_ray_occupancy(const Ray& ray, const OccupancyGridMap& grid);

}  // namespace labelloc
