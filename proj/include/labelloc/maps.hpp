#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labelloc/geometry.hpp"
#include "labelloc/grid.hpp"

namespace labelloc {

struct Landmark {
  std::string label;
  Polygon footprint;
};

/// Text labels paired with 2D footprint regions. The same label may be
/// carried by several footprints; label ids index the sorted label set.
class LabeledFootprintMap {
 public:
  LabeledFootprintMap() = default;
  /// Labels are whitespace-trimmed; an empty label throws ValidationError.
  explicit LabeledFootprintMap(std::vector<Landmark> landmarks,
                               std::string frame = "map");

  const std::string& frame() const { return frame_; }
  const std::vector<Landmark>& landmarks() const { return landmarks_; }
  const std::vector<std::string>& label_set() const { return labels_; }
  std::optional<int> label_id(const std::string& label) const;
  int landmark_label_id(std::size_t landmark) const { return landmark_label_ids_[landmark]; }
  /// Landmark indices carrying each label id.
  const std::vector<std::vector<std::size_t>>& landmarks_by_label() const { return by_label_; }

  /// Copy with every landmark carrying `label` removed.
  LabeledFootprintMap without_label(const std::string& label) const;

 private:
  std::string frame_ = "map";
  std::vector<Landmark> landmarks_;
  std::vector<std::string> labels_;
  std::vector<int> landmark_label_ids_;
  std::vector<std::vector<std::size_t>> by_label_;
};

LabeledFootprintMap footprint_map_from_json(const nlohmann::json& doc);
nlohmann::json footprint_map_to_json(const LabeledFootprintMap& map);
LabeledFootprintMap load_footprint_map(const std::filesystem::path& path);
void save_footprint_map(const LabeledFootprintMap& map,
                        const std::filesystem::path& path);

/// Map-server style thresholds on occupancy probability
/// p = (255 - v) / 255 (or v / 255 when negated): p > occupied → occupied,
/// p < free → free, otherwise unknown.
struct OccupancyThresholds {
  double free_thresh = 5.5 / 255.0;
  double occupied_thresh = 204.5 / 255.0;

  /// Pixel v >= free_min → free; v <= occupied_max → occupied (not negated).
  static OccupancyThresholds from_pixels(int free_min, int occupied_max);
};

struct OccupancyMeta {
  std::string image;
  double resolution = 0.05;
  Pose2D origin;
  bool negate = false;
  OccupancyThresholds thresholds;
};

OccupancyMeta load_occupancy_meta(const std::filesystem::path& meta_path);
CellState classify_pixel(int value, int max_value, bool negate,
                         const OccupancyThresholds& t);

OccupancyGridMap load_occupancy_map(const std::filesystem::path& pgm_path,
                                    const std::filesystem::path& meta_path);
/// Loads using the `image` entry of the metadata, resolved relative to it.
OccupancyGridMap load_occupancy_map(const std::filesystem::path& meta_path);
OccupancyGridMap occupancy_from_pgm(const std::string& pgm_bytes,
                                    const OccupancyMeta& meta);

/// Writes free=254, occupied=0, unknown=205 with standard thresholds.
void save_occupancy_map(const OccupancyGridMap& grid,
                        const std::filesystem::path& pgm_path,
                        const std::filesystem::path& meta_path);

std::vector<GridIndex> free_cells(const OccupancyGridMap& grid);

/// Euclidean distance (meters) from every cell center to the nearest
/// occupied cell center. Unknown cells count as non-obstacles.
class DistanceField {
 public:
  DistanceField(const OccupancyGridMap& grid, std::vector<double> distances,
                bool no_obstacles);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double at(GridIndex idx) const {
    return dist_[static_cast<std::size_t>(idx.row) * width_ + idx.col];
  }
  /// True when the grid had no occupied cell; distances then hold the
  /// sentinel value (10 x map diagonal).
  bool no_obstacles() const { return no_obstacles_; }
  /// Bilinear interpolation over the four surrounding cell centers; nullopt
  /// outside the grid.
  std::optional<double> interpolate(Vec2 world) const;

 private:
  int width_, height_;
  double resolution_;
  Pose2D origin_;
  double cos_, sin_;
  std::vector<double> dist_;
  bool no_obstacles_;
};

DistanceField build_distance_field(const OccupancyGridMap& grid);

}  // namespace labelloc
