#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "labelloc/detection.hpp"
#include "labelloc/likelihood.hpp"
#include "labelloc/maps.hpp"

namespace labelloc {

/// Uniform/Diverse Geometry crossed with Uniform/Diverse Appearance.
enum class Archetype { kUgUa, kUgDa, kDgUa, kDgDa };
Archetype parse_archetype(const std::string& s);  // "UG/UA", "ug-ua", "ugua" ...
std::string to_string(Archetype a);
bool uniform_geometry(Archetype a);
bool uniform_appearance(Archetype a);

struct ArchetypeSpec {
  Archetype kind = Archetype::kDgDa;
  double world_width = 20.0;   // meters
  double world_height = 20.0;  // meters
  double resolution = 0.05;
  double wall_thickness = 0.1;
  int object_count = 24;
  int label_vocabulary_size = 24;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when inconsistent with the archetype.
  void validate() const;
};

/// Defaults per archetype: UG/UA 4x4 columns labeled "column"; UG/DA 12
/// shelves labeled A..L; DG/UA 24 scattered objects over a 3-word
/// vocabulary; DG/DA 24 scattered objects with unique labels.
ArchetypeSpec default_archetype_spec(Archetype kind, std::uint64_t seed = 0);

struct World {
  LabeledFootprintMap footprints;
  OccupancyGridMap grid;
};

/// Builds both maps in one frame; footprints are rasterized as occupied
/// (every cell the polygon overlaps) inside a walled rectangle.
World generate_world(const ArchetypeSpec& spec);

/// Marks every cell whose square overlaps the polygon.
void rasterize_polygon(const Polygon& poly, OccupancyGridMap& grid);

/// Raw beam array as stored in datasets; beams without a return are empty.
struct LaserScan {
  double angle_min = -kPi;
  double angle_increment = 0.0;
  double range_max = 12.0;
  std::vector<std::optional<double>> ranges;

  ScanObservation to_observation() const;
  bool operator==(const LaserScan&) const = default;
};

struct ScanConfig {
  int beam_count = 360;
  double fov = kTwoPi;
  double max_range = 12.0;
  double range_noise_sigma = 0.01;
};

LaserScan simulate_laser(const Pose2D& pose, const OccupancyGridMap& grid,
                         const ScanConfig& cfg, std::uint64_t seed);
/// Throws InvalidPose unless the pose lies in a free cell.
ScanObservation simulate_scan(const Pose2D& pose, const OccupancyGridMap& grid,
                              const ScanConfig& cfg, std::uint64_t seed);

struct DatasetRecord {
  double t = 0.0;
  Pose2D pose_gt;
  std::optional<LaserScan> scan;
  std::optional<LabelObservation> labels;
  std::vector<std::string> images;  // camera image paths for real data
};

struct TrajectorySpec {
  std::vector<Vec2> waypoints;
  double spacing = 1.0;    // meters between records
  double interval = 1.5;   // seconds between records
};

/// Poses every `spacing` meters along the waypoint polyline, heading along
/// the current segment. Throws InvalidTrajectory if any pose is not free.
std::vector<Pose2D> interpolate_trajectory(const TrajectorySpec& spec,
                                           const OccupancyGridMap& grid);

struct DatasetOptions {
  ScanConfig scan;
  NoiseModel noise;
  OcclusionMode occlusion = OcclusionMode::kNone;
  double interval = 1.5;
};

std::vector<DatasetRecord> generate_dataset(const World& world, const TrajectorySpec& trajectory,
                                            const CameraRig& rig, const DatasetOptions& opts,
                                            std::uint64_t seed);
/// Same, at explicit poses. Record k draws its scan from derive_seed(seed,
/// 2k) and its detection noise from derive_seed(seed, 2k + 1).
std::vector<DatasetRecord> generate_dataset_at_poses(const World& world,
                                                     const std::vector<Pose2D>& poses,
                                                     const CameraRig& rig,
                                                     const DatasetOptions& opts,
                                                     std::uint64_t seed);

/// Uniform free poses at least `clearance` meters from any obstacle.
std::vector<Pose2D> random_free_poses(const OccupancyGridMap& grid, std::size_t count,
                                      double clearance, std::uint64_t seed);

}  // namespace labelloc
