#pragma once

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labelloc/geometry.hpp"
#include "labelloc/grid.hpp"
#include "labelloc/maps.hpp"

namespace labelloc {

using LabelSet = std::set<std::string>;

struct CameraConfig {
  Pose2D mount_offset;                        // relative to the robot base
  double horizontal_fov = 87.0 * kPi / 180.0;  // radians, (0, 2pi]
  double max_range = 10.0;                    // meters
  int ray_count = 10;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
  /// Ray angles relative to the optical axis, spread evenly over the field
  /// of view with both edges included (a single ray points along the axis).
  std::vector<double> ray_offsets() const;
};

struct CameraRig {
  std::vector<CameraConfig> cameras;

  void validate() const;
  std::size_t size() const { return cameras.size(); }
};

/// Three cameras at yaw 0, +120 and -120 degrees, 87 degree field of view,
/// 10 rays each, 10 m range.
CameraRig default_rig();
CameraRig rig_from_json(const nlohmann::json& doc);
nlohmann::json rig_to_json(const CameraRig& rig);

enum class OcclusionMode { kNone, kGridOccluded };

OcclusionMode parse_occlusion_mode(const std::string& s);
std::string to_string(OcclusionMode m);

struct VisibilityResult {
  std::vector<LabelSet> per_camera;
};

Pose2D camera_world_pose(const Pose2D& robot_pose, const CameraConfig& cam);

/// Labels each camera should see from `pose`. Grid-occluded mode truncates
/// every ray at its occupancy hit (plus one cell of tolerance) and requires
/// `grid`.
VisibilityResult simulate_visible(const Pose2D& pose, const CameraRig& rig,
                                  const LabeledFootprintMap& map,
                                  OcclusionMode occlusion = OcclusionMode::kNone,
                                  const OccupancyGridMap* grid = nullptr);

/// Precomputed ray fan for repeated queries against one map and rig.
/// Holds references; the map, rig and grid must outlive it.
class VisibilitySimulator {
 public:
  VisibilitySimulator(const CameraRig& rig, const LabeledFootprintMap& map,
                      OcclusionMode occlusion = OcclusionMode::kNone,
                      const OccupancyGridMap* grid = nullptr);

  /// Per camera, a 0/1 flag per label id of the map.
  void visible_label_ids(const Pose2D& pose,
                         std::vector<std::vector<char>>& out) const;
  VisibilityResult simulate(const Pose2D& pose) const;

  /// Sum over cameras of the number of label ids in observed[i] that camera
  /// i should see. Equals consistency_score(obs, simulate(pose)) when
  /// observed holds the deduplicated on-map labels of obs. Only the observed
  /// labels are ray-tested.
  int count_matches(const Pose2D& pose,
                    const std::vector<std::vector<int>>& observed) const;

  std::size_t camera_count() const { return rig_.size(); }

 private:
  struct Fan {
    std::vector<Vec2> offsets;  // unit vectors relative to the optical axis
  };
  double ray_limit(Vec2 origin, Vec2 dir, double max_range) const;

  const CameraRig& rig_;
  const LabeledFootprintMap& map_;
  OcclusionMode occlusion_;
  const OccupancyGridMap* grid_;
  std::vector<Fan> fans_;
};

}  // namespace labelloc
