#include "labelloc/visibility.hpp"

#include <nlohmann/json.hpp>

#include "labelloc/errors.hpp"

namespace labelloc {

using nlohmann::json;

void CameraConfig::validate() const {
  if (ray_count < 1) throw InvalidArgument("camera: ray_count must be >= 1");
  if (!(horizontal_fov > 0.0) || horizontal_fov > kTwoPi + 1e-12) {
    throw InvalidArgument("camera: horizontal_fov must be in (0, 2pi]");
  }
  if (!(max_range > 0.0)) throw InvalidArgument("camera: max_range must be > 0");
}

std::vector<double> CameraConfig::ray_offsets() const {
  if (ray_count == 1) return {0.0};
  std::vector<double> out(ray_count);
  const double step = horizontal_fov / (ray_count - 1);
  for (int k = 0; k < ray_count; ++k) out[k] = -0.5 * horizontal_fov + k * step;
  return out;
}

void CameraRig::validate() const {
  if (cameras.empty()) throw InvalidArgument("camera rig needs at least one camera");
  for (const CameraConfig& c : cameras) c.validate();
}

CameraRig default_rig() {
  CameraRig rig;
  for (double yaw_deg : {0.0, 120.0, -120.0}) {
    CameraConfig cam;
    cam.mount_offset = Pose2D(0.0, 0.0, yaw_deg * kPi / 180.0);
    rig.cameras.push_back(cam);
  }
  return rig;
}

CameraRig rig_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array()) {
    throw ParseError("rig: expected an object with a `cameras` array");
  }
  CameraRig rig;
  for (const json& c : doc["cameras"]) {
    CameraConfig cam;
    try {
      if (c.contains("mount_offset")) {
        const auto o = c["mount_offset"].get<std::vector<double>>();
        if (o.size() != 3) throw ParseError("rig: mount_offset must be [x, y, theta]");
        cam.mount_offset = Pose2D(o[0], o[1], o[2]);
      }
      if (c.contains("horizontal_fov_deg")) {
        cam.horizontal_fov = c["horizontal_fov_deg"].get<double>() * kPi / 180.0;
      }
      if (c.contains("max_range_m")) cam.max_range = c["max_range_m"].get<double>();
      if (c.contains("ray_count")) cam.ray_count = c["ray_count"].get<int>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("rig: ") + e.what());
    }
    rig.cameras.push_back(cam);
  }
  rig.validate();
  return rig;
}

json rig_to_json(const CameraRig& rig) {
  json cams = json::array();
  for (const CameraConfig& c : rig.cameras) {
    cams.push_back({{"mount_offset", {c.mount_offset.x, c.mount_offset.y, c.mount_offset.theta}},
                    {"horizontal_fov_deg", c.horizontal_fov * 180.0 / kPi},
                    {"max_range_m", c.max_range},
                    {"ray_count", c.ray_count}});
  }
  return {{"cameras", std::move(cams)}};
}

OcclusionMode parse_occlusion_mode(const std::string& s) {
  if (s == "none") return OcclusionMode::kNone;
  if (s == "grid-occluded") return OcclusionMode::kGridOccluded;
  throw InvalidArgument("unknown occlusion mode '" + s + "'");
}

std::string to_string(OcclusionMode m) {
  return m == OcclusionMode::kNone ? "none" : "grid-occluded";
}

Pose2D camera_world_pose(const Pose2D& robot_pose, const CameraConfig& cam) {
  return compose(robot_pose, cam.mount_offset);
}

VisibilitySimulator::VisibilitySimulator(const CameraRig& rig, const LabeledFootprintMap& map,
                                         OcclusionMode occlusion,
                                         const OccupancyGridMap* grid)
    : rig_(rig), map_(map), occlusion_(occlusion), grid_(grid) {
  rig_.validate();
  if (occlusion_ == OcclusionMode::kGridOccluded && grid_ == nullptr) {
    throw InvalidArgument("grid-occluded visibility requires an occupancy grid");
  }
  for (const CameraConfig& cam : rig_.cameras) {
    Fan fan;
    for (double a : cam.ray_offsets()) fan.offsets.push_back({std::cos(a), std::sin(a)});
    fans_.push_back(std::move(fan));
  }
}

double VisibilitySimulator::ray_limit(Vec2 origin, Vec2 dir, double max_range) const {
  if (occlusion_ == OcclusionMode::kNone) return max_range;
  const double hit = cast_ray_occupancy(Ray(origin, dir, max_range), *grid_);
  // Footprints are rasterized into the grid, so the occupancy hit on a
  // landmark lands within a cell of its boundary.
  return std::min(max_range, hit + grid_->resolution());
}

void VisibilitySimulator::visible_label_ids(const Pose2D& pose,
                                            std::vector<std::vector<char>>& out) const {
  const auto& landmarks = map_.landmarks();
  out.resize(rig_.size());
  for (std::size_t i = 0; i < rig_.size(); ++i) {
    const CameraConfig& cam = rig_.cameras[i];
    const Pose2D cam_pose = camera_world_pose(pose, cam);
    const Vec2 axis{std::cos(cam_pose.theta), std::sin(cam_pose.theta)};
    out[i].assign(map_.label_set().size(), 0);
    for (const Vec2& off : fans_[i].offsets) {
      const Vec2 dir{axis.x * off.x - axis.y * off.y, axis.y * off.x + axis.x * off.y};
      const double range = ray_limit(cam_pose.position(), dir, cam.max_range);
      for (std::size_t l = 0; l < landmarks.size(); ++l) {
        const int id = map_.landmark_label_id(l);
        if (out[i][id]) continue;
        if (ray_hits_polygon(cam_pose.position(), dir, range, landmarks[l].footprint)) {
          out[i][id] = 1;
        }
      }
    }
  }
}

VisibilityResult VisibilitySimulator::simulate(const Pose2D& pose) const {
  std::vector<std::vector<char>> flags;
  visible_label_ids(pose, flags);
  VisibilityResult result;
  result.per_camera.resize(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    for (std::size_t id = 0; id < flags[i].size(); ++id) {
      if (flags[i][id]) result.per_camera[i].insert(map_.label_set()[id]);
    }
  }
  return result;
}

int VisibilitySimulator::count_matches(const Pose2D& pose,
                                       const std::vector<std::vector<int>>& observed) const {
  if (observed.size() != rig_.size()) {
    throw InvalidArgument("count_matches: observation has " + std::to_string(observed.size()) +
                          " cameras, rig has " + std::to_string(rig_.size()));
  }
  const auto& landmarks = map_.landmarks();
  const auto& by_label = map_.landmarks_by_label();
  thread_local std::vector<Vec2> dirs;
  thread_local std::vector<double> ranges;
  int score = 0;
  for (std::size_t i = 0; i < rig_.size(); ++i) {
    if (observed[i].empty()) continue;
    const CameraConfig& cam = rig_.cameras[i];
    const Pose2D cam_pose = camera_world_pose(pose, cam);
    const Vec2 origin = cam_pose.position();
    const Vec2 axis{std::cos(cam_pose.theta), std::sin(cam_pose.theta)};
    const auto& offsets = fans_[i].offsets;
    const std::size_t n = offsets.size();
    dirs.resize(n);
    ranges.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 off = offsets[k];
      dirs[k] = {axis.x * off.x - axis.y * off.y, axis.y * off.x + axis.x * off.y};
      ranges[k] = ray_limit(origin, dirs[k], cam.max_range);
    }
    for (int id : observed[i]) {
      bool seen = false;
      for (std::size_t l : by_label[id]) {
        const Polygon& poly = landmarks[l].footprint;
        for (std::size_t k = 0; k < n && !seen; ++k) {
          seen = ray_hits_polygon(origin, dirs[k], ranges[k], poly);
        }
        if (seen) break;
      }
      score += seen ? 1 : 0;
    }
  }
  return score;
}

VisibilityResult simulate_visible(const Pose2D& pose, const CameraRig& rig,
                                  const LabeledFootprintMap& map, OcclusionMode occlusion,
                                  const OccupancyGridMap* grid) {
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta)) {
    throw InvalidArgument("simulate_visible: non-finite pose");
  }
  return VisibilitySimulator(rig, map, occlusion, grid).simulate(pose);
}

}  // namespace labelloc
