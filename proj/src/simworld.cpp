#include "labelloc/simworld.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "labelloc/errors.hpp"
#include "labelloc/random.hpp"

namespace labelloc {

Archetype parse_archetype(const std::string& s) {
  std::string key;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) key.push_back(static_cast<char>(std::toupper(c)));
  }
  if (key == "UGUA") return Archetype::kUgUa;
  if (key == "UGDA") return Archetype::kUgDa;
  if (key == "DGUA") return Archetype::kDgUa;
  if (key == "DGDA") return Archetype::kDgDa;
  throw InvalidArgument("unknown archetype '" + s + "' (expected UG/UA, UG/DA, DG/UA or DG/DA)");
}

std::string to_string(Archetype a) {
  switch (a) {
    case Archetype::kUgUa: return "UG/UA";
    case Archetype::kUgDa: return "UG/DA";
    case Archetype::kDgUa: return "DG/UA";
    case Archetype::kDgDa: return "DG/DA";
  }
  return "?";
}

bool uniform_geometry(Archetype a) { return a == Archetype::kUgUa || a == Archetype::kUgDa; }
bool uniform_appearance(Archetype a) { return a == Archetype::kUgUa || a == Archetype::kDgUa; }

void ArchetypeSpec::validate() const {
  if (!(world_width > 0.0) || !(world_height > 0.0) || !(resolution > 0.0)) {
    throw InvalidArgument("archetype: world size and resolution must be positive");
  }
  if (object_count < 1) throw InvalidArgument("archetype: object_count must be >= 1");
  if (label_vocabulary_size < 1) throw InvalidArgument("archetype: vocabulary must be >= 1");
  if (uniform_appearance(kind) && label_vocabulary_size > 3) {
    throw InvalidArgument("archetype: uniform-appearance worlds use at most 3 labels");
  }
  if (!uniform_appearance(kind) && label_vocabulary_size < object_count) {
    throw InvalidArgument("archetype: diverse-appearance worlds need one label per object");
  }
}

ArchetypeSpec default_archetype_spec(Archetype kind, std::uint64_t seed) {
  ArchetypeSpec s;
  s.kind = kind;
  s.seed = seed;
  switch (kind) {
    case Archetype::kUgUa:
      s.object_count = 16;
      s.label_vocabulary_size = 1;
      break;
    case Archetype::kUgDa:
      s.object_count = 12;
      s.label_vocabulary_size = 12;
      break;
    case Archetype::kDgUa:
      s.object_count = 24;
      s.label_vocabulary_size = 3;
      break;
    case Archetype::kDgDa:
      s.object_count = 24;
      s.label_vocabulary_size = 24;
      break;
  }
  return s;
}

void rasterize_polygon(const Polygon& poly, OccupancyGridMap& grid) {
  std::vector<Vec2> g;
  for (const Vec2& v : poly.vertices()) g.push_back(grid.world_to_grid(v));
  const Polygon local(g);
  const int c0 = std::max(0, static_cast<int>(std::floor(local.min_corner().x)) - 1);
  const int r0 = std::max(0, static_cast<int>(std::floor(local.min_corner().y)) - 1);
  const int c1 = std::min(grid.width() - 1, static_cast<int>(std::floor(local.max_corner().x)) + 1);
  const int r1 = std::min(grid.height() - 1, static_cast<int>(std::floor(local.max_corner().y)) + 1);
  // Shrink cells slightly so polygons that only touch a cell edge skip it.
  constexpr double kShrink = 1e-9;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const Vec2 lo{c + kShrink, r + kShrink}, hi{c + 1 - kShrink, r + 1 - kShrink};
      const Vec2 corners[4] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
      bool hit = local.contains({c + 0.5, r + 0.5});
      for (std::size_t i = 0; !hit && i < g.size(); ++i) {
        const Vec2 v = g[i];
        hit = v.x >= lo.x && v.x <= hi.x && v.y >= lo.y && v.y <= hi.y;
      }
      for (std::size_t i = 0; !hit && i < g.size(); ++i) {
        const Vec2 a = g[i], b = g[(i + 1) % g.size()];
        for (int k = 0; k < 4 && !hit; ++k) {
          hit = segments_intersect(a, b, corners[k], corners[(k + 1) % 4]);
        }
      }
      if (hit) grid.set({r, c}, CellState::kOccupied);
    }
  }
}

namespace {

const std::vector<std::string>& uniform_vocabulary(Archetype kind) {
  static const std::vector<std::string> columns = {"column", "pillar", "post"};
  static const std::vector<std::string> furniture = {"chair", "table", "shelf"};
  return kind == Archetype::kUgUa ? columns : furniture;
}

std::string letter_label(int i) {
  std::string s;
  for (int n = i + 1; n > 0; n = (n - 1) / 26) s.insert(s.begin(), static_cast<char>('A' + (n - 1) % 26));
  return s;
}

std::string furniture_label(int i) {
  static const std::vector<std::string> names = {
      "sofa", "bookcase", "desk", "fridge", "piano", "wardrobe", "bed", "armchair",
      "cabinet", "dresser", "bench", "stool", "lamp", "plant", "television", "aquarium",
      "printer", "whiteboard", "vending machine", "copier", "locker", "sink", "oven",
      "microwave", "washing machine", "coat rack", "filing cabinet", "trash can",
      "water cooler", "shoe rack", "safe", "treadmill"};
  if (i < static_cast<int>(names.size())) return names[i];
  return names[i % names.size()] + " " + std::to_string(i / names.size() + 1);
}

struct Placement {
  Vec2 center;
  double width, height, yaw;
};

std::vector<Placement> lattice_placements(const ArchetypeSpec& spec) {
  const int n = spec.object_count;
  int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  while (rows > 1 && n % rows != 0) --rows;
  const int cols = n / rows;
  const double sx = spec.world_width / cols, sy = spec.world_height / rows;
  const bool shelves = spec.kind == Archetype::kUgDa;
  const double w = shelves ? std::min(2.4, 0.5 * sx) : std::min(1.0, 0.4 * std::min(sx, sy));
  const double h = shelves ? std::min(0.6, 0.3 * sy) : w;
  std::vector<Placement> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back({{(c + 0.5) * sx, (r + 0.5) * sy}, w, h, 0.0});
  }
  return out;
}

std::vector<Placement> scattered_placements(const ArchetypeSpec& spec, Rng& rng) {
  constexpr int kMaxTries = 5000;
  constexpr double kClearance = 1.0;  // free corridor between objects and walls
  std::vector<Placement> out;
  std::vector<double> radii;
  for (int i = 0; i < spec.object_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxTries && !placed; ++attempt) {
      Placement p;
      p.width = 0.5 + 1.5 * uniform01(rng);
      p.height = 0.4 + 0.8 * uniform01(rng);
      p.yaw = kPi * uniform01(rng);
      const double r = 0.5 * std::hypot(p.width, p.height);
      const double margin = spec.wall_thickness + kClearance + r;
      if (2 * margin >= spec.world_width || 2 * margin >= spec.world_height) continue;
      p.center = {margin + (spec.world_width - 2 * margin) * uniform01(rng),
                  margin + (spec.world_height - 2 * margin) * uniform01(rng)};
      placed = true;
      for (std::size_t j = 0; j < out.size() && placed; ++j) {
        placed = norm(out[j].center - p.center) >= r + radii[j] + kClearance;
      }
      if (placed) {
        out.push_back(p);
        radii.push_back(r);
      }
    }
    if (!placed) {
      throw GenerationError("could not place object " + std::to_string(i) + " of " +
                            std::to_string(spec.object_count) + " without overlap");
    }
  }
  return out;
}

}  // namespace

World generate_world(const ArchetypeSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int w = static_cast<int>(std::lround(spec.world_width / spec.resolution));
  const int h = static_cast<int>(std::lround(spec.world_height / spec.resolution));
  OccupancyGridMap grid(w, h, spec.resolution, Pose2D(0, 0, 0), CellState::kFree);
  const int wall = std::max(1, static_cast<int>(std::lround(spec.wall_thickness / spec.resolution)));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (r < wall || c < wall || r >= h - wall || c >= w - wall) grid.set({r, c}, CellState::kOccupied);
    }
  }

  const std::vector<Placement> placements =
      uniform_geometry(spec.kind) ? lattice_placements(spec) : scattered_placements(spec, rng);
  std::vector<Landmark> landmarks;
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const Placement& p = placements[i];
    std::string label;
    switch (spec.kind) {
      case Archetype::kUgUa:
        label = uniform_vocabulary(spec.kind)[i % spec.label_vocabulary_size];
        break;
      case Archetype::kDgUa:
        label = uniform_vocabulary(spec.kind)[uniform_index(rng, spec.label_vocabulary_size)];
        break;
      case Archetype::kUgDa:
        label = letter_label(static_cast<int>(i));
        break;
      case Archetype::kDgDa:
        label = furniture_label(static_cast<int>(i));
        break;
    }
    Polygon poly = make_rectangle(p.center, p.width, p.height, p.yaw);
    rasterize_polygon(poly, grid);
    landmarks.push_back({std::move(label), std::move(poly)});
  }
  return {LabeledFootprintMap(std::move(landmarks), "map"), std::move(grid)};
}

ScanObservation LaserScan::to_observation() const {
  ScanObservation obs;
  obs.max_valid_range = range_max;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i] && *ranges[i] > 0.0 && *ranges[i] <= range_max) {
      obs.endpoints.push_back({angle_min + angle_increment * static_cast<double>(i), *ranges[i]});
    }
  }
  return obs;
}

LaserScan simulate_laser(const Pose2D& pose, const OccupancyGridMap& grid, const ScanConfig& cfg,
                         std::uint64_t seed) {
  if (!grid.is_free(pose.position())) {
    throw InvalidPose("simulate_scan: pose is not in free space");
  }
  if (cfg.beam_count < 1 || !(cfg.max_range > 0.0) || !(cfg.fov > 0.0) ||
      cfg.range_noise_sigma < 0.0) {
    throw InvalidArgument("simulate_scan: bad scan configuration");
  }
  LaserScan scan;
  scan.range_max = cfg.max_range;
  if (cfg.fov >= kTwoPi - 1e-9) {
    scan.angle_min = -kPi;
    scan.angle_increment = kTwoPi / cfg.beam_count;
  } else {
    scan.angle_min = -0.5 * cfg.fov;
    scan.angle_increment = cfg.beam_count > 1 ? cfg.fov / (cfg.beam_count - 1) : 0.0;
    if (cfg.beam_count == 1) scan.angle_min = 0.0;
  }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, cfg.range_noise_sigma);
  scan.ranges.resize(cfg.beam_count);
  for (int k = 0; k < cfg.beam_count; ++k) {
    const double bearing = scan.angle_min + scan.angle_increment * k;
    const Ray ray = Ray::from_heading(pose.position(), pose.theta + bearing, cfg.max_range);
    const double r = cast_ray_occupancy(ray, grid);
    if (r >= cfg.max_range) continue;
    double noisy = cfg.range_noise_sigma > 0.0 ? r + noise(rng) : r;
    noisy = std::clamp(noisy, 1e-6, cfg.max_range);
    scan.ranges[k] = noisy;
  }
  return scan;
}

ScanObservation simulate_scan(const Pose2D& pose, const OccupancyGridMap& grid,
                              const ScanConfig& cfg, std::uint64_t seed) {
  return simulate_laser(pose, grid, cfg, seed).to_observation();
}

std::vector<Pose2D> interpolate_trajectory(const TrajectorySpec& spec,
                                           const OccupancyGridMap& grid) {
  if (spec.waypoints.empty()) throw InvalidTrajectory("trajectory has no waypoints");
  if (!(spec.spacing > 0.0)) throw InvalidTrajectory("trajectory spacing must be > 0");
  for (std::size_t i = 0; i < spec.waypoints.size(); ++i) {
    if (!grid.is_free(spec.waypoints[i])) {
      throw InvalidTrajectory("waypoint " + std::to_string(i) + " is not in free space");
    }
  }
  std::vector<Pose2D> poses;
  if (spec.waypoints.size() == 1) {
    poses.emplace_back(spec.waypoints[0].x, spec.waypoints[0].y, 0.0);
    return poses;
  }
  double total = 0.0;
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < spec.waypoints.size(); ++i) {
    total += norm(spec.waypoints[i] - spec.waypoints[i - 1]);
    cumulative.push_back(total);
  }
  const auto count = static_cast<std::size_t>(std::floor(total / spec.spacing + 1e-9)) + 1;
  std::size_t seg = 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = std::min(total, k * spec.spacing);
    while (seg + 1 < cumulative.size() && cumulative[seg] < s) ++seg;
    const Vec2 a = spec.waypoints[seg - 1], b = spec.waypoints[seg];
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double f = len > 0.0 ? (s - cumulative[seg - 1]) / len : 0.0;
    const Vec2 p = a + (b - a) * f;
    if (!grid.is_free(p)) {
      throw InvalidTrajectory("trajectory crosses occupied space at s = " + std::to_string(s) + " m");
    }
    poses.emplace_back(p.x, p.y, std::atan2(b.y - a.y, b.x - a.x));
  }
  return poses;
}

std::vector<DatasetRecord> generate_dataset_at_poses(const World& world,
                                                     const std::vector<Pose2D>& poses,
                                                     const CameraRig& rig,
                                                     const DatasetOptions& opts,
                                                     std::uint64_t seed) {
  std::vector<DatasetRecord> records;
  for (std::size_t k = 0; k < poses.size(); ++k) {
    DatasetRecord rec;
    rec.t = opts.interval * static_cast<double>(k);
    rec.pose_gt = poses[k];
    rec.scan = simulate_laser(poses[k], world.grid, opts.scan, derive_seed(seed, 2 * k));
    NoiseModel noise = opts.noise;
    noise.seed = derive_seed(seed, 2 * k + 1);
    rec.labels = oracle_detect(poses[k], rig, world.footprints, noise, opts.occlusion, &world.grid);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> generate_dataset(const World& world, const TrajectorySpec& trajectory,
                                            const CameraRig& rig, const DatasetOptions& opts,
                                            std::uint64_t seed) {
  DatasetOptions o = opts;
  o.interval = trajectory.interval;
  return generate_dataset_at_poses(world, interpolate_trajectory(trajectory, world.grid), rig, o,
                                   seed);
}

std::vector<Pose2D> random_free_poses(const OccupancyGridMap& grid, std::size_t count,
                                      double clearance, std::uint64_t seed) {
  const DistanceField field = build_distance_field(grid);
  std::vector<GridIndex> candidates;
  for (const GridIndex& c : free_cells(grid)) {
    if (field.at(c) >= clearance) candidates.push_back(c);
  }
  if (candidates.empty()) throw UnsampleableMap("no free cell with the requested clearance");
  Rng rng(seed);
  std::vector<Pose2D> out;
  for (std::size_t k = 0; k < count; ++k) {
    const GridIndex c = candidates[uniform_index(rng, candidates.size())];
    const Vec2 p = grid.grid_to_world({c.col + uniform01(rng), c.row + uniform01(rng)});
    out.emplace_back(p.x, p.y, -kPi + kTwoPi * uniform01(rng));
  }
  return out;
}

}  // namespace labelloc
