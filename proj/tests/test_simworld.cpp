#include <doctest.h>

#include <random>
#include <sstream>

#include "labelloc/dataset.hpp"
#include "labelloc/errors.hpp"
#include "labelloc/simworld.hpp"
#include "test_util.hpp"

using namespace labelloc;
using labelloc::testing::TempDir;

namespace {

const Archetype kAll[] = {Archetype::kUgUa, Archetype::kUgDa, Archetype::kDgUa, Archetype::kDgDa};

std::string dataset_bytes(const std::vector<DatasetRecord>& records) {
  std::ostringstream out;
  write_dataset(records, out);
  return out.str();
}

}  // namespace

TEST_CASE("parse_archetype") {
  CHECK(parse_archetype("UG/UA") == Archetype::kUgUa);
  CHECK(parse_archetype("ug-da") == Archetype::kUgDa);
  CHECK(parse_archetype("dgua") == Archetype::kDgUa);
  CHECK(parse_archetype("DG_DA") == Archetype::kDgDa);
  CHECK(to_string(Archetype::kDgUa) == "DG/UA");
  CHECK_THROWS_AS(parse_archetype("UG"), InvalidArgument);
  CHECK(uniform_geometry(Archetype::kUgDa));
  CHECK_FALSE(uniform_appearance(Archetype::kUgDa));
}

TEST_CASE("archetype spec validation") {
  auto s = default_archetype_spec(Archetype::kDgUa);
  s.label_vocabulary_size = 4;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = default_archetype_spec(Archetype::kDgDa);
  s.label_vocabulary_size = 5;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = default_archetype_spec(Archetype::kDgDa);
  s.object_count = 500;
  s.label_vocabulary_size = 500;
  CHECK_THROWS_AS(generate_world(s), GenerationError);
}

TEST_CASE("generate_world examples") {
  const auto ugua = generate_world(default_archetype_spec(Archetype::kUgUa, 1));
  CHECK(ugua.footprints.landmarks().size() == 16);
  CHECK(ugua.footprints.label_set() == std::vector<std::string>{"column"});
  for (const auto& lm : ugua.footprints.landmarks()) CHECK(lm.footprint.area() == doctest::Approx(1.0));

  const auto ugda = generate_world(default_archetype_spec(Archetype::kUgDa, 1));
  CHECK(ugda.footprints.landmarks().size() == 12);
  CHECK(ugda.footprints.label_set().size() == 12);
  CHECK(ugda.footprints.label_set().front() == "A");
  CHECK(ugda.footprints.label_set().back() == "L");

  CHECK(ugua.grid.width() == 400);
  CHECK(ugua.grid.height() == 400);
  CHECK(ugua.grid.resolution() == 0.05);
  CHECK(ugua.grid.occupied({0, 0}));
  CHECK(ugua.grid.occupied({1, 200}));
  CHECK_FALSE(ugua.grid.occupied({2, 200}));
}

TEST_CASE("generate_world invariants") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0, 1);
  for (Archetype kind : kAll) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto spec = default_archetype_spec(kind, seed);
      const auto world = generate_world(spec);
      const auto& lms = world.footprints.landmarks();
      REQUIRE(int(lms.size()) == spec.object_count);
      if (uniform_appearance(kind)) {
        REQUIRE(world.footprints.label_set().size() <= std::size_t(spec.label_vocabulary_size));
        REQUIRE(spec.label_vocabulary_size <= 3);
      } else {
        REQUIRE(world.footprints.label_set().size() == lms.size());
      }
      if (uniform_geometry(kind)) {
        // Lattice: displacements are integer multiples of the smallest steps.
        double dx = 1e9, dy = 1e9;
        for (const auto& a : lms)
          for (const auto& b : lms) {
            const Vec2 d = b.footprint.centroid() - a.footprint.centroid();
            if (std::abs(d.x) > 1e-6) dx = std::min(dx, std::abs(d.x));
            if (std::abs(d.y) > 1e-6) dy = std::min(dy, std::abs(d.y));
          }
        for (const auto& a : lms)
          for (const auto& b : lms) {
            const Vec2 d = b.footprint.centroid() - a.footprint.centroid();
            REQUIRE(std::abs(d.x / dx - std::round(d.x / dx)) * dx <= 1e-6);
            REQUIRE(std::abs(d.y / dy - std::round(d.y / dy)) * dy <= 1e-6);
          }
      }
      // Dense interior sample of each footprint lands on occupied cells.
      for (const auto& lm : lms) {
        const Vec2 lo = lm.footprint.min_corner(), hi = lm.footprint.max_corner();
        int inside = 0;
        while (inside < 400) {
          const Vec2 p{lo.x + (hi.x - lo.x) * u(rng), lo.y + (hi.y - lo.y) * u(rng)};
          if (!lm.footprint.contains(p)) continue;
          ++inside;
          const auto cell = world.grid.cell_of(p);
          REQUIRE(cell);
          REQUIRE(world.grid.occupied(*cell));
        }
      }
      CHECK(generate_world(spec).grid.cells() == world.grid.cells());
    }
  }
}

TEST_CASE("rasterize_polygon matches a sampled overlap oracle") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> c(1, 4), s(0.05, 1.5), yaw(-kPi, kPi), u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    OccupancyGridMap g(50, 50, 0.1, Pose2D());
    const auto poly = make_rectangle({c(rng), c(rng)}, s(rng), s(rng), yaw(rng));
    rasterize_polygon(poly, g);
    for (int r = 0; r < 50; ++r) {
      for (int col = 0; col < 50; ++col) {
        const Vec2 center = g.cell_center({r, col});
        if (poly.contains(center)) REQUIRE(g.occupied({r, col}));
        // cells far from the polygon stay free
        if (norm(center - poly.bound_center()) > poly.bound_radius() + 0.08) REQUIRE_FALSE(g.occupied({r, col}));
      }
    }
    for (const Vec2 v : poly.vertices()) REQUIRE(g.occupied(*g.cell_of(v)));
  }
}

TEST_CASE("simulate_scan") {
  ScanConfig cfg;
  cfg.range_noise_sigma = 0.0;
  SUBCASE("empty world") {
    OccupancyGridMap g(100, 100, 0.1, Pose2D(-5, -5, 0));
    CHECK(simulate_scan(Pose2D(), g, cfg, 1).endpoints.empty());
    const auto raw = simulate_laser(Pose2D(), g, cfg, 1);
    CHECK(raw.ranges.size() == 360);
    CHECK(raw.angle_increment == doctest::Approx(kTwoPi / 360));
  }
  SUBCASE("wall 2 m ahead") {
    OccupancyGridMap g(100, 100, 0.05, Pose2D(-2.5, -2.5, 0));
    for (int r = 0; r < 100; ++r) g.set(*g.cell_of({2.0 + 0.025, -2.5 + 0.05 * r + 0.025}), CellState::kOccupied);
    cfg.beam_count = 1;
    cfg.fov = 0.1;
    const auto scan = simulate_scan(Pose2D(), g, cfg, 1);
    REQUIRE(scan.endpoints.size() == 1);
    CHECK(scan.endpoints[0].bearing == 0.0);
    CHECK(std::abs(scan.endpoints[0].range - 2.0) <= 0.05);
  }
  SUBCASE("pose not free") {
    OccupancyGridMap g(10, 10, 0.1, Pose2D());
    g.set({5, 5}, CellState::kOccupied);
    CHECK_THROWS_AS(simulate_scan(Pose2D(0.55, 0.55, 0), g, cfg, 1), InvalidPose);
    g.set({5, 5}, CellState::kUnknown);
    CHECK_THROWS_AS(simulate_scan(Pose2D(0.55, 0.55, 0), g, cfg, 1), InvalidPose);
  }
}

TEST_CASE("scan noise statistics") {
  // Circular room: every beam sees the wall at a range fixed by geometry.
  OccupancyGridMap g(200, 200, 0.05, Pose2D(-5, -5, 0));
  for (int r = 0; r < 200; ++r)
    for (int c = 0; c < 200; ++c)
      if (norm(g.cell_center({r, c})) > 4.0) g.set({r, c}, CellState::kOccupied);
  ScanConfig clean;
  clean.beam_count = 1000;
  clean.range_noise_sigma = 0.0;
  ScanConfig noisy = clean;
  noisy.range_noise_sigma = 0.01;
  const Pose2D pose(0.3, -0.2, 0.7);
  const auto truth = simulate_laser(pose, g, clean, 0);
  double sum = 0, sum2 = 0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto scan = simulate_laser(pose, g, noisy, seed);
    for (std::size_t k = 0; k < scan.ranges.size(); ++k) {
      REQUIRE(truth.ranges[k]);
      const double e = *scan.ranges[k] - *truth.ranges[k];
      sum += e;
      sum2 += e * e;
      ++n;
    }
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(n == 10000);
  CHECK(std::abs(sd - 0.01) <= 0.001);
  CHECK(std::abs(mean) <= 4 * 0.01 / std::sqrt(double(n)));
}

TEST_CASE("interpolate_trajectory") {
  OccupancyGridMap g(300, 300, 0.05, Pose2D(0, 0, 0));
  TrajectorySpec t;
  t.waypoints = {{2, 2}, {12, 2}};
  auto poses = interpolate_trajectory(t, g);
  REQUIRE(poses.size() == 11);
  CHECK(poses[3].x == doctest::Approx(5.0));
  CHECK(poses.back().x == doctest::Approx(12.0));
  CHECK(poses[0].theta == doctest::Approx(0.0));

  t.waypoints = {{2, 2}, {5, 2}, {5, 6.5}};
  poses = interpolate_trajectory(t, g);
  REQUIRE(poses.size() == 8);
  CHECK(poses[5].x == doctest::Approx(5.0));
  CHECK(poses[5].y == doctest::Approx(4.0));
  CHECK(poses[5].theta == doctest::Approx(kPi / 2));

  g.set(*g.cell_of({5, 2}), CellState::kOccupied);
  CHECK_THROWS_AS(interpolate_trajectory(t, g), InvalidTrajectory);
  t.waypoints = {{2, 2}, {8, 2}};
  CHECK_THROWS_AS(interpolate_trajectory(t, g), InvalidTrajectory);
  t.waypoints = {};
  CHECK_THROWS_AS(interpolate_trajectory(t, g), InvalidTrajectory);
}

TEST_CASE("generate_dataset") {
  const auto world = generate_world(default_archetype_spec(Archetype::kDgDa, 3));
  const auto rig = default_rig();
  const std::vector<Pose2D> poses = random_free_poses(world.grid, 12, 0.3, 9);

  SUBCASE("noiseless labels equal simulated visibility") {
    DatasetOptions opts;
    const auto recs = generate_dataset_at_poses(world, poses, rig, opts, 17);
    REQUIRE(recs.size() == poses.size());
    for (std::size_t k = 0; k < recs.size(); ++k) {
      REQUIRE(recs[k].labels);
      CHECK(recs[k].labels->per_camera == simulate_visible(poses[k], rig, world.footprints).per_camera);
      CHECK(recs[k].scan->ranges.size() == 360);
      CHECK(recs[k].t == doctest::Approx(1.5 * k));
      CHECK(world.grid.is_free(recs[k].pose_gt.position()));
    }
  }
  SUBCASE("fixed seed gives byte-identical output") {
    DatasetOptions opts;
    opts.noise.drop_prob = 0.2;
    opts.noise.false_positive_prob = 0.05;
    const auto a = dataset_bytes(generate_dataset_at_poses(world, poses, rig, opts, 17));
    const auto b = dataset_bytes(generate_dataset_at_poses(world, poses, rig, opts, 17));
    const auto c = dataset_bytes(generate_dataset_at_poses(world, poses, rig, opts, 18));
    CHECK(a == b);
    CHECK(a != c);
  }
  SUBCASE("trajectory through free space") {
    TrajectorySpec path;
    path.waypoints = {{0.5, 0.5}, {19.5, 0.5}};  // hugging the bottom wall, outside the object margin
    DatasetOptions opts;
    const auto recs = generate_dataset(world, path, rig, opts, 1);
    CHECK(recs.size() == 20);
  }
  SUBCASE("round-trip through a file") {
    TempDir dir("dataset");
    DatasetOptions opts;
    opts.noise.drop_prob = 0.3;
    const auto recs = generate_dataset_at_poses(world, poses, rig, opts, 4);
    save_dataset(recs, dir / "d.ndjson");
    const auto back = load_dataset(dir / "d.ndjson");
    CHECK(dataset_bytes(back) == dataset_bytes(recs));
    for (std::size_t k = 0; k < recs.size(); ++k) {
      CHECK(back[k].pose_gt == recs[k].pose_gt);
      CHECK(*back[k].scan == *recs[k].scan);
      CHECK(back[k].labels->per_camera == recs[k].labels->per_camera);
    }
  }
}

TEST_CASE("random_free_poses") {
  const auto world = generate_world(default_archetype_spec(Archetype::kUgDa, 2));
  const auto field = build_distance_field(world.grid);
  const auto poses = random_free_poses(world.grid, 500, 0.3, 3);
  REQUIRE(poses.size() == 500);
  for (const auto& p : poses) {
    REQUIRE(world.grid.is_free(p.position()));
    REQUIRE(*field.interpolate(p.position()) >= 0.3 - 0.05);
  }
  CHECK(random_free_poses(world.grid, 50, 0.3, 3) ==
        std::vector<Pose2D>(poses.begin(), poses.begin() + 50));
}

TEST_CASE("dataset parsing errors") {
  std::istringstream in(R"({"t": 0, "pose_gt": [0, 0, 0], "labels": [[]]}
{"t": 1, "pose_gt": [0, 0], "labels": [[]]}
)");
  CHECK_THROWS_WITH_AS(read_dataset(in), doctest::Contains("record 1"), ParseError);
  std::istringstream blank("\n\n");
  CHECK(read_dataset(blank).empty());
}
