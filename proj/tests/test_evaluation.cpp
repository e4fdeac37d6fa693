#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "labelloc/errors.hpp"
#include "labelloc/evaluation.hpp"
#include "labelloc/random.hpp"
#include "test_util.hpp"

using namespace labelloc;
using labelloc::testing::TempDir;

namespace {

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Bench {
  World world;
  DistanceField field;
  std::vector<DatasetRecord> records;
};

Bench make_bench(Archetype kind, std::size_t count, std::uint64_t seed) {
  auto world = generate_world(default_archetype_spec(kind, seed));
  auto field = build_distance_field(world.grid);
  const auto poses = random_free_poses(world.grid, count, 0.3, seed + 1);
  DatasetOptions opts;
  opts.noise.drop_prob = 0.1;
  auto records = generate_dataset_at_poses(world, poses, default_rig(), opts, seed + 2);
  return {std::move(world), std::move(field), std::move(records)};
}

}  // namespace

TEST_CASE("trans_error") {
  CHECK(trans_error(Pose2D(0, 0, 0), Pose2D(3, 4, 0)) == 5.0);
  CHECK(trans_error(Pose2D(1, 2, 3), Pose2D(1, 2, -1)) == 0.0);
  CHECK(trans_error(Pose2D(1, 1, 0), Pose2D(-1, -1, 0)) == doctest::Approx(2 * std::sqrt(2.0)));
}

TEST_CASE("rot_error") {
  CHECK(rot_error(Pose2D(0, 0, 1), Pose2D(5, 5, 1)) == 0.0);
  CHECK(rot_error(Pose2D(0, 0, 3.0), Pose2D(0, 0, -3.0)) ==
        doctest::Approx(0.28318530717958645).epsilon(1e-14));
  CHECK(std::abs(rot_error(Pose2D(0, 0, 3.0), Pose2D(0, 0, -3.0)) - std::abs(6.0 - kTwoPi)) <= 1e-9);
  CHECK(rot_error(Pose2D(0, 0, kPi / 2), Pose2D(0, 0, -kPi / 2)) == doctest::Approx(kPi));
}

TEST_CASE("metric properties") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> a(-20, 20), p(-10, 10);
  for (int i = 0; i < 100000; ++i) {
    const Pose2D x(p(rng), p(rng), a(rng)), y(p(rng), p(rng), a(rng)), z(p(rng), p(rng), a(rng));
    const double e = rot_error(x, y);
    REQUIRE(e >= 0.0);
    REQUIRE(e <= kPi);
    REQUIRE(e == rot_error(y, x));
    REQUIRE(trans_error(x, z) <= trans_error(x, y) + trans_error(y, z) + 1e-12);
  }
}

TEST_CASE("summarize") {
  std::vector<MetricRow> rows;
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(0, 5);
  for (std::size_t k = 0; k < 40; ++k) {
    for (Modality m : {Modality::kVision, Modality::kFused}) {
      MetricRow r;
      r.record_index = k;
      r.modality = m;
      r.e_trans = u(rng);
      r.e_rot = u(rng) / 2;
      rows.push_back(r);
    }
  }
  const auto s = summarize(rows, 40, "abc");
  CHECK(s.record_count == 40);
  CHECK(s.config_digest == "abc");
  REQUIRE(s.per_modality.size() == 2);
  for (Modality m : {Modality::kVision, Modality::kFused}) {
    double sum = 0, sum2 = 0;
    int n = 0;
    for (const auto& r : rows)
      if (r.modality == m) {
        sum += r.e_trans;
        ++n;
      }
    const double mean = sum / n;
    for (const auto& r : rows)
      if (r.modality == m) sum2 += (r.e_trans - mean) * (r.e_trans - mean);
    const auto& st = s.per_modality.at(m);
    CHECK(st.count == 40);
    CHECK(std::abs(st.trans_mean - mean) <= 1e-9);
    CHECK(std::abs(st.trans_std - std::sqrt(sum2 / n)) <= 1e-9);
    CHECK(st.rot_std >= 0.0);
  }
  const auto empty = summarize({}, 0, "x");
  CHECK(empty.record_count == 0);
  CHECK(empty.per_modality.empty());

  const auto doc = summary_to_json(s);
  CHECK(doc["schema_version"] == "1");
  CHECK(doc["record_count"] == 40);
  CHECK(doc["config_digest"] == "abc");
  CHECK(doc["modalities"]["vision"]["e_trans"]["mean"].get<double>() ==
        s.per_modality.at(Modality::kVision).trans_mean);
}

TEST_CASE("run_localize") {
  const auto b = make_bench(Archetype::kDgDa, 4, 7);
  AppConfig cfg;
  cfg.hypotheses = 20000;
  const MapContext maps{b.world.footprints, &b.world.grid, &b.field};
  const std::vector<Modality> all = {Modality::kVision, Modality::kScan, Modality::kFused};

  const auto r1 = run_localize(b.records, maps, cfg, all, 42);
  REQUIRE(r1.rows.size() == 12);
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].record_index == i / 3);
    CHECK(r1.rows[i].modality == all[i % 3]);
    CHECK(r1.rows[i].e_trans >= 0.0);
    CHECK(r1.rows[i].tie_count >= 1);
    CHECK_FALSE(r1.rows[i].degraded);
    CHECK(r1.rows[i].e_trans == doctest::Approx(trans_error(r1.rows[i].estimate, b.records[i / 3].pose_gt)));
  }
  CHECK(r1.summary.record_count == 4);
  CHECK(r1.summary.config_digest == config_digest(cfg));

  // same seed: identical rows; the estimate for a record equals a direct run
  const auto r2 = run_localize(b.records, maps, cfg, all, 42);
  std::ostringstream c1, c2;
  write_metrics_csv(r1.rows, c1);
  write_metrics_csv(r2.rows, c2);
  CHECK(c1.str() == c2.str());

  auto hyps = sample_uniform(b.world.grid, cfg.hypotheses, derive_seed(42, 2));
  const auto scan = b.records[2].scan->to_observation();
  evaluate(hyps, *b.records[2].labels, &scan, maps, cfg.rig, cfg.params);
  CHECK(map_estimate(hyps, Modality::kFused).pose == r1.rows[8].estimate);

  // different worker counts, same CSV
  AppConfig wide = cfg;
  wide.params.workers = 5;
  std::ostringstream c3;
  write_metrics_csv(run_localize(b.records, maps, wide, all, 42).rows, c3);
  CHECK(c3.str() == c1.str());

  CHECK(run_localize({}, maps, cfg, all, 1).rows.empty());
  CHECK(run_localize({}, maps, cfg, all, 1).summary.record_count == 0);
}

TEST_CASE("run_localize degrades to scan-only without labels") {
  auto b = make_bench(Archetype::kDgUa, 2, 3);
  AppConfig cfg;
  cfg.hypotheses = 5000;
  const MapContext maps{b.world.footprints, &b.world.grid, &b.field};
  b.records[1].labels.reset();
  const auto r = run_localize(b.records, maps, cfg, {Modality::kVision, Modality::kScan}, 9);
  REQUIRE(r.rows.size() == 4);
  CHECK_FALSE(r.rows[0].degraded);
  CHECK(r.rows[2].degraded);
  CHECK(r.rows[3].degraded);
  CHECK(r.rows[2].estimate == r.rows[3].estimate);

  b.records[1].scan.reset();
  CHECK_THROWS_AS(run_localize(b.records, maps, cfg, {Modality::kVision}, 9), DetectionUnavailable);
}

TEST_CASE("metrics csv") {
  MetricRow r;
  r.record_index = 3;
  r.modality = Modality::kFused;
  r.e_trans = 0.1;
  r.e_rot = 0.25;
  r.tie_count = 2;
  r.estimate = Pose2D(1, 2, 0.5);
  r.wall_time = 123.0;
  std::ostringstream out;
  write_metrics_csv({r}, out);
  CHECK(out.str() ==
        "# labelloc metrics v1\n"
        "record_index,modality,e_trans,e_rot,tie_count,est_x,est_y,est_theta,degraded\n"
        "3,fused,0.10000000000000001,0.25,2,1,2,0.5,0\n");
}

TEST_CASE("heatmap") {
  OccupancyGridMap grid(10, 8, 0.5, Pose2D(-1, -1, 0));
  HypothesisSet h;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 10; ++c) {
      const Vec2 p = grid.cell_center({r, c});
      h.poses.emplace_back(p.x, p.y, 0.0);
    }
  TempDir dir("heat");

  SUBCASE("uniform likelihood is a constant field") {
    h.vision_ll.assign(h.size(), std::log(0.5));
    const auto hm = compute_heatmap(h, Modality::kVision, grid);
    CHECK(hm.width == 10);
    CHECK(hm.height == 8);
    for (const auto& v : hm.values) CHECK(*v == std::log(0.5));
    write_heatmap_pgm(hm, dir / "u.pgm");
    const std::string bytes = read_all(dir / "u.pgm");
    const std::string header = "P5\n10 8\n255\n";
    REQUIRE(bytes.size() == header.size() + 80);
    CHECK(bytes.substr(0, header.size()) == header);
    for (std::size_t i = header.size(); i < bytes.size(); ++i) CHECK(static_cast<unsigned char>(bytes[i]) == 255);
  }
  SUBCASE("single spike is a single bright cell") {
    h.vision_ll.assign(h.size(), -10.0);
    h.vision_ll[23] = 0.0;  // row 2, col 3
    const auto hm = compute_heatmap(h, Modality::kVision, grid);
    CHECK(hm.argmax == 23);
    CHECK(hm.bin_of(h.poses[23].position()) == std::optional<std::size_t>(23));
    write_heatmap_pgm(hm, dir / "s.pgm");
    const std::string bytes = read_all(dir / "s.pgm");
    const std::size_t off = std::string("P5\n10 8\n255\n").size();
    int bright = 0;
    for (int row = 0; row < 8; ++row)
      for (int col = 0; col < 10; ++col) {
        const auto v = static_cast<unsigned char>(bytes[off + row * 10 + col]);
        if (v == 255) {
          ++bright;
          CHECK(row == 8 - 1 - 2);  // image rows run top-down
          CHECK(col == 3);
        } else {
          CHECK(v == 0);
        }
      }
    CHECK(bright == 1);
  }
  SUBCASE("binning and empty bins") {
    h.vision_ll.assign(h.size(), -1.0);
    const auto hm = compute_heatmap(h, Modality::kVision, grid, 3);
    CHECK(hm.width == 4);
    CHECK(hm.height == 3);
    CHECK(hm.bin_size == 1.5);
    HypothesisSet one;
    one.poses = {Pose2D(0, 0, 0)};
    one.vision_ll = {-1.0};
    const auto sparse = compute_heatmap(one, Modality::kVision, grid);
    int filled = 0;
    for (const auto& v : sparse.values) filled += v.has_value();
    CHECK(filled == 1);
  }
  SUBCASE("svg output") {
    h.vision_ll.assign(h.size(), -1.0);
    h.vision_ll[5] = 0.0;
    export_heatmap(h, Modality::kVision, grid, dir / "h.svg", 1, Pose2D(0.2, 0.3, 0));
    const std::string svg = read_all(dir / "h.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("class=\"estimate\"") != std::string::npos);
    CHECK(svg.find("class=\"ground-truth\"") != std::string::npos);
    CHECK_THROWS_AS(export_heatmap(h, Modality::kVision, grid, dir / "h.bmp"), InvalidArgument);
    CHECK_THROWS_AS(export_heatmap(h, Modality::kScan, grid, dir / "h.svg"), InvalidArgument);
  }
}

TEST_CASE("fused heatmap peak on a UG/DA world contains the ground truth") {
  const auto world = generate_world(default_archetype_spec(Archetype::kUgDa, 1));
  const auto field = build_distance_field(world.grid);
  const auto rig = default_rig();
  const MapContext maps{world.footprints, &world.grid, &field};
  int hits = 0;
  const std::vector<Pose2D> truths = {Pose2D(5.5, 5.5, 0.4), Pose2D(10.5, 13.5, -2.0),
                                      Pose2D(15.5, 1.5, 1.2)};
  for (std::size_t k = 0; k < truths.size(); ++k) {
    const Pose2D& gt = truths[k];
    REQUIRE(world.grid.is_free(gt.position()));
    DatasetOptions opts;
    const auto rec = generate_dataset_at_poses({world.footprints, world.grid}, {gt}, rig, opts, k)[0];
    auto hyps = sample_uniform(world.grid, 100000, k + 10);
    const auto scan = rec.scan->to_observation();
    evaluate(hyps, *rec.labels, &scan, maps, rig, {});
    const auto hm = compute_heatmap(hyps, Modality::kFused, world.grid, 20);  // 1 m bins
    hits += hm.bin_of(gt.position()) == std::optional<std::size_t>(hm.argmax);
  }
  CHECK(hits == 3);
}
