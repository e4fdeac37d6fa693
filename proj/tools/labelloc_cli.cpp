#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "labelloc/config.hpp"
#include "labelloc/dataset.hpp"
#include "labelloc/errors.hpp"
#include "labelloc/evaluation.hpp"
#include "labelloc/random.hpp"
#include "labelloc/text.hpp"

using namespace labelloc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::vector<std::string> modalities;
  int workers = -1;
  long long hypotheses = -1;
};

struct MapPaths {
  std::string world_dir;
  std::string footprints;
  std::string occupancy;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--world", world_dir, "Directory written by gen-world");
    cmd->add_option("--footprints", footprints, "Labeled footprint map (JSON)");
    cmd->add_option("--map", occupancy, "Occupancy grid metadata (YAML)");
  }
  fs::path footprint_path() const {
    if (!footprints.empty()) return footprints;
    if (!world_dir.empty()) return fs::path(world_dir) / "footprints.json";
    throw InvalidArgument("need --footprints or --world");
  }
  fs::path occupancy_path() const {
    if (!occupancy.empty()) return occupancy;
    if (!world_dir.empty()) return fs::path(world_dir) / "map.yaml";
    throw InvalidArgument("need --map or --world");
  }
};

AppConfig load_app_config(const Globals& g) {
  AppConfig cfg = g.config_path.empty() ? AppConfig{} : load_config(g.config_path);
  if (g.workers >= 0) cfg.params.workers = static_cast<unsigned>(g.workers);
  if (g.hypotheses > 0) cfg.hypotheses = static_cast<std::size_t>(g.hypotheses);
  return cfg;
}

std::vector<Modality> modalities_of(const Globals& g, std::vector<Modality> fallback) {
  if (g.modalities.empty()) return fallback;
  std::vector<Modality> out;
  for (const auto& m : g.modalities) {
    if (m == "all") return {Modality::kVision, Modality::kScan, Modality::kFused};
    out.push_back(parse_modality(m));
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string summary_table(const BenchmarkSummary& s) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %6s %18s %18s\n", "modality", "count", "e_trans [m]",
                "e_rot [rad]");
  out << line;
  for (const auto& [m, st] : s.per_modality) {
    std::snprintf(line, sizeof line, "%-8s %6zu %8.3f +- %-7.3f %8.3f +- %-7.3f\n",
                  to_string(m).c_str(), st.count, st.trans_mean, st.trans_std, st.rot_mean,
                  st.rot_std);
    out << line;
  }
  return out.str();
}

void save_world(const World& w, const fs::path& dir) {
  fs::create_directories(dir);
  save_footprint_map(w.footprints, dir / "footprints.json");
  save_occupancy_map(w.grid, dir / "map.pgm", dir / "map.yaml");
}

std::vector<Vec2> parse_waypoints(const std::string& s) {
  std::vector<Vec2> out;
  for (const std::string& pair : split_any(s, ";")) {
    const auto xy = split_any(pair, ",");
    if (xy.size() != 2) throw InvalidArgument("waypoints look like 'x,y;x,y;...'");
    try {
      out.push_back({std::stod(xy[0]), std::stod(xy[1])});
    } catch (const std::exception&) {
      throw InvalidArgument("bad waypoint '" + pair + "'");
    }
  }
  return out;
}

// Rows from a metrics CSV, for `report`.
std::vector<MetricRow> read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<MetricRow> rows;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("record_index,", 0) != 0) throw ParseError("metrics CSV: missing header");
      header = true;
      continue;
    }
    const auto f = split_any(line, ",");
    if (f.size() != 9) throw ParseError("metrics CSV line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      MetricRow r;
      r.record_index = std::stoul(f[0]);
      r.modality = parse_modality(f[1]);
      r.e_trans = std::stod(f[2]);
      r.e_rot = std::stod(f[3]);
      r.tie_count = std::stoul(f[4]);
      r.estimate = Pose2D(std::stod(f[5]), std::stod(f[6]), std::stod(f[7]));
      r.degraded = f[8] == "1";
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError("metrics CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-map global localization toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Run seed")->capture_default_str();
  app.add_option("--config", g.config_path, "Configuration file (JSON)");
  app.add_option("--modality", g.modalities, "vision, scan, fused or all (repeatable)")
      ->delimiter(',');
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)");
  app.add_option("--hypotheses", g.hypotheses, "Hypotheses per record");

  // gen-world
  auto* gen_world = app.add_subcommand("gen-world", "Generate a synthetic archetype world");
  std::string archetype = "DG/DA", out_dir;
  gen_world->add_option("--archetype", archetype, "UG/UA, UG/DA, DG/UA or DG/DA")->capture_default_str();
  gen_world->add_option("--out", out_dir, "Output directory")->required();

  // gen-dataset
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Simulate scans and detections");
  MapPaths ds_maps;
  ds_maps.add_to(gen_dataset);
  std::string ds_out, waypoints;
  std::size_t ds_count = 50;
  double clearance = 0.3, spacing = 1.0;
  bool ds_no_labels = false;
  gen_dataset->add_option("--out", ds_out, "Dataset file (NDJSON)")->required();
  gen_dataset->add_option("--count", ds_count, "Random free poses")->capture_default_str();
  gen_dataset->add_option("--clearance", clearance, "Minimum obstacle distance of random poses")
      ->capture_default_str();
  gen_dataset->add_option("--waypoints", waypoints, "Trajectory 'x,y;x,y;...' instead of random poses");
  gen_dataset->add_option("--spacing", spacing, "Trajectory record spacing [m]")->capture_default_str();
  gen_dataset->add_flag("--no-labels", ds_no_labels, "Omit oracle labels");

  // detect
  auto* detect = app.add_subcommand("detect", "Fill dataset labels from the oracle or a VLM");
  MapPaths det_maps;
  det_maps.add_to(detect);
  std::string det_in, det_out, source = "oracle";
  detect->add_option("--dataset", det_in, "Input dataset")->required();
  detect->add_option("--out", det_out, "Output dataset")->required();
  detect->add_option("--source", source, "oracle or vlm")
      ->check(CLI::IsMember({"oracle", "vlm"}))
      ->capture_default_str();

  // localize
  auto* localize = app.add_subcommand("localize", "Global localization over a dataset");
  MapPaths loc_maps;
  loc_maps.add_to(localize);
  std::string loc_dataset, loc_csv, loc_summary;
  std::size_t limit = 0;
  localize->add_option("--dataset", loc_dataset, "Dataset file")->required();
  localize->add_option("--out", loc_csv, "Metrics CSV (stdout if omitted)");
  localize->add_option("--summary", loc_summary, "Summary JSON");
  localize->add_option("--limit", limit, "Only the first N records");

  // report
  auto* report = app.add_subcommand("report", "Summarize a metrics CSV");
  std::string rep_csv;
  bool rep_json = false;
  report->add_option("--metrics", rep_csv, "Metrics CSV")->required();
  report->add_flag("--json", rep_json, "Print the summary document");

  // heatmap
  auto* heatmap = app.add_subcommand("heatmap", "Likelihood heatmap for one record");
  MapPaths hm_maps;
  hm_maps.add_to(heatmap);
  std::string hm_dataset, hm_out;
  std::size_t hm_record = 0;
  int hm_bin = 4;
  heatmap->add_option("--dataset", hm_dataset, "Dataset file")->required();
  heatmap->add_option("--record", hm_record, "Record index")->capture_default_str();
  heatmap->add_option("--out", hm_out, "Output image (.svg or .pgm)")->required();
  heatmap->add_option("--bin", hm_bin, "Grid cells per heatmap bin")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "Archetype sweep: world, dataset and localization");
  std::vector<std::string> bench_kinds = {"UG/UA", "UG/DA", "DG/UA", "DG/DA"};
  std::size_t bench_records = 50;
  std::string bench_out;
  bench->add_option("--archetypes", bench_kinds, "Archetypes to run")->delimiter(',');
  bench->add_option("--records", bench_records, "Records per archetype")->capture_default_str();
  bench->add_option("--out", bench_out, "Directory for worlds, datasets and metrics");

  auto* show_config = app.add_subcommand("config", "Print the effective configuration as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    const AppConfig cfg = load_app_config(g);
    modalities_of(g, {});

    if (*show_config) {
      std::cout << config_to_json(cfg).dump(2) << '\n';
    } else if (*gen_world) {
      const World w = generate_world(default_archetype_spec(parse_archetype(archetype), g.seed));
      save_world(w, out_dir);
      std::cout << json{{"archetype", to_string(parse_archetype(archetype))},
                        {"landmarks", w.footprints.landmarks().size()},
                        {"labels", w.footprints.label_set().size()},
                        {"out", out_dir}}
                       .dump()
                << '\n';
    } else if (*gen_dataset) {
      const World w{load_footprint_map(ds_maps.footprint_path()),
                    load_occupancy_map(ds_maps.occupancy_path())};
      DatasetOptions opts;
      opts.scan = cfg.scan_sim;
      opts.noise = cfg.noise;
      opts.occlusion = cfg.params.occlusion;
      std::vector<DatasetRecord> records;
      if (!waypoints.empty()) {
        TrajectorySpec t;
        t.waypoints = parse_waypoints(waypoints);
        t.spacing = spacing;
        records = generate_dataset(w, t, cfg.rig, opts, g.seed);
      } else {
        const auto poses = random_free_poses(w.grid, ds_count, clearance, derive_seed(g.seed, 0x706f736573ULL));
        records = generate_dataset_at_poses(w, poses, cfg.rig, opts, g.seed);
      }
      if (ds_no_labels) {
        for (auto& r : records) r.labels.reset();
      }
      save_dataset(records, ds_out);
      std::cout << json{{"records", records.size()}, {"out", ds_out}}.dump() << '\n';
    } else if (*detect) {
      const auto map = load_footprint_map(det_maps.footprint_path());
      auto records = load_dataset(det_in);
      if (source == "oracle") {
        std::optional<OccupancyGridMap> grid;
        if (cfg.params.occlusion == OcclusionMode::kGridOccluded) {
          grid = load_occupancy_map(det_maps.occupancy_path());
        }
        for (std::size_t k = 0; k < records.size(); ++k) {
          NoiseModel noise = cfg.noise;
          noise.seed = derive_seed(g.seed, 2 * k + 1);
          records[k].labels = oracle_detect(records[k].pose_gt, cfg.rig, map, noise,
                                            cfg.params.occlusion, grid ? &*grid : nullptr);
        }
      } else {
        const fs::path base = fs::path(det_in).parent_path();
        for (std::size_t k = 0; k < records.size(); ++k) {
          std::vector<fs::path> images;
          for (const auto& p : records[k].images) images.push_back(fs::path(p).is_relative() ? base / p : fs::path(p));
          if (images.empty()) throw ParseError("record " + std::to_string(k) + " has no images");
          try {
            records[k].labels = vlm_detect(images, map, cfg.vlm);
          } catch (const DetectionUnavailable& e) {
            std::cerr << "warning: record " << k << ": " << e.what() << '\n';
            records[k].labels.reset();
          }
        }
      }
      save_dataset(records, det_out);
      std::cout << json{{"records", records.size()}, {"source", source}, {"out", det_out}}.dump()
                << '\n';
    } else if (*localize) {
      const auto footprints = load_footprint_map(loc_maps.footprint_path());
      const auto grid = load_occupancy_map(loc_maps.occupancy_path());
      const auto field = build_distance_field(grid);
      auto records = load_dataset(loc_dataset);
      if (limit > 0 && records.size() > limit) records.resize(limit);
      const auto mods = modalities_of(g, {Modality::kVision, Modality::kScan, Modality::kFused});
      const auto start = std::chrono::steady_clock::now();
      auto result = run_localize(records, {footprints, &grid, &field}, cfg, mods, g.seed);
      result.summary.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::ostringstream csv;
      write_metrics_csv(result.rows, csv);
      if (loc_csv.empty()) {
        std::cout << csv.str();
      } else {
        write_text(loc_csv, csv.str());
        std::cerr << summary_table(result.summary);
      }
      if (!loc_summary.empty()) write_text(loc_summary, summary_to_json(result.summary).dump(2) + "\n");
    } else if (*report) {
      const auto rows = read_metrics_csv(rep_csv);
      std::size_t records = 0;
      for (const auto& r : rows) records = std::max(records, r.record_index + 1);
      const auto s = summarize(rows, records, config_digest(cfg));
      if (rep_json) std::cout << summary_to_json(s).dump(2) << '\n';
      else std::cout << summary_table(s);
    } else if (*heatmap) {
      const auto footprints = load_footprint_map(hm_maps.footprint_path());
      const auto grid = load_occupancy_map(hm_maps.occupancy_path());
      const auto field = build_distance_field(grid);
      const auto records = load_dataset(hm_dataset);
      if (hm_record >= records.size()) {
        throw InvalidArgument("record " + std::to_string(hm_record) + " out of range (" +
                              std::to_string(records.size()) + " records)");
      }
      const DatasetRecord& rec = records[hm_record];
      const Modality m = modalities_of(g, {Modality::kFused}).front();
      LabelObservation obs;
      if (rec.labels) obs = *rec.labels;
      else obs.per_camera.assign(cfg.rig.size(), {});
      std::optional<ScanObservation> scan;
      if (rec.scan) scan = rec.scan->to_observation();
      if (m != Modality::kVision && !scan) throw InvalidArgument("record has no scan");
      auto hyps = sample_uniform(grid, cfg.hypotheses, derive_seed(g.seed, hm_record));
      evaluate(hyps, obs, scan ? &*scan : nullptr, {footprints, &grid, &field}, cfg.rig, cfg.params);
      export_heatmap(hyps, m, grid, hm_out, hm_bin, rec.pose_gt);
      const auto est = map_estimate(hyps, m);
      std::cout << json{{"out", hm_out},
                        {"modality", to_string(m)},
                        {"estimate", {est.pose.x, est.pose.y, est.pose.theta}},
                        {"e_trans", trans_error(est.pose, rec.pose_gt)},
                        {"tie_count", est.tie_count}}
                       .dump()
                << '\n';
    } else if (*bench) {
      const auto mods = modalities_of(g, {Modality::kVision, Modality::kScan, Modality::kFused});
      json all = json::object();
      for (const std::string& name : bench_kinds) {
        const Archetype kind = parse_archetype(name);
        const World w = generate_world(default_archetype_spec(kind, g.seed));
        const auto field = build_distance_field(w.grid);
        DatasetOptions opts;
        opts.scan = cfg.scan_sim;
        opts.noise = cfg.noise;
        opts.occlusion = cfg.params.occlusion;
        const auto poses = random_free_poses(w.grid, bench_records, clearance, derive_seed(g.seed, 0x706f736573ULL));
        const auto records = generate_dataset_at_poses(w, poses, cfg.rig, opts, g.seed);
        const auto result = run_localize(records, {w.footprints, &w.grid, &field}, cfg, mods, g.seed);
        std::cout << "== " << to_string(kind) << " ==\n" << summary_table(result.summary);
        all[to_string(kind)] = summary_to_json(result.summary);
        if (!bench_out.empty()) {
          std::string tag = to_string(kind);
          tag.erase(std::remove(tag.begin(), tag.end(), '/'), tag.end());
          const fs::path dir = fs::path(bench_out) / tag;
          save_world(w, dir);
          save_dataset(records, dir / "dataset.ndjson");
          std::ostringstream csv;
          write_metrics_csv(result.rows, csv);
          write_text(dir / "metrics.csv", csv.str());
        }
      }
      if (!bench_out.empty()) write_text(fs::path(bench_out) / "summary.json", all.dump(2) + "\n");
    }
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
