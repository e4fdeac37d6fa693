#include "labelloc/evaluation.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "labelloc/errors.hpp"
#include "labelloc/random.hpp"
#include "labelloc/text.hpp"

namespace labelloc {

using nlohmann::json;

double trans_error(const Pose2D& est, const Pose2D& gt) {
  return std::sqrt((est.x - gt.x) * (est.x - gt.x) + (est.y - gt.y) * (est.y - gt.y));
}

double rot_error(const Pose2D& est, const Pose2D& gt) {
  return std::abs(wrap_angle(est.theta - gt.theta));
}

BenchmarkSummary summarize(const std::vector<MetricRow>& rows, std::size_t record_count,
                           const std::string& digest) {
  BenchmarkSummary s;
  s.record_count = record_count;
  s.config_digest = digest;
  std::map<Modality, std::vector<const MetricRow*>> groups;
  for (const MetricRow& r : rows) {
    groups[r.modality].push_back(&r);
    s.wall_time += r.wall_time;
  }
  for (const auto& [m, group] : groups) {
    ErrorStats st;
    st.count = group.size();
    const double n = static_cast<double>(group.size());
    for (const MetricRow* r : group) {
      st.trans_mean += r->e_trans;
      st.rot_mean += r->e_rot;
    }
    st.trans_mean /= n;
    st.rot_mean /= n;
    double vt = 0.0, vr = 0.0;
    for (const MetricRow* r : group) {
      vt += (r->e_trans - st.trans_mean) * (r->e_trans - st.trans_mean);
      vr += (r->e_rot - st.rot_mean) * (r->e_rot - st.rot_mean);
    }
    st.trans_std = std::sqrt(vt / n);
    st.rot_std = std::sqrt(vr / n);
    s.per_modality[m] = st;
  }
  return s;
}

LocalizeResult run_localize(const std::vector<DatasetRecord>& records, const MapContext& maps,
                            const AppConfig& cfg, const std::vector<Modality>& modalities,
                            std::uint64_t seed) {
  if (modalities.empty()) throw InvalidArgument("run_localize: no modality requested");
  if (maps.grid == nullptr) throw InvalidArgument("run_localize: occupancy grid required");
  bool needs_scan = false, needs_vision = false;
  for (Modality m : modalities) {
    needs_scan = needs_scan || m != Modality::kVision;
    needs_vision = needs_vision || m != Modality::kScan;
  }
  if (needs_scan && maps.field == nullptr) {
    throw InvalidArgument("run_localize: scan modalities need a distance field");
  }

  LocalizeResult result;
  for (std::size_t idx = 0; idx < records.size(); ++idx) {
    const auto start = std::chrono::steady_clock::now();
    const DatasetRecord& rec = records[idx];
    const bool has_scan = rec.scan && !rec.scan->to_observation().endpoints.empty();
    bool degraded = false;
    LabelObservation obs;
    if (rec.labels) {
      obs = *rec.labels;
    } else {
      obs.per_camera.assign(cfg.rig.size(), {});
      if (needs_vision) {
        if (!has_scan) {
          throw DetectionUnavailable("record " + std::to_string(idx) +
                                     " has no labels and no scan to fall back on");
        }
        degraded = true;
      }
    }
    std::optional<ScanObservation> scan;
    if (needs_scan || degraded) {
      if (has_scan) {
        scan = rec.scan->to_observation();
      } else {
        throw InvalidArgument("record " + std::to_string(idx) + " has no scan for the " +
                              "requested modality");
      }
    }

    HypothesisSet hyps = sample_uniform(*maps.grid, cfg.hypotheses, derive_seed(seed, idx));
    evaluate(hyps, obs, scan ? &*scan : nullptr, maps, cfg.rig, cfg.params);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (Modality m : modalities) {
      const Modality used = degraded ? Modality::kScan : m;
      const EstimateResult est = map_estimate(hyps, used);
      MetricRow row;
      row.record_index = idx;
      row.modality = m;
      row.e_trans = trans_error(est.pose, rec.pose_gt);
      row.e_rot = rot_error(est.pose, rec.pose_gt);
      row.tie_count = est.tie_count;
      row.estimate = est.pose;
      row.degraded = degraded;
      row.wall_time = elapsed / static_cast<double>(modalities.size());
      result.rows.push_back(row);
    }
  }
  result.summary = summarize(result.rows, records.size(), config_digest(cfg));
  return result;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out) {
  out << "# labelloc metrics v" << kMetricsCsvVersion << '\n'
      << "record_index,modality,e_trans,e_rot,tie_count,est_x,est_y,est_theta,degraded\n";
  for (const MetricRow& r : rows) {
    out << r.record_index << ',' << to_string(r.modality) << ',' << fmt17(r.e_trans) << ','
        << fmt17(r.e_rot) << ',' << r.tie_count << ',' << fmt17(r.estimate.x) << ','
        << fmt17(r.estimate.y) << ',' << fmt17(r.estimate.theta) << ',' << (r.degraded ? 1 : 0)
        << '\n';
  }
}

json summary_to_json(const BenchmarkSummary& s) {
  json per = json::object();
  for (const auto& [m, st] : s.per_modality) {
    per[to_string(m)] = {{"count", st.count},
                         {"e_trans", {{"mean", st.trans_mean}, {"std", st.trans_std}}},
                         {"e_rot", {{"mean", st.rot_mean}, {"std", st.rot_std}}}};
  }
  return {{"schema_version", kSummaryVersion},
          {"record_count", s.record_count},
          {"config_digest", s.config_digest},
          {"wall_time_s", s.wall_time},
          {"modalities", std::move(per)}};
}

std::optional<std::size_t> Heatmap::bin_of(Vec2 p) const {
  const Vec2 local = rotate(p - origin.position(), -origin.theta);
  const double gx = local.x / bin_size, gy = local.y / bin_size;
  if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= width || gy >= height) return std::nullopt;
  return static_cast<std::size_t>(static_cast<int>(gy) * width + static_cast<int>(gx));
}

Heatmap compute_heatmap(const HypothesisSet& hyps, Modality modality,
                        const OccupancyGridMap& grid, int cells_per_bin) {
  if (cells_per_bin < 1) throw InvalidArgument("heatmap: cells_per_bin must be >= 1");
  const auto& ll = hyps.log_likelihoods(modality);
  if (ll.size() != hyps.size() || ll.empty()) {
    throw InvalidArgument("heatmap: " + to_string(modality) + " log-likelihoods not evaluated");
  }
  Heatmap h;
  h.width = (grid.width() + cells_per_bin - 1) / cells_per_bin;
  h.height = (grid.height() + cells_per_bin - 1) / cells_per_bin;
  h.bin_size = grid.resolution() * cells_per_bin;
  h.origin = grid.origin();
  h.values.assign(static_cast<std::size_t>(h.width) * h.height, std::nullopt);
  for (std::size_t j = 0; j < hyps.size(); ++j) {
    const auto bin = h.bin_of(hyps.poses[j].position());
    if (!bin) continue;
    auto& v = h.values[*bin];
    if (!v || ll[j] > *v) v = ll[j];
  }
  bool found = false;
  for (std::size_t b = 0; b < h.values.size(); ++b) {
    if (h.values[b] && (!found || *h.values[b] > *h.values[h.argmax])) {
      h.argmax = b;
      found = true;
    }
  }
  return h;
}

namespace {

// Normalized [0, 1] intensity per bin; nullopt for empty bins.
std::vector<std::optional<double>> normalized(const Heatmap& h) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : h.values) {
    if (v && std::isfinite(*v)) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  std::vector<std::optional<double>> out(h.values.size());
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    if (!h.values[i]) continue;
    const double v = *h.values[i];
    if (!std::isfinite(v)) {
      out[i] = 0.0;
    } else {
      out[i] = hi > lo ? (v - lo) / (hi - lo) : 1.0;
    }
  }
  return out;
}

std::array<int, 3> viridis(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  std::array<int, 3> rgb;
  for (int k = 0; k < 3; ++k) {
    rgb[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  }
  return rgb;
}

}  // namespace

void write_heatmap_pgm(const Heatmap& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write heatmap " + path.string());
  const auto norm_values = normalized(h);
  out << "P5\n" << h.width << ' ' << h.height << "\n255\n";
  for (int row = h.height - 1; row >= 0; --row) {
    for (int col = 0; col < h.width; ++col) {
      const auto& v = norm_values[static_cast<std::size_t>(row) * h.width + col];
      out.put(static_cast<char>(v ? static_cast<int>(std::lround(*v * 255.0)) : 0));
    }
  }
}

void write_heatmap_svg(const Heatmap& h, const std::filesystem::path& path,
                       const std::optional<Pose2D>& estimate,
                       const std::optional<Pose2D>& ground_truth) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write heatmap " + path.string());
  const auto norm_values = normalized(h);
  const double px = 4.0;  // pixels per bin
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << h.width * px << "\" height=\""
      << h.height * px << "\" shape-rendering=\"crispEdges\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#202020\"/>\n";
  for (int row = 0; row < h.height; ++row) {
    for (int col = 0; col < h.width; ++col) {
      const auto& v = norm_values[static_cast<std::size_t>(row) * h.width + col];
      if (!v) continue;
      const auto c = viridis(*v);
      out << "<rect x=\"" << col * px << "\" y=\"" << (h.height - 1 - row) * px << "\" width=\""
          << px << "\" height=\"" << px << "\" fill=\"rgb(" << c[0] << ',' << c[1] << ',' << c[2]
          << ")\"/>\n";
    }
  }
  auto marker = [&](const Pose2D& p, const char* cls, const char* color) {
    const Vec2 local = rotate(p.position() - h.origin.position(), -h.origin.theta);
    const double x = local.x / h.bin_size * px;
    const double y = (h.height - local.y / h.bin_size) * px;
    const double th = p.theta - h.origin.theta;
    out << "<g class=\"" << cls << "\">\n<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << 2 * px << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"2\"/>\n"
        << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 5 * px * std::cos(th)
        << "\" y2=\"" << y - 5 * px * std::sin(th) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n</g>\n";
  };
  if (ground_truth) marker(*ground_truth, "ground-truth", "#00ff66");
  if (estimate) marker(*estimate, "estimate", "#ff3030");
  out << "</svg>\n";
}

void export_heatmap(const HypothesisSet& hyps, Modality modality, const OccupancyGridMap& grid,
                    const std::filesystem::path& path, int cells_per_bin,
                    const std::optional<Pose2D>& ground_truth) {
  const std::string ext = normalize_label(path.extension().string());
  if (ext != ".svg" && ext != ".pgm") {
    throw InvalidArgument("heatmap path must end in .svg or .pgm: " + path.string());
  }
  const Heatmap h = compute_heatmap(hyps, modality, grid, cells_per_bin);
  if (ext == ".svg") {
    write_heatmap_svg(h, path, map_estimate(hyps, modality).pose, ground_truth);
  } else {
    write_heatmap_pgm(h, path);
  }
}

}  // namespace labelloc
