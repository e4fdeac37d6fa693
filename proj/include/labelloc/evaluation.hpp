#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labelloc/config.hpp"
#include "labelloc/mcl.hpp"
#include "labelloc/simworld.hpp"

namespace labelloc {

double trans_error(const Pose2D& est, const Pose2D& gt);
/// |wrap(theta_est - theta_gt)|, in [0, pi].
double rot_error(const Pose2D& est, const Pose2D& gt);

struct MetricRow {
  std::size_t record_index = 0;
  Modality modality = Modality::kVision;
  double e_trans = 0.0;
  double e_rot = 0.0;
  std::size_t tie_count = 0;
  Pose2D estimate;
  bool degraded = false;  // vision unavailable, scan-only fallback
  double wall_time = 0.0;
};

struct ErrorStats {
  std::size_t count = 0;
  double trans_mean = 0.0, trans_std = 0.0;
  double rot_mean = 0.0, rot_std = 0.0;
};

struct BenchmarkSummary {
  std::map<Modality, ErrorStats> per_modality;
  std::size_t record_count = 0;
  std::string config_digest;
  double wall_time = 0.0;
};

/// Population mean and standard deviation per modality.
BenchmarkSummary summarize(const std::vector<MetricRow>& rows, std::size_t record_count,
                           const std::string& digest);

struct LocalizeResult {
  std::vector<MetricRow> rows;  // ordered by record, then modality
  BenchmarkSummary summary;
};

/// Per record: fresh hypotheses from derive_seed(seed, record index),
/// evaluation, MAP estimate and errors for each requested modality. The
/// modalities share one hypothesis set. Records without labels fall back
/// to scan-only when they have a scan.
LocalizeResult run_localize(const std::vector<DatasetRecord>& records, const MapContext& maps,
                            const AppConfig& cfg, const std::vector<Modality>& modalities,
                            std::uint64_t seed);

inline constexpr const char* kMetricsCsvVersion = "1";
inline constexpr const char* kSummaryVersion = "1";

/// Header line first; timing is left out so reruns compare byte-for-byte.
void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out);
nlohmann::json summary_to_json(const BenchmarkSummary& summary);

/// Per-bin maximum log-likelihood over the hypotheses that fall in it.
struct Heatmap {
  int width = 0, height = 0;
  double bin_size = 0.0;  // meters
  Pose2D origin;
  std::vector<std::optional<double>> values;  // row-major, row 0 at the bottom
  std::size_t argmax = 0;                     // bin with the largest value

  const std::optional<double>& at(int row, int col) const { return values[row * width + col]; }
  /// Bin containing a world point, if any.
  std::optional<std::size_t> bin_of(Vec2 p) const;
};

Heatmap compute_heatmap(const HypothesisSet& hyps, Modality modality,
                        const OccupancyGridMap& grid, int cells_per_bin = 1);

/// Grayscale P5, values scaled linearly between the smallest and largest
/// populated bin (all 255 when equal). Empty bins are 0.
void write_heatmap_pgm(const Heatmap& map, const std::filesystem::path& path);
/// Color-mapped SVG with optional estimate and ground-truth markers.
void write_heatmap_svg(const Heatmap& map, const std::filesystem::path& path,
                       const std::optional<Pose2D>& estimate,
                       const std::optional<Pose2D>& ground_truth);
/// Picks the format from the extension (.svg or .pgm).
void export_heatmap(const HypothesisSet& hyps, Modality modality, const OccupancyGridMap& grid,
                    const std::filesystem::path& path, int cells_per_bin = 1,
                    const std::optional<Pose2D>& ground_truth = std::nullopt);

}  // namespace labelloc
