#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "labelloc/detection.hpp"
#include "labelloc/likelihood.hpp"
#include "labelloc/maps.hpp"
#include "labelloc/visibility.hpp"

namespace labelloc {

enum class Modality { kVision, kScan, kFused };
Modality parse_modality(const std::string& s);
std::string to_string(Modality m);

/// Pose hypotheses with per-modality scores (structure of arrays).
struct HypothesisSet {
  std::vector<Pose2D> poses;
  std::vector<int> vision_score;
  std::vector<double> vision_ll;
  std::vector<double> scan_ll;   // empty unless a scan was evaluated
  std::vector<double> fused_ll;  // empty unless a scan was evaluated
  std::uint64_t seed = 0;

  std::size_t size() const { return poses.size(); }
  const std::vector<double>& log_likelihoods(Modality m) const;
};

struct EstimateResult {
  Pose2D pose;
  std::size_t tie_count = 0;
  double max_ll = 0.0;
  Modality modality = Modality::kVision;
  /// Heading unit vectors of the ties cancelled; theta is the first tie's.
  bool degenerate_heading = false;
};

/// Uniform prior over free space: a free cell picked uniformly, position
/// jittered within it, heading uniform in [-pi, pi). Throws UnsampleableMap
/// when the grid has no free cell.
HypothesisSet sample_uniform(const OccupancyGridMap& grid, std::size_t count,
                             std::uint64_t seed);

struct LocalizerParams {
  VisionLikelihoodParams vision;
  ScanLikelihoodParams scan;
  OcclusionMode occlusion = OcclusionMode::kNone;
  unsigned workers = 0;  // 0 = hardware concurrency
};

/// The maps a query runs against. `grid` and `field` are needed for scans
/// and grid-occluded visibility.
struct MapContext {
  const LabeledFootprintMap& footprints;
  const OccupancyGridMap* grid = nullptr;
  const DistanceField* field = nullptr;
};

/// Two passes: consistency scores for all poses, then the sigmoid about
/// their mean. With a scan, also scan and fused log-likelihoods.
void evaluate(HypothesisSet& hyps, const LabelObservation& obs, const ScanObservation* scan,
              const MapContext& maps, const CameraRig& rig, const LocalizerParams& params);

inline constexpr double kTieEpsilon = 1e-9;

/// Mean of every pose within `tie_epsilon` of the best log-likelihood:
/// arithmetic mean of positions, circular mean of headings. Vision ties are
/// taken on the integer score when it is present, which the sigmoid maps
/// monotonically but may saturate for large alpha.
EstimateResult map_estimate(const HypothesisSet& hyps, Modality modality,
                            double tie_epsilon = kTieEpsilon);

/// Indices of the poses in the tie set.
std::vector<std::size_t> tie_set(const HypothesisSet& hyps, Modality modality,
                                 double tie_epsilon = kTieEpsilon);

}  // namespace labelloc
