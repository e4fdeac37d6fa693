#include "labelloc/mcl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labelloc/errors.hpp"
#include "labelloc/parallel.hpp"
#include "labelloc/random.hpp"

namespace labelloc {

Modality parse_modality(const std::string& s) {
  if (s == "vision") return Modality::kVision;
  if (s == "scan") return Modality::kScan;
  if (s == "fused") return Modality::kFused;
  throw InvalidArgument("unknown modality '" + s + "' (expected vision, scan or fused)");
}

std::string to_string(Modality m) {
  switch (m) {
    case Modality::kVision: return "vision";
    case Modality::kScan: return "scan";
    case Modality::kFused: return "fused";
  }
  return "unknown";
}

const std::vector<double>& HypothesisSet::log_likelihoods(Modality m) const {
  switch (m) {
    case Modality::kVision: return vision_ll;
    case Modality::kScan: return scan_ll;
    case Modality::kFused: return fused_ll;
  }
  return vision_ll;
}

HypothesisSet sample_uniform(const OccupancyGridMap& grid, std::size_t count,
                             std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("sample_uniform: count must be >= 1");
  const std::vector<GridIndex> cells = free_cells(grid);
  if (cells.empty()) throw UnsampleableMap("sample_uniform: map has no free cell");
  HypothesisSet hyps;
  hyps.seed = seed;
  hyps.poses.reserve(count);
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const GridIndex c = cells[uniform_index(rng, cells.size())];
    const double u = uniform01(rng);
    const double v = uniform01(rng);
    const double theta = -kPi + kTwoPi * uniform01(rng);
    const Vec2 p = grid.grid_to_world({c.col + u, c.row + v});
    hyps.poses.emplace_back(p.x, p.y, theta);
  }
  return hyps;
}

void evaluate(HypothesisSet& hyps, const LabelObservation& obs, const ScanObservation* scan,
              const MapContext& maps, const CameraRig& rig, const LocalizerParams& params) {
  params.vision.validate();
  const std::size_t n = hyps.size();
  if (n == 0) throw InvalidArgument("evaluate: empty hypothesis set");
  if (obs.camera_count() != rig.size()) {
    throw InvalidArgument("evaluate: observation has " + std::to_string(obs.camera_count()) +
                          " cameras, rig has " + std::to_string(rig.size()));
  }
  if (scan && (maps.grid == nullptr || maps.field == nullptr)) {
    throw InvalidArgument("evaluate: a scan needs the occupancy grid and distance field");
  }

  // Pass 1: consistency scores.
  const VisibilitySimulator sim(rig, maps.footprints, params.occlusion, maps.grid);
  const auto observed = observed_label_ids(obs, maps.footprints);
  hyps.vision_score.assign(n, 0);
  bool any_observed = false;
  for (const auto& cam : observed) any_observed = any_observed || !cam.empty();
  if (any_observed) {
    parallel_for(n, params.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        hyps.vision_score[j] = sim.count_matches(hyps.poses[j], observed);
      }
    });
  }

  // Pass 2: sigmoid about the mean over the whole set (exact integer sum).
  const double mu = mean_score(hyps.vision_score);
  const double alpha = params.vision.alpha;
  hyps.vision_ll.resize(n);
  parallel_for(n, params.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      hyps.vision_ll[j] = log_sigmoid(alpha * (hyps.vision_score[j] - mu));
    }
  });

  if (!scan) {
    hyps.scan_ll.clear();
    hyps.fused_ll.clear();
    return;
  }
  const ScanObservation reduced = subsample_scan(*scan, params.scan.max_endpoints);
  const ScanLikelihoodModel model(reduced, *maps.field, params.scan);
  const double lambda = params.scan.lambda;
  hyps.scan_ll.resize(n);
  hyps.fused_ll.resize(n);
  parallel_for(n, params.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      hyps.scan_ll[j] = model.evaluate(hyps.poses[j]).log_likelihood;
      hyps.fused_ll[j] = fused_log_likelihood(hyps.vision_ll[j], hyps.scan_ll[j], lambda);
    }
  });
}

std::vector<std::size_t> tie_set(const HypothesisSet& hyps, Modality modality,
                                 double tie_epsilon) {
  const auto& ll = hyps.log_likelihoods(modality);
  if (ll.empty() || ll.size() != hyps.size()) {
    throw InvalidArgument("map_estimate: " + to_string(modality) +
                          " log-likelihoods have not been evaluated");
  }
  std::vector<std::size_t> ties;
  if (modality == Modality::kVision && hyps.vision_score.size() == ll.size()) {
    const int top = *std::max_element(hyps.vision_score.begin(), hyps.vision_score.end());
    for (std::size_t j = 0; j < ll.size(); ++j) {
      if (hyps.vision_score[j] == top) ties.push_back(j);
    }
    return ties;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double v : ll) best = std::max(best, v);
  for (std::size_t j = 0; j < ll.size(); ++j) {
    if (ll[j] >= best - tie_epsilon) ties.push_back(j);
  }
  if (ties.empty()) {  // every value is -inf
    ties.resize(ll.size());
    for (std::size_t j = 0; j < ll.size(); ++j) ties[j] = j;
  }
  return ties;
}

EstimateResult map_estimate(const HypothesisSet& hyps, Modality modality, double tie_epsilon) {
  const auto ties = tie_set(hyps, modality, tie_epsilon);
  const auto& ll = hyps.log_likelihoods(modality);
  EstimateResult out;
  out.modality = modality;
  out.tie_count = ties.size();
  out.max_ll = ll[ties.front()];
  double sx = 0.0, sy = 0.0, sc = 0.0, ss = 0.0;
  for (std::size_t j : ties) {
    const Pose2D& p = hyps.poses[j];
    out.max_ll = std::max(out.max_ll, ll[j]);
    sx += p.x;
    sy += p.y;
    sc += std::cos(p.theta);
    ss += std::sin(p.theta);
  }
  const double k = static_cast<double>(ties.size());
  double theta;
  if (std::hypot(sc, ss) < 1e-6) {
    theta = hyps.poses[ties.front()].theta;
    out.degenerate_heading = true;
  } else {
    theta = std::atan2(ss, sc);
  }
  out.pose = Pose2D(sx / k, sy / k, theta);
  return out;
}

}  // namespace labelloc
