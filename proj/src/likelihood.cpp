#include "labelloc/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labelloc/errors.hpp"

namespace labelloc {

void VisionLikelihoodParams::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be > 0");
}

void ScanObservation::validate() const {
  if (!(max_valid_range > 0.0)) throw InvalidArgument("scan: max_valid_range must be > 0");
  for (const ScanEndpoint& e : endpoints) {
    if (!(e.range > 0.0) || e.range > max_valid_range || !std::isfinite(e.bearing)) {
      throw InvalidArgument("scan: endpoint range outside (0, max_valid_range]");
    }
  }
}

void ScanLikelihoodParams::validate() const {
  if (!(sigma_hit > 0.0)) throw InvalidArgument("sigma_hit must be > 0");
  if (!(z_rand_weight >= 0.0 && z_rand_weight < 1.0)) {
    throw InvalidArgument("z_rand_weight must lie in [0, 1)");
  }
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (max_endpoints == 0) throw InvalidArgument("max_endpoints must be >= 1");
}

int consistency_score(const LabelObservation& obs, const VisibilityResult& sim) {
  if (obs.per_camera.size() != sim.per_camera.size()) {
    throw InvalidArgument("consistency_score: camera count mismatch (" +
                          std::to_string(obs.per_camera.size()) + " vs " +
                          std::to_string(sim.per_camera.size()) + ")");
  }
  int score = 0;
  for (std::size_t i = 0; i < obs.per_camera.size(); ++i) {
    const LabelSet& a = obs.per_camera[i];
    const LabelSet& b = sim.per_camera[i];
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        ++score;
        ++ia;
        ++ib;
      }
    }
  }
  return score;
}

double log_sigmoid(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

double mean_score(std::span<const int> scores) {
  if (scores.empty()) throw InvalidArgument("mean_score: empty score list");
  long long sum = 0;
  for (int s : scores) sum += s;
  return static_cast<double>(sum) / static_cast<double>(scores.size());
}

std::vector<double> vision_log_likelihoods(std::span<const int> scores, double alpha) {
  if (scores.empty()) throw InvalidArgument("vision_log_likelihoods: empty score list");
  VisionLikelihoodParams{alpha}.validate();
  const double mu = mean_score(scores);
  std::vector<double> out(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    out[j] = log_sigmoid(alpha * (scores[j] - mu));
  }
  return out;
}

ScanObservation subsample_scan(const ScanObservation& scan, std::size_t max_endpoints) {
  const std::size_t n = scan.endpoints.size();
  if (max_endpoints == 0 || n <= max_endpoints) return scan;
  ScanObservation out;
  out.max_valid_range = scan.max_valid_range;
  const std::size_t stride = (n + max_endpoints - 1) / max_endpoints;
  for (std::size_t i = 0; i < n; i += stride) out.endpoints.push_back(scan.endpoints[i]);
  return out;
}

ScanLikelihoodModel::ScanLikelihoodModel(const ScanObservation& scan, const DistanceField& field,
                                         const ScanLikelihoodParams& params)
    : field_(field) {
  params.validate();
  scan.validate();
  if (scan.endpoints.empty()) throw InvalidArgument("scan likelihood: empty scan");
  for (const ScanEndpoint& e : scan.endpoints) {
    points_.push_back({e.range * std::cos(e.bearing), e.range * std::sin(e.bearing)});
  }
  gauss_weight_ = 1.0 - params.z_rand_weight;
  inv_two_sigma2_ = 1.0 / (2.0 * params.sigma_hit * params.sigma_hit);
  floor_ = params.z_rand_weight / scan.max_valid_range;
}

ScanScore ScanLikelihoodModel::evaluate(const Pose2D& pose) const {
  if (!field_.interpolate(pose.position())) {
    return {-std::numeric_limits<double>::infinity(), true};
  }
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  const double log_floor = std::log(floor_);
  double total = 0.0;
  for (const Vec2& p : points_) {
    const Vec2 w{pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y};
    const auto d = field_.interpolate(w);
    if (!d) {
      total += log_floor;
      continue;
    }
    total += std::log(gauss_weight_ * std::exp(-(*d) * (*d) * inv_two_sigma2_) + floor_);
  }
  return {total, false};
}

ScanScore scan_log_likelihood(const Pose2D& pose, const ScanObservation& scan,
                              const DistanceField& field, const ScanLikelihoodParams& params) {
  return ScanLikelihoodModel(scan, field, params).evaluate(pose);
}

double fused_log_likelihood(double vision_ll, double scan_ll, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("fused_log_likelihood: lambda must be > 0");
  return vision_ll + scan_ll / lambda;
}

}  // namespace labelloc
