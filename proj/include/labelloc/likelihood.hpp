#pragma once

#include <span>
#include <vector>

#include "labelloc/detection.hpp"
#include "labelloc/maps.hpp"
#include "labelloc/visibility.hpp"

namespace labelloc {

struct VisionLikelihoodParams {
  double alpha = 0.5;
  void validate() const;
};

struct ScanEndpoint {
  double bearing = 0.0;  // radians, sensor frame
  double range = 0.0;    // meters
  bool operator==(const ScanEndpoint&) const = default;
};

struct ScanObservation {
  std::vector<ScanEndpoint> endpoints;
  double max_valid_range = 12.0;

  void validate() const;
  bool operator==(const ScanObservation&) const = default;
};

struct ScanLikelihoodParams {
  double sigma_hit = 0.2;
  double z_rand_weight = 0.05;
  double lambda = 1500.0;
  std::size_t max_endpoints = 180;

  void validate() const;
};

/// Sum over cameras of |observed_i ∩ simulated_i|. Labels absent from the
/// simulation (including off-map labels) never count.
int consistency_score(const LabelObservation& obs, const VisibilityResult& sim);

/// log(1 / (1 + exp(-t))) without overflow.
double log_sigmoid(double t);

/// Arithmetic mean of integer scores, summed exactly.
double mean_score(std::span<const int> scores);

/// log sigma(alpha * (s - mean)) for every score, mean taken over all of
/// `scores`. Throws InvalidArgument on empty input.
std::vector<double> vision_log_likelihoods(std::span<const int> scores, double alpha);

/// Keeps at most `max_endpoints` endpoints with a uniform stride.
ScanObservation subsample_scan(const ScanObservation& scan, std::size_t max_endpoints);

struct ScanScore {
  double log_likelihood = 0.0;
  bool outside_grid = false;  // pose not on the map; log_likelihood is -inf
};

/// Likelihood-field model: per endpoint
/// log[(1 - z_rand) exp(-d^2 / (2 sigma^2)) + z_rand / max_valid_range], d the
/// interpolated distance to the nearest obstacle. Endpoints off the grid
/// contribute the z_rand floor only. Uses every endpoint of `scan`.
ScanScore scan_log_likelihood(const Pose2D& pose, const ScanObservation& scan,
                              const DistanceField& field, const ScanLikelihoodParams& params);

/// vision_ll + scan_ll / lambda.
double fused_log_likelihood(double vision_ll, double scan_ll, double lambda);

/// Scan model with endpoints pre-converted to sensor-frame points.
class ScanLikelihoodModel {
 public:
  ScanLikelihoodModel(const ScanObservation& scan, const DistanceField& field,
                      const ScanLikelihoodParams& params);
  ScanScore evaluate(const Pose2D& pose) const;

 private:
  std::vector<Vec2> points_;
  const DistanceField& field_;
  double gauss_weight_;
  double inv_two_sigma2_;
  double floor_;
};

}  // namespace labelloc
