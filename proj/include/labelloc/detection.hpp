#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labelloc/maps.hpp"
#include "labelloc/visibility.hpp"

namespace labelloc {

enum class ObservationSource { kOracle, kVlm, kRecorded };
std::string to_string(ObservationSource s);

/// Per-camera detected labels. Labels absent from the map are kept; `off_map`
/// lists them per camera once annotated against a map. They never score.
struct LabelObservation {
  std::vector<LabelSet> per_camera;
  ObservationSource source = ObservationSource::kOracle;
  std::vector<LabelSet> off_map;

  std::size_t camera_count() const { return per_camera.size(); }
  bool operator==(const LabelObservation&) const = default;
};

/// Fills obs.off_map with the labels of each camera that `map` lacks.
void annotate_off_map(LabelObservation& obs, const LabeledFootprintMap& map);

/// On-map label ids per camera, sorted and unique.
std::vector<std::vector<int>> observed_label_ids(const LabelObservation& obs,
                                                 const LabeledFootprintMap& map);

struct NoiseModel {
  double drop_prob = 0.0;
  double false_positive_prob = 0.0;
  /// Retained labels found here are replaced by a uniform pick from the set.
  std::map<std::string, std::vector<std::string>> confusion;
  std::uint64_t seed = 0;

  void validate() const;
  bool noiseless() const {
    return drop_prob == 0.0 && false_positive_prob == 0.0 && confusion.empty();
  }
};

/// Simulated detector: visibility from the true pose corrupted by `noise`.
/// Deterministic given noise.seed.
LabelObservation oracle_detect(const Pose2D& true_pose, const CameraRig& rig,
                               const LabeledFootprintMap& map, const NoiseModel& noise,
                               OcclusionMode occlusion = OcclusionMode::kNone,
                               const OccupancyGridMap* grid = nullptr);

/// JSON form: an array of per-camera label arrays.
nlohmann::json observation_to_json(const LabelObservation& obs);
LabelObservation observation_from_json(const nlohmann::json& labels,
                                       ObservationSource source = ObservationSource::kRecorded);

struct VlmEndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4.1";
  std::string api_key_env_var = "OPENAI_API_KEY";
  std::chrono::duration<double> timeout{60.0};
  int max_retries = 3;

  void validate() const;
};

/// The detection prompt with the comma-separated label list substituted,
/// followed by the one-label-per-line output instruction.
std::string build_detection_prompt(const std::vector<std::string>& labels);

struct ParsedReply {
  LabelSet labels;   // matched map labels plus unmatched items
  LabelSet off_map;  // the unmatched items
};

/// Splits on newlines and commas, strips list markers, and matches items to
/// map labels case-insensitively after whitespace normalization. "none" and
/// empty replies give an empty set.
ParsedReply parse_vlm_reply(const std::string& reply, const LabeledFootprintMap& map);

/// Queries the endpoint once per image (concurrently), results in image
/// order. Throws DetectionUnavailable after max_retries transport failures.
LabelObservation vlm_detect(const std::vector<std::filesystem::path>& images,
                            const LabeledFootprintMap& map, const VlmEndpointConfig& cfg);

}  // namespace labelloc
