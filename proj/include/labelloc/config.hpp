#pragma once

#include <cstddef>
#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "labelloc/detection.hpp"
#include "labelloc/mcl.hpp"
#include "labelloc/simworld.hpp"
#include "labelloc/visibility.hpp"

namespace labelloc {

/// Every tunable of a run. Defaults: alpha 0.5, lambda 1500, 10^6
/// hypotheses, 3-camera rig with 10 rays per camera.
struct AppConfig {
  LocalizerParams params;
  std::size_t hypotheses = 1'000'000;
  CameraRig rig = default_rig();
  NoiseModel noise;
  ScanConfig scan_sim;
  VlmEndpointConfig vlm;
};

/// Missing keys keep their defaults.
AppConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const AppConfig& cfg);
AppConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_digest(const AppConfig& cfg);

}  // namespace labelloc
