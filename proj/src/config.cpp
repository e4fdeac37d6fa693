#include "labelloc/config.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "labelloc/errors.hpp"

namespace labelloc {

using nlohmann::json;

AppConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("config: expected an object");
  AppConfig cfg;
  try {
    if (doc.contains("vision")) {
      cfg.params.vision.alpha = doc["vision"].value("alpha", cfg.params.vision.alpha);
    }
    if (doc.contains("scan")) {
      const json& s = doc["scan"];
      auto& p = cfg.params.scan;
      p.sigma_hit = s.value("sigma_hit", p.sigma_hit);
      p.z_rand_weight = s.value("z_rand_weight", p.z_rand_weight);
      p.lambda = s.value("lambda", p.lambda);
      p.max_endpoints = s.value("max_endpoints", p.max_endpoints);
    }
    if (doc.contains("occlusion")) {
      cfg.params.occlusion = parse_occlusion_mode(doc["occlusion"].get<std::string>());
    }
    cfg.params.workers = doc.value("workers", cfg.params.workers);
    cfg.hypotheses = doc.value("hypotheses", cfg.hypotheses);
    if (doc.contains("rig")) cfg.rig = rig_from_json(doc["rig"]);
    if (doc.contains("noise")) {
      const json& n = doc["noise"];
      cfg.noise.drop_prob = n.value("drop_prob", 0.0);
      cfg.noise.false_positive_prob = n.value("false_positive_prob", 0.0);
      if (n.contains("confusion")) {
        cfg.noise.confusion =
            n["confusion"].get<std::map<std::string, std::vector<std::string>>>();
      }
      cfg.noise.seed = n.value("seed", std::uint64_t{0});
    }
    if (doc.contains("scan_sim")) {
      const json& s = doc["scan_sim"];
      cfg.scan_sim.beam_count = s.value("beam_count", cfg.scan_sim.beam_count);
      cfg.scan_sim.fov = s.value("fov_deg", cfg.scan_sim.fov * 180.0 / kPi) * kPi / 180.0;
      cfg.scan_sim.max_range = s.value("max_range", cfg.scan_sim.max_range);
      cfg.scan_sim.range_noise_sigma = s.value("range_noise_sigma", cfg.scan_sim.range_noise_sigma);
    }
    if (doc.contains("vlm")) {
      const json& v = doc["vlm"];
      cfg.vlm.base_url = v.value("base_url", cfg.vlm.base_url);
      cfg.vlm.model_name = v.value("model_name", cfg.vlm.model_name);
      cfg.vlm.api_key_env_var = v.value("api_key_env_var", cfg.vlm.api_key_env_var);
      cfg.vlm.timeout = std::chrono::duration<double>(v.value("timeout_s", cfg.vlm.timeout.count()));
      cfg.vlm.max_retries = v.value("max_retries", cfg.vlm.max_retries);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  cfg.params.vision.validate();
  cfg.params.scan.validate();
  cfg.noise.validate();
  cfg.vlm.validate();
  if (cfg.hypotheses == 0) throw InvalidArgument("config: hypotheses must be >= 1");
  return cfg;
}

json config_to_json(const AppConfig& cfg) {
  const auto& s = cfg.params.scan;
  return {
      {"vision", {{"alpha", cfg.params.vision.alpha}}},
      {"scan",
       {{"sigma_hit", s.sigma_hit},
        {"z_rand_weight", s.z_rand_weight},
        {"lambda", s.lambda},
        {"max_endpoints", s.max_endpoints}}},
      {"occlusion", to_string(cfg.params.occlusion)},
      {"workers", cfg.params.workers},
      {"hypotheses", cfg.hypotheses},
      {"rig", rig_to_json(cfg.rig)},
      {"noise",
       {{"drop_prob", cfg.noise.drop_prob},
        {"false_positive_prob", cfg.noise.false_positive_prob},
        {"confusion", cfg.noise.confusion},
        {"seed", cfg.noise.seed}}},
      {"scan_sim",
       {{"beam_count", cfg.scan_sim.beam_count},
        {"fov_deg", cfg.scan_sim.fov * 180.0 / kPi},
        {"max_range", cfg.scan_sim.max_range},
        {"range_noise_sigma", cfg.scan_sim.range_noise_sigma}}},
      {"vlm",
       {{"base_url", cfg.vlm.base_url},
        {"model_name", cfg.vlm.model_name},
        {"api_key_env_var", cfg.vlm.api_key_env_var},
        {"timeout_s", cfg.vlm.timeout.count()},
        {"max_retries", cfg.vlm.max_retries}}},
  };
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
}

std::string config_digest(const AppConfig& cfg) {
  json doc = config_to_json(cfg);
  doc.erase("workers");  // does not affect results
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace labelloc
