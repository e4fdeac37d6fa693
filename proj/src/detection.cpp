#include "labelloc/detection.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "labelloc/errors.hpp"
#include "labelloc/random.hpp"
#include "labelloc/text.hpp"

namespace labelloc {

using nlohmann::json;

std::string to_string(ObservationSource s) {
  switch (s) {
    case ObservationSource::kOracle: return "oracle";
    case ObservationSource::kVlm: return "vlm";
    case ObservationSource::kRecorded: return "recorded";
  }
  return "unknown";
}

void annotate_off_map(LabelObservation& obs, const LabeledFootprintMap& map) {
  obs.off_map.assign(obs.per_camera.size(), {});
  for (std::size_t i = 0; i < obs.per_camera.size(); ++i) {
    for (const std::string& l : obs.per_camera[i]) {
      if (!map.label_id(l)) obs.off_map[i].insert(l);
    }
  }
}

std::vector<std::vector<int>> observed_label_ids(const LabelObservation& obs,
                                                 const LabeledFootprintMap& map) {
  std::vector<std::vector<int>> ids(obs.per_camera.size());
  for (std::size_t i = 0; i < obs.per_camera.size(); ++i) {
    for (const std::string& l : obs.per_camera[i]) {
      if (const auto id = map.label_id(l)) ids[i].push_back(*id);
    }
    // per_camera is an ordered set and label ids follow sorted label order
  }
  return ids;
}

void NoiseModel::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(drop_prob) || !prob(false_positive_prob)) {
    throw InvalidArgument("noise model probabilities must lie in [0, 1]");
  }
  for (const auto& [from, to] : confusion) {
    if (to.empty()) throw InvalidArgument("confusion entry '" + from + "' has no targets");
  }
}

LabelObservation oracle_detect(const Pose2D& true_pose, const CameraRig& rig,
                               const LabeledFootprintMap& map, const NoiseModel& noise,
                               OcclusionMode occlusion, const OccupancyGridMap* grid) {
  noise.validate();
  const VisibilityResult sim = simulate_visible(true_pose, rig, map, occlusion, grid);
  LabelObservation obs;
  obs.source = ObservationSource::kOracle;
  if (noise.noiseless()) {
    obs.per_camera = sim.per_camera;
    obs.off_map.assign(obs.per_camera.size(), {});
    return obs;
  }
  Rng rng(noise.seed);
  for (const LabelSet& visible : sim.per_camera) {
    LabelSet reported;
    for (const std::string& label : visible) {
      if (uniform01(rng) < noise.drop_prob) continue;
      const auto it = noise.confusion.find(label);
      if (it != noise.confusion.end()) {
        reported.insert(it->second[uniform_index(rng, it->second.size())]);
      } else {
        reported.insert(label);
      }
    }
    for (const std::string& label : map.label_set()) {
      if (visible.count(label)) continue;
      if (uniform01(rng) < noise.false_positive_prob) reported.insert(label);
    }
    obs.per_camera.push_back(std::move(reported));
  }
  annotate_off_map(obs, map);
  return obs;
}

json observation_to_json(const LabelObservation& obs) {
  json out = json::array();
  for (const LabelSet& s : obs.per_camera) out.push_back(json(std::vector<std::string>(s.begin(), s.end())));
  return out;
}

LabelObservation observation_from_json(const json& labels, ObservationSource source) {
  if (!labels.is_array()) throw ParseError("labels: expected an array of per-camera arrays");
  LabelObservation obs;
  obs.source = source;
  for (const json& cam : labels) {
    if (!cam.is_array()) throw ParseError("labels: each camera entry must be an array");
    LabelSet set;
    for (const json& l : cam) {
      if (!l.is_string()) throw ParseError("labels: label entries must be strings");
      set.insert(l.get<std::string>());
    }
    obs.per_camera.push_back(std::move(set));
  }
  obs.off_map.assign(obs.per_camera.size(), {});
  return obs;
}

void VlmEndpointConfig::validate() const {
  if (!(timeout.count() > 0.0)) throw InvalidArgument("VLM endpoint timeout must be > 0");
  if (max_retries < 0) throw InvalidArgument("VLM endpoint max_retries must be >= 0");
  if (base_url.empty()) throw InvalidArgument("VLM endpoint base_url is empty");
}

std::string build_detection_prompt(const std::vector<std::string>& labels) {
  std::string list;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) list += ", ";
    list += labels[i];
  }
  return "You are an image recognition assistant. From the list below, identify only "
         "the objects that are clearly visible in the image. Include partially visible "
         "objects. Do not include any object if you are not confident it is present. "
         "Object list: " +
         list +
         "\n\nAnswer with the matching object names exactly as written in the list, one "
         "per line, and nothing else. If none are visible, answer \"none\".";
}

namespace {

std::string strip_list_marker(std::string item) {
  // "- snack", "* snack", "• snack", "1. snack", "2) snack", quoted items
  static const std::string kBullet = "\xe2\x80\xa2";
  std::size_t i = 0;
  while (i < item.size()) {
    if (item[i] == '-' || item[i] == '*') {
      ++i;
    } else if (item.compare(i, kBullet.size(), kBullet) == 0) {
      i += kBullet.size();
    } else {
      break;
    }
  }
  item = trim(std::string_view(item).substr(i));
  std::size_t d = 0;
  while (d < item.size() && std::isdigit(static_cast<unsigned char>(item[d]))) ++d;
  if (d > 0 && d < item.size() && (item[d] == '.' || item[d] == ')')) item = trim(item.substr(d + 1));
  while (!item.empty() && (item.front() == '"' || item.front() == '\'' || item.front() == '`')) {
    item.erase(item.begin());
  }
  while (!item.empty() && (item.back() == '"' || item.back() == '\'' || item.back() == '`' ||
                           item.back() == '.')) {
    item.pop_back();
  }
  return trim(item);
}

}  // namespace

ParsedReply parse_vlm_reply(const std::string& reply, const LabeledFootprintMap& map) {
  std::map<std::string, std::string> by_normalized;
  for (const std::string& l : map.label_set()) by_normalized.emplace(normalize_label(l), l);
  ParsedReply out;
  for (const std::string& raw : split_any(reply, "\n,")) {
    const std::string item = strip_list_marker(trim(raw));
    const std::string key = normalize_label(item);
    if (key.empty() || key == "none") continue;
    const auto it = by_normalized.find(key);
    if (it != by_normalized.end()) {
      out.labels.insert(it->second);
    } else {
      out.labels.insert(item);
      out.off_map.insert(item);
    }
  }
  return out;
}

namespace {

std::string read_binary(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read image " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string mime_for(const std::filesystem::path& p) {
  std::string ext = normalize_label(p.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  return "image/jpeg";
}

struct Endpoint {
  std::string scheme_host;
  std::string path;
};

Endpoint split_url(const std::string& base_url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, re)) {
    throw InvalidArgument("VLM base_url must look like http(s)://host[:port][/prefix]");
  }
  std::string prefix = m[2].matched ? m[2].str() : "";
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {m[1].str(), prefix + "/chat/completions"};
}

std::optional<std::string> reply_text(const std::string& body) {
  try {
    const json doc = json::parse(body);
    const json& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string text;
      for (const json& part : content) {
        if (part.contains("text")) text += part["text"].get<std::string>() + "\n";
      }
      return text;
    }
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

LabelSet query_one(const std::filesystem::path& image, const LabeledFootprintMap& map,
                   const VlmEndpointConfig& cfg, const std::string& prompt,
                   std::size_t camera) {
  const Endpoint ep = split_url(cfg.base_url);
  const std::string data_url =
      "data:" + mime_for(image) + ";base64," + httplib::detail::base64_encode(read_binary(image));
  const json request = {
      {"model", cfg.model_name},
      {"temperature", 0},
      {"messages",
       {{{"role", "user"},
         {"content",
          {{{"type", "text"}, {"text", prompt}},
           {{"type", "image_url"}, {"image_url", {{"url", data_url}}}}}}}}}};
  const std::string body = request.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env_var.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    httplib::Client client(ep.scheme_host);
    const auto secs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    client.set_write_timeout(secs);
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      const auto text = reply_text(res->body);
      if (!text) {
        std::cerr << "warning: camera " << camera << ": unparseable VLM reply, using empty set\n";
        return {};
      }
      return parse_vlm_reply(*text, map).labels;
    } else {
      last_error = "HTTP " + std::to_string(res->status);
    }
    if (attempt < cfg.max_retries) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 5)));
    }
  }
  throw DetectionUnavailable("VLM request for camera " + std::to_string(camera) + " failed after " +
                             std::to_string(cfg.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace

LabelObservation vlm_detect(const std::vector<std::filesystem::path>& images,
                            const LabeledFootprintMap& map, const VlmEndpointConfig& cfg) {
  cfg.validate();
  const std::string prompt = build_detection_prompt(map.label_set());
  std::vector<std::future<LabelSet>> pending;
  for (std::size_t i = 0; i < images.size(); ++i) {
    pending.push_back(std::async(std::launch::async, query_one, images[i], std::cref(map),
                                 std::cref(cfg), std::cref(prompt), i));
  }
  LabelObservation obs;
  obs.source = ObservationSource::kVlm;
  for (auto& f : pending) obs.per_camera.push_back(f.get());
  annotate_off_map(obs, map);
  return obs;
}

}  // namespace labelloc
