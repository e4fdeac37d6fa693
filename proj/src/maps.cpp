#include "labelloc/maps.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "labelloc/errors.hpp"
#include "labelloc/text.hpp"

namespace labelloc {

using nlohmann::json;

LabeledFootprintMap::LabeledFootprintMap(std::vector<Landmark> landmarks,
                                         std::string frame)
    : frame_(std::move(frame)), landmarks_(std::move(landmarks)) {
  for (std::size_t i = 0; i < landmarks_.size(); ++i) {
    landmarks_[i].label = trim(landmarks_[i].label);
    if (landmarks_[i].label.empty()) {
      throw ValidationError("landmark " + std::to_string(i) + " has an empty label");
    }
    labels_.push_back(landmarks_[i].label);
  }
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  by_label_.resize(labels_.size());
  for (std::size_t i = 0; i < landmarks_.size(); ++i) {
    const int id = *label_id(landmarks_[i].label);
    landmark_label_ids_.push_back(id);
    by_label_[id].push_back(i);
  }
}

std::optional<int> LabeledFootprintMap::label_id(const std::string& label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<int>(it - labels_.begin());
}

LabeledFootprintMap LabeledFootprintMap::without_label(const std::string& label) const {
  std::vector<Landmark> kept;
  for (const Landmark& lm : landmarks_) {
    if (lm.label != label) kept.push_back(lm);
  }
  return LabeledFootprintMap(std::move(kept), frame_);
}

LabeledFootprintMap footprint_map_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("landmarks") || !doc["landmarks"].is_array()) {
    throw ParseError("footprint map: expected an object with a `landmarks` array");
  }
  std::string frame = "map";
  if (doc.contains("frame")) {
    if (!doc["frame"].is_string()) throw ParseError("footprint map: `frame` must be text");
    frame = doc["frame"].get<std::string>();
  }
  std::vector<Landmark> landmarks;
  const json& arr = doc["landmarks"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& item = arr[i];
    const std::string where = "footprint map: landmark " + std::to_string(i);
    if (!item.is_object() || !item.contains("label") || !item["label"].is_string() ||
        !item.contains("polygon") || !item["polygon"].is_array()) {
      throw ParseError(where + ": expected {label: string, polygon: [[x, y], ...]}");
    }
    std::vector<Vec2> vertices;
    for (const json& v : item["polygon"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ParseError(where + ": polygon vertices must be [x, y] number pairs");
      }
      vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    try {
      landmarks.push_back({item["label"].get<std::string>(), Polygon(std::move(vertices))});
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return LabeledFootprintMap(std::move(landmarks), std::move(frame));
}

json footprint_map_to_json(const LabeledFootprintMap& map) {
  json landmarks = json::array();
  for (const Landmark& lm : map.landmarks()) {
    json poly = json::array();
    for (const Vec2& v : lm.footprint.vertices()) poly.push_back({v.x, v.y});
    landmarks.push_back({{"label", lm.label}, {"polygon", std::move(poly)}});
  }
  return {{"frame", map.frame()}, {"landmarks", std::move(landmarks)}};
}

LabeledFootprintMap load_footprint_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open footprint map " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("footprint map " + path.string() + ": " + e.what());
  }
  return footprint_map_from_json(doc);
}

void save_footprint_map(const LabeledFootprintMap& map,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write footprint map " + path.string());
  out << footprint_map_to_json(map).dump(2) << '\n';
}

OccupancyThresholds OccupancyThresholds::from_pixels(int free_min, int occupied_max) {
  // p = (255 - v) / 255; place each threshold half a level past the boundary.
  return {(255.0 - free_min + 0.5) / 255.0, (255.0 - occupied_max - 0.5) / 255.0};
}

CellState classify_pixel(int value, int max_value, bool negate,
                         const OccupancyThresholds& t) {
  const double v = static_cast<double>(value) * 255.0 / max_value;
  const double p = negate ? v / 255.0 : (255.0 - v) / 255.0;
  if (p > t.occupied_thresh) return CellState::kOccupied;
  if (p < t.free_thresh) return CellState::kFree;
  return CellState::kUnknown;
}

OccupancyMeta load_occupancy_meta(const std::filesystem::path& meta_path) {
  YAML::Node node;
  try {
    node = YAML::LoadFile(meta_path.string());
  } catch (const YAML::BadFile&) {
    throw IoError("cannot open occupancy metadata " + meta_path.string());
  } catch (const YAML::Exception& e) {
    throw ParseError("occupancy metadata " + meta_path.string() + ": " + e.what());
  }
  OccupancyMeta meta;
  try {
    if (node["image"]) meta.image = node["image"].as<std::string>();
    if (!node["resolution"]) throw ParseError("occupancy metadata: missing `resolution`");
    meta.resolution = node["resolution"].as<double>();
    if (node["origin"]) {
      const auto o = node["origin"].as<std::vector<double>>();
      if (o.size() != 3) throw ParseError("occupancy metadata: `origin` must be [x, y, theta]");
      meta.origin = Pose2D(o[0], o[1], o[2]);
    }
    if (node["negate"]) meta.negate = node["negate"].as<int>() != 0;
    if (node["free_thresh"]) meta.thresholds.free_thresh = node["free_thresh"].as<double>();
    if (node["occupied_thresh"]) {
      meta.thresholds.occupied_thresh = node["occupied_thresh"].as<double>();
    }
  } catch (const YAML::Exception& e) {
    throw ParseError("occupancy metadata " + meta_path.string() + ": " + e.what());
  }
  if (!(meta.resolution > 0.0)) throw ParseError("occupancy metadata: resolution must be > 0");
  return meta;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& s, std::size_t& pos) {
  while (pos < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

int parse_header_int(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("PGM header: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

OccupancyGridMap occupancy_from_pgm(const std::string& bytes, const OccupancyMeta& meta) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw ParseError("PGM: expected binary P5 magic");
  const int width = parse_header_int(next_token(bytes, pos), "width");
  const int height = parse_header_int(next_token(bytes, pos), "height");
  const int maxval = parse_header_int(next_token(bytes, pos), "maxval");
  if (maxval > 255) throw ParseError("PGM: only 8-bit images are supported");
  ++pos;  // single whitespace before the raster
  const std::size_t expected = static_cast<std::size_t>(width) * height;
  if (pos > bytes.size() || bytes.size() - pos != expected) {
    throw ParseError("PGM: header says " + std::to_string(width) + "x" +
                     std::to_string(height) + " but payload has " +
                     std::to_string(pos > bytes.size() ? 0 : bytes.size() - pos) + " bytes");
  }
  OccupancyGridMap grid(width, height, meta.resolution, meta.origin);
  for (int img_row = 0; img_row < height; ++img_row) {
    const int row = height - 1 - img_row;  // image top is the largest y
    for (int col = 0; col < width; ++col) {
      const auto v = static_cast<unsigned char>(bytes[pos + img_row * width + col]);
      grid.set({row, col}, classify_pixel(v, maxval, meta.negate, meta.thresholds));
    }
  }
  return grid;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

OccupancyGridMap load_occupancy_map(const std::filesystem::path& pgm_path,
                                    const std::filesystem::path& meta_path) {
  return occupancy_from_pgm(read_file(pgm_path), load_occupancy_meta(meta_path));
}

OccupancyGridMap load_occupancy_map(const std::filesystem::path& meta_path) {
  const OccupancyMeta meta = load_occupancy_meta(meta_path);
  if (meta.image.empty()) throw ParseError("occupancy metadata: missing `image`");
  std::filesystem::path image = meta.image;
  if (image.is_relative()) image = meta_path.parent_path() / image;
  return occupancy_from_pgm(read_file(image), meta);
}

void save_occupancy_map(const OccupancyGridMap& grid,
                        const std::filesystem::path& pgm_path,
                        const std::filesystem::path& meta_path) {
  {
    std::ofstream out(pgm_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + pgm_path.string());
    out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
    std::string row_bytes(grid.width(), '\0');
    for (int row = grid.height() - 1; row >= 0; --row) {
      for (int col = 0; col < grid.width(); ++col) {
        switch (grid.at({row, col})) {
          case CellState::kFree: row_bytes[col] = static_cast<char>(254); break;
          case CellState::kOccupied: row_bytes[col] = 0; break;
          case CellState::kUnknown: row_bytes[col] = static_cast<char>(205); break;
        }
      }
      out.write(row_bytes.data(), static_cast<std::streamsize>(row_bytes.size()));
    }
  }
  std::ofstream meta(meta_path);
  if (!meta) throw IoError("cannot write " + meta_path.string());
  std::filesystem::path image = pgm_path;
  if (pgm_path.parent_path() == meta_path.parent_path()) image = pgm_path.filename();
  meta.precision(17);
  meta << "image: " << image.string() << "\n"
       << "resolution: " << grid.resolution() << "\n"
       << "origin: [" << grid.origin().x << ", " << grid.origin().y << ", "
       << grid.origin().theta << "]\n"
       << "negate: 0\n"
       << "occupied_thresh: 0.65\n"
       << "free_thresh: 0.196\n";
}

std::vector<GridIndex> free_cells(const OccupancyGridMap& grid) {
  std::vector<GridIndex> out;
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      if (grid.at({row, col}) == CellState::kFree) out.push_back({row, col});
    }
  }
  return out;
}

DistanceField::DistanceField(const OccupancyGridMap& grid, std::vector<double> distances,
                             bool no_obstacles)
    : width_(grid.width()),
      height_(grid.height()),
      resolution_(grid.resolution()),
      origin_(grid.origin()),
      cos_(std::cos(origin_.theta)),
      sin_(std::sin(origin_.theta)),
      dist_(std::move(distances)),
      no_obstacles_(no_obstacles) {
  if (dist_.size() != grid.cell_count()) {
    throw InvalidArgument("DistanceField: size does not match grid");
  }
}

std::optional<double> DistanceField::interpolate(Vec2 p) const {
  const double dx = p.x - origin_.x, dy = p.y - origin_.y;
  const double inv = 1.0 / resolution_;
  const double gx = (cos_ * dx + sin_ * dy) * inv;
  const double gy = (-sin_ * dx + cos_ * dy) * inv;
  if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= width_ || gy >= height_) return std::nullopt;
  // Coordinates relative to cell centers.
  const double u = gx - 0.5, v = gy - 0.5;
  const double fu = std::floor(u), fv = std::floor(v);
  const double au = u - fu, av = v - fv;
  const int c0 = std::clamp(static_cast<int>(fu), 0, width_ - 1);
  const int c1 = std::clamp(static_cast<int>(fu) + 1, 0, width_ - 1);
  const int r0 = std::clamp(static_cast<int>(fv), 0, height_ - 1);
  const int r1 = std::clamp(static_cast<int>(fv) + 1, 0, height_ - 1);
  const double d00 = at({r0, c0}), d01 = at({r0, c1});
  const double d10 = at({r1, c0}), d11 = at({r1, c1});
  return (1 - av) * ((1 - au) * d00 + au * d01) + av * ((1 - au) * d10 + au * d11);
}

namespace {

// 1D squared distance transform of a sampled function (lower envelope of
// parabolas). f and out have length n; v and z are scratch.
void edt_1d(const double* f, double* out, int n, std::vector<int>& v,
            std::vector<double>& z) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(out, out + n, kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

DistanceField build_distance_field(const OccupancyGridMap& grid) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int w = grid.width(), h = grid.height();
  std::vector<double> sq(static_cast<std::size_t>(w) * h, kInf);
  bool any = false;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    if (grid.cells()[i] == CellState::kOccupied) {
      sq[i] = 0.0;
      any = true;
    }
  }
  if (!any) {
    const double diag = std::hypot(w, h) * grid.resolution();
    return DistanceField(grid, std::vector<double>(sq.size(), 10.0 * diag), true);
  }
  std::vector<int> v;
  std::vector<double> z, col_in(h), col_out(h), row_out(w);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) col_in[r] = sq[static_cast<std::size_t>(r) * w + c];
    edt_1d(col_in.data(), col_out.data(), h, v, z);
    for (int r = 0; r < h; ++r) sq[static_cast<std::size_t>(r) * w + c] = col_out[r];
  }
  for (int r = 0; r < h; ++r) {
    double* row = sq.data() + static_cast<std::size_t>(r) * w;
    edt_1d(row, row_out.data(), w, v, z);
    std::copy(row_out.begin(), row_out.end(), row);
  }
  for (double& d : sq) d = std::sqrt(d) * grid.resolution();
  return DistanceField(grid, std::move(sq), false);
}

}  // namespace labelloc
