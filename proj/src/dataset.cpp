#include "labelloc/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "labelloc/errors.hpp"

namespace labelloc {

using nlohmann::json;

json record_to_json(const DatasetRecord& rec) {
  json doc;
  doc["t"] = rec.t;
  doc["pose_gt"] = {rec.pose_gt.x, rec.pose_gt.y, rec.pose_gt.theta};
  if (rec.scan) {
    json ranges = json::array();
    for (const auto& r : rec.scan->ranges) ranges.push_back(r ? json(*r) : json(nullptr));
    doc["scan"] = {{"angle_min", rec.scan->angle_min},
                   {"angle_increment", rec.scan->angle_increment},
                   {"range_max", rec.scan->range_max},
                   {"ranges", std::move(ranges)}};
  }
  if (rec.labels) doc["labels"] = observation_to_json(*rec.labels);
  if (!rec.images.empty()) doc["images"] = rec.images;
  return doc;
}

DatasetRecord record_from_json(const json& doc, std::size_t index) {
  const std::string where = "dataset record " + std::to_string(index);
  if (!doc.is_object()) throw ParseError(where + ": expected an object");
  DatasetRecord rec;
  try {
    rec.t = doc.value("t", 0.0);
    const auto p = doc.at("pose_gt").get<std::vector<double>>();
    if (p.size() != 3) throw ParseError(where + ": pose_gt must be [x, y, theta]");
    rec.pose_gt = Pose2D(p[0], p[1], p[2]);
    if (doc.contains("scan") && !doc["scan"].is_null()) {
      const json& s = doc["scan"];
      LaserScan scan;
      scan.angle_min = s.at("angle_min").get<double>();
      scan.angle_increment = s.at("angle_increment").get<double>();
      scan.range_max = s.value("range_max", 12.0);
      for (const json& r : s.at("ranges")) {
        if (r.is_null()) {
          scan.ranges.emplace_back();
        } else {
          scan.ranges.emplace_back(r.get<double>());
        }
      }
      rec.scan = std::move(scan);
    }
    if (doc.contains("labels") && !doc["labels"].is_null()) {
      rec.labels = observation_from_json(doc["labels"], ObservationSource::kRecorded);
    }
    if (doc.contains("images")) rec.images = doc["images"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
  return rec;
}

void write_dataset(const std::vector<DatasetRecord>& records, std::ostream& out) {
  for (const DatasetRecord& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<DatasetRecord> read_dataset(std::istream& in) {
  std::vector<DatasetRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("dataset record " + std::to_string(out.size()) + ": " + e.what());
    }
    out.push_back(record_from_json(doc, out.size()));
  }
  return out;
}

void save_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset " + path.string());
  write_dataset(records, out);
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset(in);
}

LabelObservation load_recorded_observation(const DatasetRecord& record) {
  if (!record.labels) throw ParseError("dataset record has no `labels`");
  LabelObservation obs = *record.labels;
  obs.source = ObservationSource::kRecorded;
  return obs;
}

LabelObservation load_recorded_observation(const json& record) {
  return load_recorded_observation(record_from_json(record));
}

}  // namespace labelloc
