#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labelloc/simworld.hpp"

namespace labelloc {

// Newline-delimited JSON, one record per line:
//   {"t": s, "pose_gt": [x, y, theta],
//    "scan": {"angle_min", "angle_increment", "range_max", "ranges": [r | null, ...]},
//    "labels": [[...], ...]}        or  "images": [path, ...]

nlohmann::json record_to_json(const DatasetRecord& rec);
/// Throws ParseError naming `index` on schema violations.
DatasetRecord record_from_json(const nlohmann::json& doc, std::size_t index = 0);

void write_dataset(const std::vector<DatasetRecord>& records, std::ostream& out);
std::vector<DatasetRecord> read_dataset(std::istream& in);
void save_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

/// The record's label arrays as an observation with source = recorded.
LabelObservation load_recorded_observation(const DatasetRecord& record);
LabelObservation load_recorded_observation(const nlohmann::json& record);

}  // namespace labelloc
