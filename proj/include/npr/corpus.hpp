// Copyright 2026 the npr-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "npr/error.hpp"
#include "npr/geodesy.hpp"
#include "npr/time_util.hpp"

namespace npr {

enum class Condition { Day, Sunset, Night, Unknown };
enum class Role { Database, Query };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::Day: return "day";
    case Condition::Sunset: return "sunset";
    case Condition::Night: return "night";
    case Condition::Unknown: return "unknown";
  }
  return "unknown";
}

inline Condition condition_from_string(const std::string& s) {
  if (s == "day") return Condition::Day;
  if (s == "sunset") return Condition::Sunset;
  if (s == "night") return Condition::Night;
  if (s == "unknown") return Condition::Unknown;
  throw ParseError("unknown condition label: \"" + s + "\"");
}

inline const char* to_string(Role r) { return r == Role::Database ? "database" : "query"; }

inline Role role_from_string(const std::string& s) {
  if (s == "database") return Role::Database;
  if (s == "query") return Role::Query;
  throw ParseError("unknown role: \"" + s + "\" (expected \"database\" or \"query\")");
}

/// One geo-tagged image. UTM fields are always populated after load (either
/// taken from the metadata or computed from lat/lon).
struct ImageRecord {
  std::string id;
  std::string image_path;
  double lat = 0.0;
  double lon = 0.0;
  double utm_east = 0.0;
  double utm_north = 0.0;
  int utm_zone = 0;
  bool utm_north_hemisphere = true;
  std::optional<double> heading_deg;           // [0, 360)
  std::optional<UnixSeconds> timestamp_utc;
  Condition condition = Condition::Unknown;
  Role role = Role::Database;
};

struct Corpus {
  std::string name;
  std::vector<ImageRecord> records;

  const ImageRecord* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &records[it->second];
  }

  std::vector<const ImageRecord*> database_records() const { return filter(Role::Database); }
  std::vector<const ImageRecord*> query_records() const { return filter(Role::Query); }

  void rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < records.size(); ++i) index_[records[i].id] = i;
  }

 private:
  std::vector<const ImageRecord*> filter(Role role) const {
    std::vector<const ImageRecord*> out;
    for (const auto& r : records) {
      if (r.role == role) out.push_back(&r);
    }
    return out;
  }

  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline double normalize_heading(double h) {
  h = std::fmod(h, 360.0);
  if (h < 0.0) h += 360.0;
  return h;
}

inline ImageRecord record_from_json(const nlohmann::json& j, int line_no,
                                    const std::filesystem::path& image_root) {
  auto fail = [line_no](const std::string& field, const std::string& what) -> ImageRecord {
    throw ParseError("line " + std::to_string(line_no) + ", field \"" + field + "\": " + what);
  };

  ImageRecord rec;
  for (const char* key : {"id", "path", "lat", "lon", "role"}) {
    if (!j.contains(key)) return fail(key, "missing required key");
  }
  if (!j.at("id").is_string() || j.at("id").get<std::string>().empty()) {
    return fail("id", "must be a non-empty string");
  }
  rec.id = j.at("id").get<std::string>();
  if (!j.at("path").is_string()) return fail("path", "must be a string");
  rec.image_path = (image_root / j.at("path").get<std::string>()).string();
  if (!j.at("lat").is_number()) return fail("lat", "must be a number");
  rec.lat = j.at("lat").get<double>();
  if (!(rec.lat >= -90.0 && rec.lat <= 90.0)) return fail("lat", "outside [-90, 90]");
  if (!j.at("lon").is_number()) return fail("lon", "must be a number");
  rec.lon = j.at("lon").get<double>();
  if (!(rec.lon >= -180.0 && rec.lon < 180.0)) return fail("lon", "outside [-180, 180)");
  try {
    rec.role = role_from_string(j.at("role").get<std::string>());
  } catch (const ParseError& e) {
    return fail("role", e.what());
  }

  if (j.contains("heading_deg")) {
    if (!j.at("heading_deg").is_number()) return fail("heading_deg", "must be a number");
    rec.heading_deg = normalize_heading(j.at("heading_deg").get<double>());
  }
  if (j.contains("timestamp_utc")) {
    try {
      rec.timestamp_utc = parse_rfc3339(j.at("timestamp_utc").get<std::string>());
    } catch (const Error& e) {
      return fail("timestamp_utc", e.what());
    }
  }
  if (j.contains("condition")) {
    try {
      rec.condition = condition_from_string(j.at("condition").get<std::string>());
    } catch (const ParseError& e) {
      return fail("condition", e.what());
    }
  }

  const bool has_utm = j.contains("utm_east") || j.contains("utm_north") || j.contains("utm_zone");
  const UtmCoord computed = latlon_to_utm(rec.lat, rec.lon);
  if (has_utm) {
    for (const char* key : {"utm_east", "utm_north", "utm_zone"}) {
      if (!j.contains(key)) return fail(key, "all of utm_east/utm_north/utm_zone are required together");
    }
    rec.utm_east = j.at("utm_east").get<double>();
    rec.utm_north = j.at("utm_north").get<double>();
    rec.utm_zone = j.at("utm_zone").get<int>();
    rec.utm_north_hemisphere = rec.lat >= 0.0;
    if (rec.utm_zone != computed.zone) return fail("utm_zone", "does not match lat/lon zone");
    const double dx = rec.utm_east - computed.easting;
    const double dy = rec.utm_north - computed.northing;
    if (std::sqrt(dx * dx + dy * dy) > 1.0) {
      return fail("utm_east", "UTM coordinates more than 1 m from projected lat/lon");
    }
  } else {
    rec.utm_east = computed.easting;
    rec.utm_north = computed.northing;
    rec.utm_zone = computed.zone;
    rec.utm_north_hemisphere = computed.north;
  }
  return rec;
}

inline nlohmann::json record_to_json(const ImageRecord& rec,
                                     const std::filesystem::path& image_root) {
  nlohmann::json j;
  j["id"] = rec.id;
  std::filesystem::path p(rec.image_path);
  j["path"] = image_root.empty() ? p.string() : p.lexically_relative(image_root).string();
  j["lat"] = rec.lat;
  j["lon"] = rec.lon;
  j["role"] = to_string(rec.role);
  j["utm_east"] = rec.utm_east;
  j["utm_north"] = rec.utm_north;
  j["utm_zone"] = rec.utm_zone;
  if (rec.heading_deg) j["heading_deg"] = *rec.heading_deg;
  if (rec.timestamp_utc) j["timestamp_utc"] = format_rfc3339(*rec.timestamp_utc);
  if (rec.condition != Condition::Unknown) j["condition"] = to_string(rec.condition);
  return j;
}

}  // namespace detail

/// Load a JSONL corpus. One record per line; image bytes are not touched.
/// Throws ParseError naming the offending line and field.
inline Corpus load_corpus(const std::filesystem::path& metadata_path,
                          const std::filesystem::path& image_root) {
  std::ifstream in(metadata_path);
  if (!in) throw Error("cannot open metadata file: " + metadata_path.string());
  if (!image_root.empty() && !std::filesystem::exists(image_root)) {
    throw Error("image root does not exist: " + image_root.string());
  }

  Corpus corpus;
  corpus.name = metadata_path.stem().string();
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    ImageRecord rec = detail::record_from_json(j, line_no, image_root);
    if (!seen.insert(rec.id).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate id \"" + rec.id + "\"");
    }
    corpus.records.push_back(std::move(rec));
  }
  corpus.rebuild_index();
  return corpus;
}

/// Write the corpus back out as JSONL. Together with load_corpus this is an
/// identity on every field.
inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                        const std::filesystem::path& image_root = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  for (const auto& rec : corpus.records) {
    out << detail::record_to_json(rec, image_root).dump() << '\n';
  }
}

/// Partition query records into condition buckets. The labeler must be total
/// over query records; every query id lands in exactly one bucket.
inline std::map<Condition, std::vector<std::string>> split_by_condition(
    const Corpus& corpus, const std::function<Condition(const ImageRecord&)>& labeler) {
  std::map<Condition, std::vector<std::string>> buckets;
  for (const auto& rec : corpus.records) {
    if (rec.role != Role::Query) continue;
    buckets[labeler(rec)].push_back(rec.id);
  }
  return buckets;
}

}  // namespace npr
