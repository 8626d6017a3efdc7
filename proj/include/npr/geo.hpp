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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "npr/corpus.hpp"
#include "npr/geodesy.hpp"
#include "npr/rng.hpp"

namespace npr {

/// Ground-truth distance between two records: planar UTM when both share a
/// zone (bit-reproducible, no trig), haversine otherwise. The two differ by
/// well under 0.1% at the 25 m scale that matters here.
inline double ground_distance_m(const ImageRecord& a, const ImageRecord& b) {
  if (a.utm_zone == b.utm_zone && a.utm_north_hemisphere == b.utm_north_hemisphere) {
    const double dx = a.utm_east - b.utm_east;
    const double dy = a.utm_north - b.utm_north;
    return std::sqrt(dx * dx + dy * dy);
  }
  return haversine_m(a.lat, a.lon, b.lat, b.lon);
}

/// One class of the classification pipeline: a square UTM cell crossed with
/// a heading bin.
struct GeoClass {
  std::int64_t cell_east_idx = 0;
  std::int64_t cell_north_idx = 0;
  int heading_bin = 0;
  std::vector<std::string> member_ids;
};

/// Assign every database record to exactly one (cell, heading-bin) class.
/// Classes come back sorted by (east, north, bin); members sorted by id.
/// No empty classes are emitted.
inline std::vector<GeoClass> partition_classes(const Corpus& corpus, double cell_size_m,
                                               int heading_bins) {
  if (cell_size_m <= 0.0) throw DomainError("cell_size_m must be positive");
  if (heading_bins < 1) throw DomainError("heading_bins must be >= 1");

  const double bin_width = 360.0 / heading_bins;
  std::map<std::tuple<std::int64_t, std::int64_t, int>, std::vector<std::string>> cells;
  for (const auto& rec : corpus.records) {
    if (rec.role != Role::Database) continue;
    int bin = 0;
    if (heading_bins > 1) {
      if (!rec.heading_deg) {
        throw Error("record \"" + rec.id + "\" has no heading but heading_bins > 1");
      }
      bin = static_cast<int>(std::floor(*rec.heading_deg / bin_width));
      bin = std::clamp(bin, 0, heading_bins - 1);
    }
    const auto east_idx = static_cast<std::int64_t>(std::floor(rec.utm_east / cell_size_m));
    const auto north_idx = static_cast<std::int64_t>(std::floor(rec.utm_north / cell_size_m));
    cells[{east_idx, north_idx, bin}].push_back(rec.id);
  }

  std::vector<GeoClass> out;
  out.reserve(cells.size());
  for (auto& [key, ids] : cells) {
    std::sort(ids.begin(), ids.end());
    out.push_back(GeoClass{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::move(ids)});
  }
  return out;
}

struct Triplet {
  std::string anchor_id;
  std::string positive_id;
  std::string negative_id;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct MiningResult {
  std::vector<Triplet> triplets;
  std::vector<std::string> skipped_anchor_ids;  // anchors with no in-radius positive
};

/// GPS-based triplet mining. Query records are anchors; database records are
/// the positive/negative pool. Positives lie within r_pos meters, negatives
/// beyond r_neg. Sampling is seeded per anchor id, so the output does not
/// depend on record order; triplets come back grouped by ascending anchor id.
inline MiningResult mine_triplets(const Corpus& corpus, double r_pos, double r_neg,
                                  int per_anchor, std::uint64_t seed) {
  if (!(r_pos < r_neg)) throw DomainError("r_pos must be strictly less than r_neg");
  if (per_anchor < 1) throw DomainError("per_anchor must be >= 1");

  std::vector<const ImageRecord*> pool = corpus.database_records();
  if (pool.empty()) throw Error("triplet mining requires a non-empty database pool");
  std::sort(pool.begin(), pool.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->id < b->id; });

  std::vector<const ImageRecord*> anchors = corpus.query_records();
  std::sort(anchors.begin(), anchors.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->id < b->id; });

  MiningResult result;
  for (const ImageRecord* anchor : anchors) {
    std::vector<const ImageRecord*> positives;
    std::vector<const ImageRecord*> negatives;
    for (const ImageRecord* cand : pool) {
      if (cand->id == anchor->id) continue;
      const double d = ground_distance_m(*anchor, *cand);
      if (d <= r_pos) {
        positives.push_back(cand);
      } else if (d > r_neg) {
        negatives.push_back(cand);
      }
    }
    if (positives.empty()) {
      result.skipped_anchor_ids.push_back(anchor->id);
      continue;
    }
    if (negatives.empty()) continue;  // nothing beyond r_neg; nothing to contrast against

    std::mt19937_64 rng(hash_mix(seed, fnv1a64(anchor->id)));
    const int count = std::min<std::size_t>(per_anchor, positives.size() * negatives.size());
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    std::unordered_set<std::uint64_t> used;
    while (static_cast<int>(chosen.size()) < count) {
      const std::size_t pi = rng() % positives.size();
      const std::size_t ni = rng() % negatives.size();
      const std::uint64_t key = pi * negatives.size() + ni;
      if (used.insert(key).second) chosen.emplace_back(pi, ni);
    }
    for (const auto& [pi, ni] : chosen) {
      result.triplets.push_back(Triplet{anchor->id, positives[pi]->id, negatives[ni]->id});
    }
  }
  return result;
}

}  // namespace npr
