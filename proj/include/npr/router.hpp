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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npr/corpus.hpp"
#include "npr/embed.hpp"
#include "npr/error.hpp"
#include "npr/image.hpp"
#include "npr/photometry.hpp"
#include "npr/retrieval.hpp"
#include "npr/solar.hpp"

namespace npr {

enum class RouteMode { Brightness, SolarTime, Hybrid };
enum class RouteRule { SolarTime, Brightness };

inline const char* to_string(DayNight c) { return c == DayNight::Day ? "day" : "night"; }
inline const char* to_string(RouteRule r) {
  return r == RouteRule::SolarTime ? "solar_time" : "brightness";
}

/// Outcome of classifying one query, with provenance: which rule fired and
/// the value it saw (sun elevation in degrees, or mean luminance).
struct RouteDecision {
  DayNight label = DayNight::Day;
  RouteRule rule = RouteRule::SolarTime;
  double metric = 0.0;
};

struct RouteConfig {
  RouteMode mode = RouteMode::Hybrid;
  double brightness_threshold = kDefaultBrightnessThreshold;
  SolarConfig solar;
  std::string day_pipeline_id;
  std::string night_pipeline_id;
};

/// An embedding function paired with the index it searches.
struct Pipeline {
  std::string id;
  std::function<EmbeddingVector(const Image&)> embedder;
  RetrievalIndex index;
};

/// Classify one query as day or night. Brightness needs image bytes;
/// solar time needs timestamp and coordinates; Hybrid prefers solar time
/// and falls back to brightness. No silent default: if no rule applies,
/// this throws.
inline RouteDecision classify_query(const ImageRecord& record, const Image* image,
                                    const RouteConfig& cfg) {
  auto by_solar = [&]() -> RouteDecision {
    const bool night = is_night(record, cfg.solar);
    return RouteDecision{night ? DayNight::Night : DayNight::Day, RouteRule::SolarTime,
                         solar_elevation_deg(record.lat, record.lon, *record.timestamp_utc)};
  };
  auto by_brightness = [&]() -> RouteDecision {
    if (image == nullptr || image->empty()) {
      throw Error("brightness classification of \"" + record.id + "\" requires image bytes");
    }
    const double lum = mean_luminance(*image);
    return RouteDecision{classify_by_brightness(lum, cfg.brightness_threshold),
                         RouteRule::Brightness, lum};
  };

  switch (cfg.mode) {
    case RouteMode::SolarTime:
      return by_solar();  // propagates MissingTimestampError
    case RouteMode::Brightness:
      return by_brightness();
    case RouteMode::Hybrid:
      if (record.timestamp_utc) return by_solar();
      return by_brightness();
  }
  throw Error("unreachable route mode");
}

struct RoutedResult {
  RetrievalResult result;
  RouteDecision decision;
  std::string pipeline_id;
};

struct RouteBatchResult {
  std::vector<RoutedResult> results;
  std::vector<std::pair<std::string, std::string>> failures;  // (query id, error)
};

/// The divide-and-conquer router. Classification results are cached per
/// query id (the divide is a one-time cost per query).
class Router {
 public:
  Router(RouteConfig cfg, Pipeline day, Pipeline night)
      : cfg_(std::move(cfg)), day_(std::move(day)), night_(std::move(night)) {
    cfg_.day_pipeline_id = day_.id;
    cfg_.night_pipeline_id = night_.id;
  }

  const RouteConfig& config() const { return cfg_; }

  RouteDecision classify(const ImageRecord& record, const Image* image) {
    auto it = cache_.find(record.id);
    if (it != cache_.end()) return it->second;
    RouteDecision d = classify_query(record, image, cfg_);
    cache_.emplace(record.id, d);
    return d;
  }

  /// Answer one query through the pipeline its classification selects. The
  /// result is the selected pipeline's knn output, bit for bit.
  RoutedResult search(const ImageRecord& record, const Image& image, std::size_t k) {
    const RouteDecision d = classify(record, &image);
    const Pipeline& p = d.label == DayNight::Night ? night_ : day_;
    RoutedResult out;
    out.decision = d;
    out.pipeline_id = p.id;
    out.result = knn(p.index, p.embedder(image), k, record.id);
    return out;
  }

  /// Route a batch; per-query classification errors are collected, the rest
  /// of the batch still runs.
  RouteBatchResult search_batch(const std::vector<std::pair<const ImageRecord*, const Image*>>& queries,
                                std::size_t k) {
    RouteBatchResult out;
    for (const auto& [record, image] : queries) {
      try {
        out.results.push_back(search(*record, *image, k));
      } catch (const Error& e) {
        out.failures.emplace_back(record->id, e.what());
      }
    }
    return out;
  }

 private:
  RouteConfig cfg_;
  Pipeline day_;
  Pipeline night_;
  std::map<std::string, RouteDecision> cache_;
};

/// One row of the route-tag CSV.
struct RouteTag {
  std::string query_id;
  DayNight route = DayNight::Day;
  RouteRule rule = RouteRule::SolarTime;
  double metric = 0.0;
};

/// Merge the per-pipeline reports into the divide-and-conquer report:
/// bucket recalls over the union are the query-count-weighted means of the
/// sub-reports. Tags must cover each query exactly once.
inline EvalReport dc_report(const EvalReport& day_report, const EvalReport& night_report,
                            const std::vector<RouteTag>& tags) {
  // A side that saw no queries contributes nothing; a default-constructed
  // report stands in for it.
  if (day_report.buckets.empty() && night_report.buckets.empty()) {
    throw Error("dc_report: both sub-reports are empty");
  }
  if (night_report.buckets.empty()) return day_report;
  if (day_report.buckets.empty()) return night_report;
  if (day_report.threshold_m != night_report.threshold_m) {
    throw Error("dc_report: sub-reports use different distance thresholds");
  }
  if (day_report.n_values != night_report.n_values) {
    throw Error("dc_report: sub-reports use different N values");
  }
  std::unordered_set<std::string> seen;
  for (const auto& tag : tags) {
    if (!seen.insert(tag.query_id).second) {
      throw Error("dc_report: query \"" + tag.query_id + "\" routed more than once");
    }
  }

  EvalReport out;
  out.threshold_m = day_report.threshold_m;
  out.n_values = day_report.n_values;

  std::vector<std::string> names;
  for (const auto& b : day_report.buckets) names.push_back(b.name);
  for (const auto& b : night_report.buckets) {
    if (!day_report.find(b.name)) names.push_back(b.name);
  }

  for (const auto& name : names) {
    if (name == "macro") continue;  // recomputed below
    const EvalBucket* a = day_report.find(name);
    const EvalBucket* b = night_report.find(name);
    EvalBucket merged;
    merged.name = name;
    merged.query_count = (a ? a->query_count : 0) + (b ? b->query_count : 0);
    for (std::size_t i = 0; i < out.n_values.size(); ++i) {
      const int n = out.n_values[i];
      double hits = 0.0;
      if (a && a->query_count > 0) hits += a->recall(n) * static_cast<double>(a->query_count);
      if (b && b->query_count > 0) hits += b->recall(n) * static_cast<double>(b->query_count);
      merged.recall_at.emplace_back(
          n, merged.query_count == 0 ? 0.0 : hits / static_cast<double>(merged.query_count));
    }
    out.buckets.push_back(std::move(merged));
  }

  EvalBucket macro;
  macro.name = "macro";
  std::size_t present = 0;
  std::vector<double> sums(out.n_values.size(), 0.0);
  for (const char* name : {"day", "sunset", "night"}) {
    const EvalBucket* b = out.find(name);
    if (!b || b->query_count == 0) continue;
    ++present;
    macro.query_count += b->query_count;
    for (std::size_t i = 0; i < out.n_values.size(); ++i) sums[i] += b->recall_at[i].second;
  }
  if (present > 0) {
    for (std::size_t i = 0; i < out.n_values.size(); ++i) {
      macro.recall_at.emplace_back(out.n_values[i], sums[i] / static_cast<double>(present));
    }
    out.buckets.push_back(std::move(macro));
  }
  return out;
}

}  // namespace npr
