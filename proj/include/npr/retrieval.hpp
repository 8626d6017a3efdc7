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
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "npr/corpus.hpp"
#include "npr/embed.hpp"
#include "npr/error.hpp"
#include "npr/geo.hpp"
#include "npr/parallel.hpp"
#include "npr/solar.hpp"

namespace npr {

inline constexpr double kDefaultRecallThresholdM = 25.0;

/// Immutable exact-search index: unit-norm embeddings in ascending id order.
struct RetrievalIndex {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<float> matrix;  // row-major, ids.size() x dim

  std::size_t size() const { return ids.size(); }
  std::span<const float> row(std::size_t r) const { return {matrix.data() + r * dim, dim}; }
};

inline RetrievalIndex build_index(const std::map<std::string, EmbeddingVector>& embeddings) {
  if (embeddings.empty()) throw Error("build_index: no embeddings");
  RetrievalIndex index;
  index.dim = embeddings.begin()->second.dim();
  if (index.dim == 0) throw Error("build_index: zero-dimensional embeddings");
  index.ids.reserve(embeddings.size());
  index.matrix.reserve(embeddings.size() * index.dim);
  for (const auto& [id, vec] : embeddings) {
    if (vec.dim() != index.dim) {
      throw Error("build_index: embedding \"" + id + "\" has dim " + std::to_string(vec.dim()) +
                  ", expected " + std::to_string(index.dim));
    }
    if (std::abs(vec.norm() - 1.0) > 1e-5) {
      throw Error("build_index: embedding \"" + id + "\" is not unit length");
    }
    index.ids.push_back(id);
    index.matrix.insert(index.matrix.end(), vec.values.begin(), vec.values.end());
  }
  return index;
}

/// Ranked candidates for one query, cosine similarity descending, ties
/// broken by ascending database id.
struct RetrievalResult {
  std::string query_id;
  std::vector<std::pair<std::string, double>> ranked;
  bool truncated = false;  // set when k exceeded the database size
};

inline RetrievalResult knn(const RetrievalIndex& index, const EmbeddingVector& query,
                           std::size_t k, const std::string& query_id = {}) {
  if (k < 1) throw Error("knn: k must be >= 1");
  if (query.dim() != index.dim) throw Error("knn: query dimension mismatch");

  std::vector<double> scores(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto row = index.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < index.dim; ++c) {
      s += static_cast<double>(row[c]) * static_cast<double>(query.values[c]);
    }
    scores[r] = s;
  }

  std::vector<std::size_t> ranks(index.size());
  std::iota(ranks.begin(), ranks.end(), 0);
  const std::size_t take = std::min(k, index.size());
  std::partial_sort(ranks.begin(), ranks.begin() + take, ranks.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return index.ids[a] < index.ids[b];
                    });

  RetrievalResult out;
  out.query_id = query_id;
  out.truncated = k > index.size();
  out.ranked.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.ranked.emplace_back(index.ids[ranks[i]], scores[ranks[i]]);
  }
  return out;
}

/// Batch wrapper; parallel over queries, output order matches input order.
inline std::vector<RetrievalResult> knn_batch(const RetrievalIndex& index,
                                              const std::map<std::string, EmbeddingVector>& queries,
                                              std::size_t k, unsigned threads = 1) {
  std::vector<const std::pair<const std::string, EmbeddingVector>*> items;
  items.reserve(queries.size());
  for (const auto& q : queries) items.push_back(&q);
  std::vector<RetrievalResult> out(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    out[i] = knn(index, items[i]->second, k, items[i]->first);
  });
  return out;
}

struct EvalBucket {
  std::string name;
  std::size_t query_count = 0;
  std::vector<std::pair<int, double>> recall_at;  // (N, recall) in ascending N

  double recall(int n) const {
    for (const auto& [nn, r] : recall_at) {
      if (nn == n) return r;
    }
    throw Error("bucket \"" + name + "\" has no recall@" + std::to_string(n));
  }
};

/// Recall@N per condition bucket, Table-style. "all" pools every query;
/// "macro" is the unweighted mean of the per-condition buckets present.
struct EvalReport {
  double threshold_m = kDefaultRecallThresholdM;
  std::vector<int> n_values;
  std::vector<EvalBucket> buckets;

  const EvalBucket* find(const std::string& name) const {
    for (const auto& b : buckets) {
      if (b.name == name) return &b;
    }
    return nullptr;
  }
  const EvalBucket& at(const std::string& name) const {
    const EvalBucket* b = find(name);
    if (!b) throw Error("report has no bucket \"" + name + "\"");
    return *b;
  }
};

namespace detail {

/// Rank (1-based) of the first geographically correct candidate, if any.
inline std::optional<std::size_t> first_hit_rank(const RetrievalResult& result,
                                                 const ImageRecord& query, const Corpus& corpus,
                                                 double threshold_m) {
  for (std::size_t i = 0; i < result.ranked.size(); ++i) {
    const ImageRecord* db = corpus.find(result.ranked[i].first);
    if (!db) throw Error("result references unknown database id \"" + result.ranked[i].first + "\"");
    if (ground_distance_m(query, *db) <= threshold_m) return i + 1;
  }
  return std::nullopt;
}

inline EvalBucket bucket_from_hits(std::string name, const std::vector<std::size_t>& hit_ranks,
                                   std::size_t count, const std::vector<int>& n_values) {
  // hit_ranks holds the 1-based first-hit rank of each hit query (misses absent).
  EvalBucket b;
  b.name = std::move(name);
  b.query_count = count;
  for (int n : n_values) {
    std::size_t hits = 0;
    for (std::size_t rank : hit_ranks) {
      if (rank <= static_cast<std::size_t>(n)) ++hits;
    }
    b.recall_at.emplace_back(n, count == 0 ? 0.0 : static_cast<double>(hits) / count);
  }
  return b;
}

}  // namespace detail

/// The evaluation protocol: fraction of queries with at least one database
/// candidate within threshold_m meters among the top N, bucketed by the
/// query's condition label.
inline EvalReport recall_at_n(const std::vector<RetrievalResult>& results, const Corpus& corpus,
                              std::vector<int> n_values,
                              double threshold_m = kDefaultRecallThresholdM) {
  if (results.empty()) throw Error("recall_at_n: no results");
  if (n_values.empty()) throw Error("recall_at_n: no N values requested");
  std::sort(n_values.begin(), n_values.end());
  if (corpus.database_records().empty()) {
    throw Error("recall_at_n: corpus has no database records");
  }

  std::map<std::string, std::vector<std::size_t>> hits_by_bucket;
  std::map<std::string, std::size_t> count_by_bucket;
  std::vector<std::size_t> all_hits;

  for (const auto& result : results) {
    const ImageRecord* query = corpus.find(result.query_id);
    if (!query) throw Error("result references unknown query id \"" + result.query_id + "\"");
    const auto rank = detail::first_hit_rank(result, *query, corpus, threshold_m);
    const std::string bucket = to_string(query->condition);
    ++count_by_bucket[bucket];
    if (rank) {
      hits_by_bucket[bucket].push_back(*rank);
      all_hits.push_back(*rank);
    }
  }

  EvalReport report;
  report.threshold_m = threshold_m;
  report.n_values = n_values;
  report.buckets.push_back(detail::bucket_from_hits("all", all_hits, results.size(), n_values));
  for (const char* name : {"day", "sunset", "night", "unknown"}) {
    const auto it = count_by_bucket.find(name);
    if (it == count_by_bucket.end()) continue;
    report.buckets.push_back(
        detail::bucket_from_hits(name, hits_by_bucket[name], it->second, n_values));
  }

  // Macro average over the labeled condition buckets that are present.
  EvalBucket macro;
  macro.name = "macro";
  std::size_t present = 0;
  std::vector<double> sums(n_values.size(), 0.0);
  for (const char* name : {"day", "sunset", "night"}) {
    const EvalBucket* b = report.find(name);
    if (!b) continue;
    ++present;
    macro.query_count += b->query_count;
    for (std::size_t i = 0; i < n_values.size(); ++i) sums[i] += b->recall_at[i].second;
  }
  if (present > 0) {
    for (std::size_t i = 0; i < n_values.size(); ++i) {
      macro.recall_at.emplace_back(n_values[i], sums[i] / static_cast<double>(present));
    }
    report.buckets.push_back(std::move(macro));
  }
  return report;
}

/// Sunset re-split: partition the sunset bucket into before/after local
/// sunset by solar time, evaluate each side separately, and merge with
/// query-count weights. The report carries "sunset_before", "sunset_after"
/// and the merged "sunset" bucket.
inline EvalReport sunset_split_eval(const std::vector<RetrievalResult>& results,
                                    const Corpus& corpus, const SolarConfig& solar_cfg,
                                    std::vector<int> n_values,
                                    double threshold_m = kDefaultRecallThresholdM) {
  EvalReport report = recall_at_n(results, corpus, n_values, threshold_m);
  std::sort(n_values.begin(), n_values.end());

  std::vector<std::string> missing;
  std::vector<std::size_t> before_hits, after_hits;
  std::size_t before_count = 0, after_count = 0;
  for (const auto& result : results) {
    const ImageRecord* query = corpus.find(result.query_id);
    if (query->condition != Condition::Sunset) continue;
    if (!query->timestamp_utc) {
      missing.push_back(query->id);
      continue;
    }
    const bool after = is_night(*query, solar_cfg);
    const auto rank = detail::first_hit_rank(result, *query, corpus, threshold_m);
    if (after) {
      ++after_count;
      if (rank) after_hits.push_back(*rank);
    } else {
      ++before_count;
      if (rank) before_hits.push_back(*rank);
    }
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw Error("sunset queries lack timestamps: " + ids);
  }

  report.buckets.push_back(
      detail::bucket_from_hits("sunset_before", before_hits, before_count, n_values));
  report.buckets.push_back(
      detail::bucket_from_hits("sunset_after", after_hits, after_count, n_values));
  return report;
}

}  // namespace npr
