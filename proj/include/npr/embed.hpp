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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "npr/error.hpp"
#include "npr/geo.hpp"
#include "npr/image.hpp"
#include "npr/losses.hpp"
#include "npr/matrix.hpp"
#include "npr/rng.hpp"

namespace npr {

/// Fixed-dimension float32 descriptor of one image.
struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }

  double norm() const {
    double s = 0.0;
    for (float v : values) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  }

  /// Scale to unit length. Vectors already unit within 1e-6 are left
  /// untouched so round-trips through files stay bit-exact.
  void normalize() {
    const double n = norm();
    if (n == 0.0) throw Error("cannot normalize a zero embedding");
    if (std::abs(n - 1.0) <= 1e-6) return;
    for (auto& v : values) v = static_cast<float>(v / n);
  }
};

inline constexpr std::size_t kBaselineDescriptorDim = 320;

/// Handcrafted 320-dim descriptor: an 8x8 grayscale thumbnail (64), a 16-bin
/// histogram per color channel (48), and magnitude-weighted gradient
/// orientation histograms with 16 bins over a 13-cell spatial pyramid
/// (1x1 + 2x2 + 2x4 = 13 cells, 208). Blocks are L2-normalized before the
/// final whole-vector normalization so no block dominates by construction.
inline EmbeddingVector baseline_descriptor(const Image& img) {
  if (img.empty()) throw Error("baseline_descriptor: empty image");
  const int w = img.width, h = img.height;

  std::vector<double> gray(img.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) gray[static_cast<std::size_t>(y) * w + x] = pixel_luma(img, x, y);
  }

  std::vector<double> feat;
  feat.reserve(kBaselineDescriptorDim);

  // 8x8 thumbnail: mean gray over each cell of an 8x8 grid.
  for (int cy = 0; cy < 8; ++cy) {
    const int y0 = cy * h / 8, y1 = std::max(y0 + 1, (cy + 1) * h / 8);
    for (int cx = 0; cx < 8; ++cx) {
      const int x0 = cx * w / 8, x1 = std::max(x0 + 1, (cx + 1) * w / 8);
      double sum = 0.0;
      for (int y = std::min(y0, h - 1); y < std::min(y1, h); ++y) {
        for (int x = std::min(x0, w - 1); x < std::min(x1, w); ++x) {
          sum += gray[static_cast<std::size_t>(y) * w + x];
        }
      }
      const int count = (std::min(y1, h) - std::min(y0, h - 1)) *
                        (std::min(x1, w) - std::min(x0, w - 1));
      feat.push_back(count > 0 ? sum / count : 0.0);
    }
  }

  // 16-bin histogram per channel, mass-normalized.
  std::array<double, 48> color{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) color[c * 16 + img.at(x, y, c) / 16] += 1.0;
    }
  }
  for (double v : color) feat.push_back(v / static_cast<double>(img.pixel_count()));

  // Gradient orientation histograms: 16 unsigned bins over a 13-cell pyramid.
  constexpr int kOriBins = 16;
  std::array<double, 13 * kOriBins> grad{};
  auto cell_of = [&](int x, int y) -> std::array<int, 3> {
    const int q2x = std::min(1, x * 2 / w), q2y = std::min(1, y * 2 / h);
    const int q4x = std::min(3, x * 4 / w);
    return {0, 1 + q2y * 2 + q2x, 5 + q2y * 4 + q4x};
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
      const double gx = gray[static_cast<std::size_t>(y) * w + xp] -
                        gray[static_cast<std::size_t>(y) * w + xm];
      const double gy = gray[static_cast<std::size_t>(yp) * w + x] -
                        gray[static_cast<std::size_t>(ym) * w + x];
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += std::numbers::pi;
      if (theta >= std::numbers::pi) theta = 0.0;
      const int bin = std::min(kOriBins - 1,
                               static_cast<int>(theta / std::numbers::pi * kOriBins));
      for (int cell : cell_of(x, y)) grad[cell * kOriBins + bin] += mag;
    }
  }
  for (double v : grad) feat.push_back(v);

  // Per-block L2 normalization (zero blocks stay zero), then global L2.
  auto normalize_block = [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += feat[i] * feat[i];
    if (s > 0.0) {
      const double inv = 1.0 / std::sqrt(s);
      for (std::size_t i = begin; i < end; ++i) feat[i] *= inv;
    }
  };
  normalize_block(0, 64);
  normalize_block(64, 112);
  normalize_block(112, 320);

  EmbeddingVector out;
  out.values.resize(kBaselineDescriptorDim);
  double total = 0.0;
  for (double v : feat) total += v * v;
  const double inv = total > 0.0 ? 1.0 / std::sqrt(total) : 0.0;
  for (std::size_t i = 0; i < feat.size(); ++i) {
    out.values[i] = static_cast<float>(feat[i] * inv);
  }
  return out;
}

// ---------------------------------------------------------------------------
// NPRE embedding interchange format.
//
//   magic "NPRE" | version u8 = 1 | dim u32 LE | count u32 LE |
//   count x ( id_len u16 LE | id bytes UTF-8 | dim x float32 LE )
// ---------------------------------------------------------------------------

class NpreMagicError : public Error {
 public:
  using Error::Error;
};

class NpreFormatError : public Error {
 public:
  using Error::Error;
};

class NpreTruncatedError : public Error {
 public:
  NpreTruncatedError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class NpreValueError : public Error {
 public:
  using Error::Error;
};

static_assert(std::endian::native == std::endian::little,
              "NPRE I/O assumes a little-endian host");

inline void write_npre(const std::filesystem::path& path,
                       const std::map<std::string, EmbeddingVector>& embeddings) {
  if (embeddings.empty()) throw Error("write_npre: nothing to write");
  const std::size_t dim = embeddings.begin()->second.dim();
  if (dim == 0) throw Error("write_npre: zero-dimensional embeddings");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());

  out.write("NPRE", 4);
  const std::uint8_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), 1);
  const auto dim32 = static_cast<std::uint32_t>(dim);
  const auto count32 = static_cast<std::uint32_t>(embeddings.size());
  out.write(reinterpret_cast<const char*>(&dim32), 4);
  out.write(reinterpret_cast<const char*>(&count32), 4);
  for (const auto& [id, vec] : embeddings) {
    if (vec.dim() != dim) throw Error("write_npre: embedding \"" + id + "\" has mismatched dim");
    if (id.empty() || id.size() > 0xffff) throw Error("write_npre: bad id length for \"" + id + "\"");
    const auto len = static_cast<std::uint16_t>(id.size());
    out.write(reinterpret_cast<const char*>(&len), 2);
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    out.write(reinterpret_cast<const char*>(vec.values.data()),
              static_cast<std::streamsize>(dim * sizeof(float)));
  }
  if (!out) throw Error("write failed: " + path.string());
}

/// Read an NPRE file. Vectors are normalized on load (no-op when already
/// unit length). Magic, header, truncation and value problems raise
/// distinct error types.
inline std::map<std::string, EmbeddingVector> read_npre(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embedding file: " + path.string());

  std::uint64_t offset = 0;
  auto read_bytes = [&](void* dst, std::size_t n, const char* what) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw NpreTruncatedError(std::string("truncated NPRE file while reading ") + what, offset);
    }
    offset += n;
  };

  char magic[4];
  read_bytes(magic, 4, "magic");
  if (std::memcmp(magic, "NPRE", 4) != 0) {
    throw NpreMagicError("not an NPRE file: bad magic in " + path.string());
  }
  std::uint8_t version = 0;
  read_bytes(&version, 1, "version");
  if (version != 1) {
    throw NpreFormatError("unsupported NPRE version " + std::to_string(version));
  }
  std::uint32_t dim = 0, count = 0;
  read_bytes(&dim, 4, "dimension");
  read_bytes(&count, 4, "count");
  if (dim == 0) throw NpreFormatError("NPRE header declares dimension 0");

  std::map<std::string, EmbeddingVector> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t id_len = 0;
    read_bytes(&id_len, 2, "id length");
    if (id_len == 0) throw NpreFormatError("empty id in NPRE record " + std::to_string(i));
    std::string id(id_len, '\0');
    read_bytes(id.data(), id_len, "id");
    EmbeddingVector vec;
    vec.values.resize(dim);
    read_bytes(vec.values.data(), static_cast<std::size_t>(dim) * sizeof(float), "vector data");
    for (float v : vec.values) {
      if (!std::isfinite(v)) {
        throw NpreValueError("non-finite value in embedding \"" + id + "\"");
      }
    }
    if (vec.norm() == 0.0) throw NpreValueError("zero-length embedding \"" + id + "\"");
    vec.normalize();
    if (!out.emplace(id, std::move(vec)).second) {
      throw NpreFormatError("duplicate id \"" + id + "\" in NPRE file");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trainable linear projection head.
// ---------------------------------------------------------------------------

struct ProjectionHead {
  Mat weights;  // out_dim x in_dim

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }

  /// normalize(W * descriptor), as float32.
  EmbeddingVector apply(const EmbeddingVector& descriptor) const {
    if (descriptor.dim() != weights.cols) {
      throw Error("projection head expects dim " + std::to_string(weights.cols) + ", got " +
                  std::to_string(descriptor.dim()));
    }
    std::vector<double> z(weights.rows, 0.0);
    for (std::size_t r = 0; r < weights.rows; ++r) {
      const auto wr = weights.row(r);
      double s = 0.0;
      for (std::size_t c = 0; c < weights.cols; ++c) s += wr[c] * descriptor.values[c];
      z[r] = s;
    }
    double n = 0.0;
    for (double v : z) n += v * v;
    n = std::sqrt(n);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error("projection produced a degenerate embedding");
    }
    EmbeddingVector out;
    out.values.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out.values[i] = static_cast<float>(z[i] / n);
    return out;
  }
};

enum class LossKind { Triplet, Lmcl };
enum class NegativeStrategy { Random, HardestInBatch };

inline constexpr double kFineTuneLearningRate = 1e-6;  // fine-tuning convention
inline constexpr double kFreshTrainLearningRate = 1e-2;

struct TrainConfig {
  LossKind loss = LossKind::Triplet;
  double margin = 0.1;              // triplet margin
  LmclConfig lmcl{30.0, 0.2};       // lmcl scale / margin
  double learning_rate = kFreshTrainLearningRate;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 42;
  NegativeStrategy negative_strategy = NegativeStrategy::Random;
  std::size_t out_dim = 64;
  double grad_clip_norm = 10.0;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw DomainError("learning_rate must be >= 0");
    if (epochs < 1) throw DomainError("epochs must be >= 1");
    if (batch_size < 1) throw DomainError("batch_size must be >= 1");
    if (out_dim < 1) throw DomainError("out_dim must be >= 1");
    if (loss == LossKind::Triplet && margin < 0.0) throw DomainError("margin must be >= 0");
    if (loss == LossKind::Lmcl) lmcl.validate();
  }
};

struct TrainResult {
  ProjectionHead head;
  Mat class_weights;                  // LMCL only: raw C x out_dim parameters
  std::vector<double> epoch_mean_loss;
};

namespace detail {

inline Mat seeded_gaussian(std::size_t rows, std::size_t cols, std::uint64_t key) {
  Mat m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    m.data[i] = scale * gaussian_from_counter(hash_mix(key, i));
  }
  return m;
}

inline void clip_to_norm(std::vector<double>& g, double max_norm) {
  double n = 0.0;
  for (double v : g) n += v * v;
  n = std::sqrt(n);
  if (n > max_norm && n > 0.0) {
    const double s = max_norm / n;
    for (auto& v : g) v *= s;
  }
}

/// d(loss)/d(pre-normalized z) given gradient g w.r.t. x = z / |z|.
inline void chain_through_normalization(std::span<const double> g, std::span<const double> x,
                                        double z_norm, std::span<double> out) {
  const double gx = dot(g, x);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = (g[i] - gx * x[i]) / z_norm;
}

struct DescriptorTable {
  Mat rows;                                   // n x in_dim, double
  std::map<std::string, std::size_t> index;   // id -> row
};

inline DescriptorTable make_table(const std::map<std::string, EmbeddingVector>& descriptors) {
  if (descriptors.empty()) throw Error("train_projection: no descriptors");
  DescriptorTable t;
  const std::size_t dim = descriptors.begin()->second.dim();
  t.rows = Mat(descriptors.size(), dim);
  std::size_t r = 0;
  for (const auto& [id, vec] : descriptors) {
    if (vec.dim() != dim) throw Error("descriptor \"" + id + "\" has mismatched dim");
    for (std::size_t c = 0; c < dim; ++c) t.rows(r, c) = vec.values[c];
    t.index[id] = r;
    ++r;
  }
  return t;
}

struct Projected {
  std::vector<double> x;  // normalized embedding
  double z_norm = 0.0;
};

inline Projected project(const Mat& w, std::span<const double> u) {
  Projected p;
  p.x.resize(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) p.x[r] = dot(w.row(r), u);
  p.z_norm = l2_norm(p.x);
  if (!(p.z_norm > 0.0) || !std::isfinite(p.z_norm)) {
    throw Error("training produced a degenerate projection; check inputs and learning rate");
  }
  for (auto& v : p.x) v /= p.z_norm;
  return p;
}

/// Accumulate dL/dW from dL/dx (gradient w.r.t. the normalized embedding).
inline void accumulate_head_gradient(const Projected& p, std::span<const double> g_x,
                                     std::span<const double> u, Mat& g_w) {
  std::vector<double> g_z(p.x.size());
  chain_through_normalization(g_x, p.x, p.z_norm, g_z);
  for (std::size_t r = 0; r < g_w.rows; ++r) {
    const double gz = g_z[r];
    if (gz == 0.0) continue;
    auto row = g_w.row(r);
    for (std::size_t c = 0; c < g_w.cols; ++c) row[c] += gz * u[c];
  }
}

}  // namespace detail

/// Train a projection head with the triplet pipeline. Plain SGD, hinge
/// gradients, deterministic for a fixed config and seed. Passing
/// `warm_start` fine-tunes an existing head instead of training from a
/// seeded random init (the night-specialization recipe: start from the day
/// model, continue on night-augmented data).
inline TrainResult train_projection(const std::map<std::string, EmbeddingVector>& descriptors,
                                    const std::vector<Triplet>& triplets, const TrainConfig& cfg,
                                    const ProjectionHead* warm_start = nullptr) {
  cfg.validate();
  if (cfg.loss != LossKind::Triplet) {
    throw Error("triplet supervision requires LossKind::Triplet");
  }
  if (triplets.empty()) throw Error("train_projection: empty supervision");
  const auto table = detail::make_table(descriptors);
  for (const auto& t : triplets) {
    for (const auto* id : {&t.anchor_id, &t.positive_id, &t.negative_id}) {
      if (!table.index.count(*id)) {
        throw Error("triplet references unknown descriptor \"" + *id + "\"");
      }
    }
  }

  TrainResult result;
  if (warm_start) {
    if (warm_start->out_dim() != cfg.out_dim || warm_start->in_dim() != table.rows.cols) {
      throw Error("warm-start head dimensions do not match the training configuration");
    }
    result.head = *warm_start;
  } else {
    result.head.weights = detail::seeded_gaussian(cfg.out_dim, table.rows.cols,
                                                  hash_mix(cfg.seed, 0x57a27 /*init*/));
  }
  Mat& w = result.head.weights;

  std::vector<std::size_t> order(triplets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(hash_mix(cfg.seed, 0x0d3e, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);

      // Resolve the negative per triplet; HardestInBatch re-ranks the
      // negatives mined for the same anchor by current embedding distance.
      std::vector<std::size_t> negative_of(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        negative_of[k - begin] = table.index.at(triplets[order[k]].negative_id);
      }
      if (cfg.negative_strategy == NegativeStrategy::HardestInBatch) {
        std::map<std::string, std::vector<std::size_t>> by_anchor;
        for (std::size_t k = begin; k < end; ++k) {
          by_anchor[triplets[order[k]].anchor_id].push_back(k - begin);
        }
        for (const auto& [anchor_id, members] : by_anchor) {
          if (members.size() < 2) continue;
          const auto fa = detail::project(w, table.rows.row(table.index.at(anchor_id)));
          double best_d2 = std::numeric_limits<double>::infinity();
          std::size_t best = negative_of[members[0]];
          for (std::size_t k : members) {
            const auto fn = detail::project(w, table.rows.row(negative_of[k]));
            const double d2 = squared_distance(fa.x, fn.x);
            if (d2 < best_d2) {
              best_d2 = d2;
              best = negative_of[k];
            }
          }
          for (std::size_t k : members) negative_of[k] = best;
        }
      }

      Mat g_w(w.rows, w.cols);
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const Triplet& t = triplets[order[k]];
        const auto ua = table.rows.row(table.index.at(t.anchor_id));
        const auto up = table.rows.row(table.index.at(t.positive_id));
        const auto un = table.rows.row(negative_of[k - begin]);
        const auto pa = detail::project(w, ua);
        const auto pp = detail::project(w, up);
        const auto pn = detail::project(w, un);
        const LossValue lv = triplet_loss(pa.x, pp.x, pn.x, cfg.margin);
        batch_loss += lv.value;
        detail::accumulate_head_gradient(pa, lv.gradients.at("fq"), ua, g_w);
        detail::accumulate_head_gradient(pp, lv.gradients.at("fp"), up, g_w);
        detail::accumulate_head_gradient(pn, lv.gradients.at("fn"), un, g_w);
      }
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      for (auto& v : g_w.data) v *= inv_batch;
      detail::clip_to_norm(g_w.data, cfg.grad_clip_norm);
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        w.data[i] -= cfg.learning_rate * g_w.data[i];
      }
      epoch_loss += batch_loss;
      epoch_count += end - begin;
      if (!std::isfinite(batch_loss)) {
        throw Error("non-finite training loss at epoch " + std::to_string(epoch));
      }
    }
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(epoch_count));
  }
  return result;
}

/// Train a projection head plus class weights with the classification
/// pipeline (LMCL over geographic classes). `warm_start` fine-tunes an
/// existing head; its class weights are reused when the class count and
/// head dimensions match, otherwise re-seeded.
inline TrainResult train_projection(const std::map<std::string, EmbeddingVector>& descriptors,
                                    const std::vector<GeoClass>& classes, const TrainConfig& cfg,
                                    const TrainResult* warm_start = nullptr) {
  cfg.validate();
  if (cfg.loss != LossKind::Lmcl) throw Error("class supervision requires LossKind::Lmcl");
  if (classes.empty()) throw Error("train_projection: empty supervision");
  const auto table = detail::make_table(descriptors);

  std::vector<std::pair<std::size_t, int>> samples;  // (descriptor row, class id)
  for (std::size_t cls = 0; cls < classes.size(); ++cls) {
    for (const auto& id : classes[cls].member_ids) {
      auto it = table.index.find(id);
      if (it == table.index.end()) {
        throw Error("class member references unknown descriptor \"" + id + "\"");
      }
      samples.emplace_back(it->second, static_cast<int>(cls));
    }
  }
  if (samples.empty()) throw Error("train_projection: classes have no members");

  TrainResult result;
  if (warm_start) {
    if (warm_start->head.out_dim() != cfg.out_dim ||
        warm_start->head.in_dim() != table.rows.cols) {
      throw Error("warm-start head dimensions do not match the training configuration");
    }
    result.head = warm_start->head;
  } else {
    result.head.weights = detail::seeded_gaussian(cfg.out_dim, table.rows.cols,
                                                  hash_mix(cfg.seed, 0x57a27 /*init*/));
  }
  if (warm_start && warm_start->class_weights.rows == classes.size() &&
      warm_start->class_weights.cols == cfg.out_dim) {
    result.class_weights = warm_start->class_weights;
  } else {
    result.class_weights = detail::seeded_gaussian(classes.size(), cfg.out_dim,
                                                   hash_mix(cfg.seed, 0xc1a55 /*classes*/));
  }
  Mat& w = result.head.weights;
  Mat& v = result.class_weights;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(hash_mix(cfg.seed, 0x0d3e, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::size_t b = end - begin;

      // Normalized class weight rows for this step.
      Mat wn(v.rows, v.cols);
      std::vector<double> v_norms(v.rows);
      for (std::size_t j = 0; j < v.rows; ++j) {
        const double n = l2_norm(v.row(j));
        if (!(n > 0.0)) throw Error("degenerate class weight row");
        v_norms[j] = n;
        for (std::size_t c = 0; c < v.cols; ++c) wn(j, c) = v(j, c) / n;
      }

      Mat x(b, cfg.out_dim);
      std::vector<detail::Projected> projected(b);
      std::vector<int> labels(b);
      for (std::size_t k = 0; k < b; ++k) {
        const auto [row, cls] = samples[order[begin + k]];
        projected[k] = detail::project(w, table.rows.row(row));
        for (std::size_t c = 0; c < cfg.out_dim; ++c) x(k, c) = projected[k].x[c];
        labels[k] = cls;
      }

      const LossValue lv = lmcl_loss(x, labels, wn, cfg.lmcl);
      if (!std::isfinite(lv.value)) {
        throw Error("non-finite training loss at epoch " + std::to_string(epoch));
      }

      // Head gradient through the embedding normalization.
      Mat g_w(w.rows, w.cols);
      const auto& g_x = lv.gradients.at("embeddings");
      for (std::size_t k = 0; k < b; ++k) {
        const auto [row, cls] = samples[order[begin + k]];
        (void)cls;
        std::span<const double> gk(g_x.data() + k * cfg.out_dim, cfg.out_dim);
        detail::accumulate_head_gradient(projected[k], gk, table.rows.row(row), g_w);
      }

      // Class weight gradient through the row normalization.
      Mat g_v(v.rows, v.cols);
      const auto& g_wn = lv.gradients.at("weights");
      for (std::size_t j = 0; j < v.rows; ++j) {
        std::span<const double> gj(g_wn.data() + j * v.cols, v.cols);
        detail::chain_through_normalization(gj, wn.row(j), v_norms[j], g_v.row(j));
      }

      detail::clip_to_norm(g_w.data, cfg.grad_clip_norm);
      detail::clip_to_norm(g_v.data, cfg.grad_clip_norm);
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        w.data[i] -= cfg.learning_rate * g_w.data[i];
      }
      for (std::size_t i = 0; i < v.data.size(); ++i) {
        v.data[i] -= cfg.learning_rate * g_v.data[i];
      }
      epoch_loss += lv.value * static_cast<double>(b);
      epoch_count += b;
    }
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(epoch_count));
  }
  return result;
}

/// Apply a head to every descriptor.
inline std::map<std::string, EmbeddingVector> embed_all(
    const std::map<std::string, EmbeddingVector>& descriptors, const ProjectionHead& head) {
  std::map<std::string, EmbeddingVector> out;
  for (const auto& [id, vec] : descriptors) out.emplace(id, head.apply(vec));
  return out;
}

}  // namespace npr
