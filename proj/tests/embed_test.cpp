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

#include "npr/embed.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "support/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

double cosine(const npr::EmbeddingVector& a, const npr::EmbeddingVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    s += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Descriptor.
// ---------------------------------------------------------------------------

TEST(BaselineDescriptor, DeterministicUnitNorm320) {
  const npr::Image img = synth::render_scene(5, 48, {});
  const auto a = npr::baseline_descriptor(img);
  const auto b = npr::baseline_descriptor(img);
  EXPECT_EQ(a.dim(), npr::kBaselineDescriptorDim);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NEAR(a.norm(), 1.0, 1e-5);
}

TEST(BaselineDescriptor, BlackVsWhiteAreDistinguishable) {
  npr::Image black(32, 32), white(32, 32);
  std::fill(white.rgb.begin(), white.rgb.end(), 255);
  const auto db = npr::baseline_descriptor(black);
  const auto dw = npr::baseline_descriptor(white);
  EXPECT_NEAR(db.norm(), 1.0, 1e-5);  // constant image still yields a valid vector
  EXPECT_NEAR(dw.norm(), 1.0, 1e-5);
  EXPECT_LT(cosine(db, dw), 0.9);
}

TEST(BaselineDescriptor, NightCopyIsLessSimilarThanSelf) {
  const npr::Image img = synth::render_scene(9, 48, {});
  npr::NightParams params;
  params.seed = 4;
  const npr::Image night = npr::night_transform(img, params);
  const auto d_day = npr::baseline_descriptor(img);
  const auto d_night = npr::baseline_descriptor(night);
  EXPECT_LT(cosine(d_day, d_night), cosine(d_day, d_day));
  EXPECT_NEAR(cosine(d_day, d_day), 1.0, 1e-5);
}

// ---------------------------------------------------------------------------
// NPRE file format.
// ---------------------------------------------------------------------------

class NpreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("npr_npre_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::map<std::string, npr::EmbeddingVector> three_vectors() {
  std::map<std::string, npr::EmbeddingVector> m;
  std::mt19937_64 rng(123);
  for (const char* id : {"a", "bb", "ccc"}) {
    npr::EmbeddingVector v;
    v.values.resize(8);
    for (auto& x : v.values) {
      x = static_cast<float>(std::uniform_real_distribution<double>(-1, 1)(rng));
    }
    v.normalize();
    m.emplace(id, std::move(v));
  }
  return m;
}

TEST_F(NpreTest, WriteThenReadIsIdentity) {
  const auto vectors = three_vectors();
  const fs::path path = dir_ / "vectors.npre";
  npr::write_npre(path, vectors);
  const auto loaded = npr::read_npre(path);
  ASSERT_EQ(loaded.size(), vectors.size());
  for (const auto& [id, vec] : vectors) {
    ASSERT_TRUE(loaded.count(id));
    EXPECT_EQ(loaded.at(id).values, vec.values) << id;  // bit-exact float32 round-trip
  }
}

TEST_F(NpreTest, TruncatedFileReportsByteOffset) {
  const auto vectors = three_vectors();
  const fs::path path = dir_ / "vectors.npre";
  npr::write_npre(path, vectors);
  // Chop the payload mid-vector.
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 7);
  try {
    npr::read_npre(path);
    FAIL() << "expected NpreTruncatedError";
  } catch (const npr::NpreTruncatedError& e) {
    EXPECT_GT(e.offset(), 0u);
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
}

TEST_F(NpreTest, DistinctErrorsForMagicHeaderAndValues) {
  const fs::path bad_magic = dir_ / "magic.npre";
  {
    std::ofstream out(bad_magic, std::ios::binary);
    out << "NOPE" << std::string(16, '\0');
  }
  EXPECT_THROW(npr::read_npre(bad_magic), npr::NpreMagicError);

  // dim = 0 header.
  const fs::path zero_dim = dir_ / "zerodim.npre";
  {
    std::ofstream out(zero_dim, std::ios::binary);
    out << "NPRE";
    const std::uint8_t version = 1;
    const std::uint32_t dim = 0, count = 0;
    out.write(reinterpret_cast<const char*>(&version), 1);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
  }
  EXPECT_THROW(npr::read_npre(zero_dim), npr::NpreFormatError);

  // Non-finite payload.
  const fs::path nan_file = dir_ / "nan.npre";
  {
    std::ofstream out(nan_file, std::ios::binary);
    out << "NPRE";
    const std::uint8_t version = 1;
    const std::uint32_t dim = 2, count = 1;
    const std::uint16_t id_len = 1;
    const float values[2] = {std::numeric_limits<float>::quiet_NaN(), 1.0f};
    out.write(reinterpret_cast<const char*>(&version), 1);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
    out.write(reinterpret_cast<const char*>(&id_len), 2);
    out << 'x';
    out.write(reinterpret_cast<const char*>(values), sizeof values);
  }
  EXPECT_THROW(npr::read_npre(nan_file), npr::NpreValueError);
}

TEST_F(NpreTest, UnnormalizedVectorsAreNormalizedOnLoad) {
  const fs::path path = dir_ / "raw.npre";
  std::map<std::string, npr::EmbeddingVector> m;
  npr::EmbeddingVector v;
  v.values = {3.0f, 4.0f};
  m.emplace("long", v);
  npr::write_npre(path, m);
  const auto loaded = npr::read_npre(path);
  EXPECT_NEAR(loaded.at("long").norm(), 1.0, 1e-6);
  EXPECT_NEAR(loaded.at("long").values[0], 0.6f, 1e-6);
}

// ---------------------------------------------------------------------------
// Projection training.
// ---------------------------------------------------------------------------

std::map<std::string, npr::EmbeddingVector> toy_descriptors(int per_class, double separation,
                                                            std::uint64_t seed) {
  // Two clusters in 12-d, linearly separable when `separation` is large.
  std::map<std::string, npr::EmbeddingVector> out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.28);
  for (int cls = 0; cls < 2; ++cls) {
    for (int i = 0; i < per_class; ++i) {
      npr::EmbeddingVector v;
      v.values.resize(12);
      for (std::size_t d = 0; d < v.values.size(); ++d) {
        double base = noise(rng);
        if (d == 0) base += (cls == 0 ? separation : -separation);
        if (d == 1) base += (cls == 0 ? 0.3 : -0.1);
        v.values[d] = static_cast<float>(base);
      }
      v.normalize();
      char id[32];
      std::snprintf(id, sizeof id, "c%d_%02d", cls, i);
      out.emplace(id, std::move(v));
    }
  }
  return out;
}

std::vector<npr::GeoClass> toy_classes(const std::map<std::string, npr::EmbeddingVector>& desc) {
  npr::GeoClass c0{0, 0, 0, {}}, c1{1, 0, 0, {}};
  for (const auto& [id, vec] : desc) {
    (id[1] == '0' ? c0 : c1).member_ids.push_back(id);
  }
  return {c0, c1};
}

/// Direct perceptron check that the toy set is linearly separable.
bool perceptron_separable(const std::map<std::string, npr::EmbeddingVector>& desc) {
  std::vector<std::pair<std::vector<double>, int>> data;
  for (const auto& [id, vec] : desc) {
    std::vector<double> x(vec.values.begin(), vec.values.end());
    x.push_back(1.0);  // bias
    data.emplace_back(std::move(x), id[1] == '0' ? 1 : -1);
  }
  std::vector<double> w(data[0].first.size(), 0.0);
  for (int epoch = 0; epoch < 500; ++epoch) {
    int mistakes = 0;
    for (const auto& [x, y] : data) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
      if (s * y <= 0) {
        ++mistakes;
        for (std::size_t i = 0; i < x.size(); ++i) w[i] += y * x[i];
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

TEST(TrainProjection, ZeroLearningRateLeavesWeightsUnchanged) {
  const auto desc = toy_descriptors(6, 1.0, 1);
  std::vector<npr::Triplet> triplets{{"c0_00", "c0_01", "c1_00"}, {"c1_01", "c1_02", "c0_02"}};
  npr::TrainConfig cfg;
  cfg.loss = npr::LossKind::Triplet;
  cfg.learning_rate = 0.0;
  cfg.epochs = 5;
  cfg.out_dim = 8;
  const auto r1 = npr::train_projection(desc, triplets, cfg);
  cfg.epochs = 1;
  const auto r2 = npr::train_projection(desc, triplets, cfg);
  EXPECT_EQ(r1.head.weights.data, r2.head.weights.data);  // both equal the init
}

TEST(TrainProjection, SatisfiedTripletsProduceNoUpdate) {
  // margin 0 and anchor == positive: hinge argument is -|fq-fn|^2 < 0.
  const auto desc = toy_descriptors(4, 1.0, 2);
  std::vector<npr::Triplet> triplets{{"c0_00", "c0_00", "c1_00"}};
  npr::TrainConfig cfg;
  cfg.loss = npr::LossKind::Triplet;
  cfg.margin = 0.0;
  cfg.learning_rate = 0.5;
  cfg.epochs = 3;
  cfg.out_dim = 8;
  const auto trained = npr::train_projection(desc, triplets, cfg);
  cfg.learning_rate = 0.0;
  const auto frozen = npr::train_projection(desc, triplets, cfg);
  EXPECT_EQ(trained.head.weights.data, frozen.head.weights.data);
  for (double loss : trained.epoch_mean_loss) EXPECT_EQ(loss, 0.0);
}

TEST(TrainProjection, DeterministicForFixedSeed) {
  const auto desc = toy_descriptors(8, 0.8, 3);
  const auto classes = toy_classes(desc);
  npr::TrainConfig cfg;
  cfg.loss = npr::LossKind::Lmcl;
  cfg.lmcl = {12.0, 0.1};
  cfg.epochs = 8;
  cfg.out_dim = 6;
  cfg.seed = 77;
  const auto a = npr::train_projection(desc, classes, cfg);
  const auto b = npr::train_projection(desc, classes, cfg);
  EXPECT_EQ(a.head.weights.data, b.head.weights.data);
  EXPECT_EQ(a.class_weights.data, b.class_weights.data);
  EXPECT_EQ(a.epoch_mean_loss, b.epoch_mean_loss);
}

TEST(TrainProjection, LmclSeparableToyReachesPerfectTrainAccuracy) {
  const auto desc = toy_descriptors(12, 1.2, 4);
  ASSERT_TRUE(perceptron_separable(desc)) << "toy set must be separable by construction";
  const auto classes = toy_classes(desc);

  npr::TrainConfig cfg;
  cfg.loss = npr::LossKind::Lmcl;
  cfg.lmcl = {30.0, 0.2};
  cfg.learning_rate = 0.05;
  cfg.epochs = 200;
  cfg.batch_size = 8;
  cfg.out_dim = 6;
  const auto trained = npr::train_projection(desc, classes, cfg);

  // Top-1 accuracy: nearest (max cosine) normalized class weight row.
  int correct = 0, total = 0;
  npr::Mat wn = trained.class_weights;
  for (std::size_t j = 0; j < wn.rows; ++j) {
    const double n = npr::l2_norm(wn.row(j));
    for (std::size_t c = 0; c < wn.cols; ++c) wn(j, c) /= n;
  }
  for (std::size_t cls = 0; cls < classes.size(); ++cls) {
    for (const auto& id : classes[cls].member_ids) {
      const auto emb = trained.head.apply(desc.at(id));
      double best = -2.0;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < wn.rows; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < wn.cols; ++c) s += wn(j, c) * emb.values[c];
        if (s > best) {
          best = s;
          best_j = j;
        }
      }
      correct += best_j == cls;
      ++total;
    }
  }
  EXPECT_EQ(correct, total);

  // Epoch-mean loss is non-increasing up to 5% jitter.
  const auto& history = trained.epoch_mean_loss;
  for (std::size_t e = 1; e < history.size(); ++e) {
    EXPECT_LE(history[e], history[e - 1] * 1.05 + 1e-12) << "epoch " << e;
  }
  EXPECT_LT(history.back(), history.front());
}

TEST(TrainProjection, OutputEmbeddingsUnitNormAndRankEquivalent) {
  const auto desc = toy_descriptors(6, 0.9, 5);
  std::vector<npr::Triplet> triplets;
  for (int i = 0; i < 5; ++i) {
    char a[16], p[16], n[16];
    std::snprintf(a, sizeof a, "c0_%02d", i);
    std::snprintf(p, sizeof p, "c0_%02d", i + 1);
    std::snprintf(n, sizeof n, "c1_%02d", i);
    triplets.push_back({a, p, n});
  }
  npr::TrainConfig cfg;
  cfg.loss = npr::LossKind::Triplet;
  cfg.epochs = 10;
  cfg.out_dim = 8;
  const auto trained = npr::train_projection(desc, triplets, cfg);
  const auto embedded = npr::embed_all(desc, trained.head);

  // Unit norms; and cosine ranking == Euclidean ranking on the unit sphere.
  const auto& probe = embedded.begin()->second;
  std::vector<std::pair<double, std::string>> by_cos, by_euclid;
  for (const auto& [id, vec] : embedded) {
    EXPECT_NEAR(vec.norm(), 1.0, 1e-5) << id;
    double cos = 0.0, dist2 = 0.0;
    for (std::size_t i = 0; i < vec.dim(); ++i) {
      cos += static_cast<double>(probe.values[i]) * vec.values[i];
      const double d = static_cast<double>(probe.values[i]) - vec.values[i];
      dist2 += d * d;
    }
    by_cos.emplace_back(-cos, id);
    by_euclid.emplace_back(dist2, id);
  }
  std::sort(by_cos.begin(), by_cos.end());
  std::sort(by_euclid.begin(), by_euclid.end());
  for (std::size_t i = 0; i < by_cos.size(); ++i) {
    EXPECT_EQ(by_cos[i].second, by_euclid[i].second) << "rank " << i;
  }
}

TEST(TrainProjection, RejectsBadSupervision) {
  const auto desc = toy_descriptors(3, 1.0, 6);
  npr::TrainConfig cfg;
  cfg.loss = npr::LossKind::Triplet;
  EXPECT_THROW(npr::train_projection(desc, std::vector<npr::Triplet>{}, cfg), npr::Error);
  EXPECT_THROW(npr::train_projection(desc, std::vector<npr::Triplet>{{"missing", "c0_00", "c1_00"}}, cfg),
               npr::Error);
  cfg.loss = npr::LossKind::Lmcl;
  EXPECT_THROW(npr::train_projection(desc, std::vector<npr::GeoClass>{}, cfg), npr::Error);
}

}  // namespace
