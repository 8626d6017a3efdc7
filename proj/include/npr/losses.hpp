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
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "npr/error.hpp"
#include "npr/matrix.hpp"

namespace npr {

/// Value of a loss together with its analytic gradients. Gradient arrays are
/// stored flat; matrix-shaped inputs use row-major order matching the input.
struct LossValue {
  double value = 0.0;
  std::map<std::string, std::vector<double>> gradients;
};

struct LmclConfig {
  double s = 30.0;  // cosine scale, > 0
  double m = 0.2;   // additive margin, [0, 1)

  void validate() const {
    if (!(s > 0.0)) throw DomainError("LMCL scale s must be positive");
    if (!(m >= 0.0 && m < 1.0)) throw DomainError("LMCL margin m must lie in [0, 1)");
  }
};

/// Hinge triplet loss max(|fq-fp|^2 - |fq-fn|^2 + margin, 0) with gradients
/// for all three embeddings. The subgradient at the hinge kink is zero.
inline LossValue triplet_loss(std::span<const double> fq, std::span<const double> fp,
                              std::span<const double> fn_, double margin) {
  if (fq.size() != fp.size() || fq.size() != fn_.size()) {
    throw Error("triplet_loss: embedding dimensions differ");
  }
  if (margin < 0.0) throw DomainError("triplet_loss: margin must be >= 0");

  const double arg = squared_distance(fq, fp) - squared_distance(fq, fn_) + margin;
  LossValue out;
  std::vector<double> gq(fq.size(), 0.0), gp(fq.size(), 0.0), gn(fq.size(), 0.0);
  if (arg > 0.0) {
    out.value = arg;
    for (std::size_t i = 0; i < fq.size(); ++i) {
      gq[i] = 2.0 * (fn_[i] - fp[i]);
      gp[i] = -2.0 * (fq[i] - fp[i]);
      gn[i] = 2.0 * (fq[i] - fn_[i]);
    }
  }
  out.gradients["fq"] = std::move(gq);
  out.gradients["fp"] = std::move(gp);
  out.gradients["fn"] = std::move(gn);
  return out;
}

namespace detail {

/// LMCL on raw inputs: cos(theta_j,i) is taken as the plain dot product
/// W_j . x_i, exactly the quantity the checked wrapper's precondition makes
/// a cosine. Kept separate so gradient checks can perturb coordinates
/// without tripping the normalization guard.
inline LossValue lmcl_raw(const Mat& embeddings, std::span<const int> labels, const Mat& weights,
                          const LmclConfig& cfg) {
  const std::size_t n = embeddings.rows;
  const std::size_t classes = weights.rows;
  LossValue out;
  std::vector<double> g_emb(embeddings.data.size(), 0.0);
  std::vector<double> g_w(weights.data.size(), 0.0);

  std::vector<double> logits(classes);
  std::vector<double> probs(classes);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = embeddings.row(i);
    const auto yi = static_cast<std::size_t>(labels[i]);
    for (std::size_t j = 0; j < classes; ++j) {
      const double cos_ji = dot(weights.row(j), x);
      logits[j] = cfg.s * (j == yi ? cos_ji - cfg.m : cos_ji);
    }
    double max_logit = logits[0];
    for (std::size_t j = 1; j < classes; ++j) max_logit = std::max(max_logit, logits[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      probs[j] = std::exp(logits[j] - max_logit);
      z += probs[j];
    }
    for (std::size_t j = 0; j < classes; ++j) probs[j] /= z;
    out.value += -(logits[yi] - max_logit - std::log(z));

    for (std::size_t j = 0; j < classes; ++j) {
      const double coeff = cfg.s * (probs[j] - (j == yi ? 1.0 : 0.0)) / static_cast<double>(n);
      const auto w = weights.row(j);
      for (std::size_t d = 0; d < embeddings.cols; ++d) {
        g_emb[i * embeddings.cols + d] += coeff * w[d];
        g_w[j * weights.cols + d] += coeff * x[d];
      }
    }
  }
  out.value /= static_cast<double>(n);
  out.gradients["embeddings"] = std::move(g_emb);
  out.gradients["weights"] = std::move(g_w);
  return out;
}

}  // namespace detail

/// Large Margin Cosine Loss over a batch. Rows of `embeddings` (N x d) and
/// `weights` (C x d) must be unit length within 1e-5; labels index rows of
/// `weights`. Gradients are with respect to the (normalized) inputs as free
/// variables; chaining through a normalization layer is the caller's job.
inline LossValue lmcl_loss(const Mat& embeddings, std::span<const int> labels, const Mat& weights,
                           const LmclConfig& cfg) {
  cfg.validate();
  if (embeddings.rows == 0 || weights.rows == 0) throw Error("lmcl_loss: empty batch");
  if (embeddings.cols != weights.cols) throw Error("lmcl_loss: dimension mismatch");
  if (labels.size() != embeddings.rows) throw Error("lmcl_loss: one label per embedding required");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= weights.rows) {
      throw Error("lmcl_loss: label out of range at row " + std::to_string(i));
    }
  }
  constexpr double kNormTol = 1e-5;
  for (std::size_t i = 0; i < embeddings.rows; ++i) {
    if (std::abs(l2_norm(embeddings.row(i)) - 1.0) > kNormTol) {
      throw Error("lmcl_loss: embedding row " + std::to_string(i) + " is not unit length");
    }
  }
  for (std::size_t j = 0; j < weights.rows; ++j) {
    if (std::abs(l2_norm(weights.row(j)) - 1.0) > kNormTol) {
      throw Error("lmcl_loss: weight row " + std::to_string(j) + " is not unit length");
    }
  }
  return detail::lmcl_raw(embeddings, labels, weights, cfg);
}

/// Discriminator objective mean(log d_real) + mean(log(1 - d_fake)).
/// Scores must lie strictly inside (0, 1).
inline LossValue adversarial_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty() || d_fake.empty()) throw Error("adversarial_loss: empty score array");
  for (double v : d_real) {
    if (!(v > 0.0 && v < 1.0)) throw DomainError("adversarial_loss: real score outside (0, 1)");
  }
  for (double v : d_fake) {
    if (!(v > 0.0 && v < 1.0)) throw DomainError("adversarial_loss: fake score outside (0, 1)");
  }
  LossValue out;
  std::vector<double> g_real(d_real.size()), g_fake(d_fake.size());
  const double nr = static_cast<double>(d_real.size());
  const double nf = static_cast<double>(d_fake.size());
  double sum_real = 0.0, sum_fake = 0.0;
  for (std::size_t i = 0; i < d_real.size(); ++i) {
    sum_real += std::log(d_real[i]);
    g_real[i] = 1.0 / (nr * d_real[i]);
  }
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    sum_fake += std::log(1.0 - d_fake[i]);
    g_fake[i] = -1.0 / (nf * (1.0 - d_fake[i]));
  }
  out.value = sum_real / nr + sum_fake / nf;
  out.gradients["d_real"] = std::move(g_real);
  out.gradients["d_fake"] = std::move(g_fake);
  return out;
}

/// Patch-level InfoNCE: cross-entropy of the positive among the positive and
/// K negatives, logits = similarity / temperature. Features are expected
/// unit length so dot products are cosines. Gradients cover the query, the
/// positive, and every negative (row-major in "negatives").
inline LossValue patch_nce_loss(std::span<const double> query, std::span<const double> positive,
                                const Mat& negatives, double temperature) {
  if (negatives.rows == 0) throw Error("patch_nce_loss: at least one negative required");
  if (query.size() != positive.size() || query.size() != negatives.cols) {
    throw Error("patch_nce_loss: feature dimensions differ");
  }
  if (!(temperature > 0.0)) throw DomainError("patch_nce_loss: temperature must be positive");

  const std::size_t k = negatives.rows;
  const std::size_t d = query.size();
  std::vector<double> logits(k + 1);
  logits[0] = dot(query, positive) / temperature;
  for (std::size_t j = 0; j < k; ++j) logits[j + 1] = dot(query, negatives.row(j)) / temperature;

  double max_logit = logits[0];
  for (double l : logits) max_logit = std::max(max_logit, l);
  double z = 0.0;
  std::vector<double> probs(k + 1);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    probs[j] = std::exp(logits[j] - max_logit);
    z += probs[j];
  }
  for (auto& p : probs) p /= z;

  LossValue out;
  out.value = -(logits[0] - max_logit - std::log(z));
  std::vector<double> g_q(d, 0.0), g_p(d, 0.0), g_n(k * d, 0.0);
  const double c0 = (probs[0] - 1.0) / temperature;
  for (std::size_t i = 0; i < d; ++i) {
    g_q[i] = c0 * positive[i];
    g_p[i] = c0 * query[i];
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double cj = probs[j + 1] / temperature;
    const auto nj = negatives.row(j);
    for (std::size_t i = 0; i < d; ++i) {
      g_q[i] += cj * nj[i];
      g_n[j * d + i] = cj * query[i];
    }
  }
  out.gradients["query"] = std::move(g_q);
  out.gradients["positive"] = std::move(g_p);
  out.gradients["negatives"] = std::move(g_n);
  return out;
}

inline constexpr double kDefaultNceTemperature = 0.07;

}  // namespace npr
