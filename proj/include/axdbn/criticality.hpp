// Copyright (c) 2026 AXDBN Authors. All Rights Reserved.
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

#ifndef AXDBN_CRITICALITY_HPP_
#define AXDBN_CRITICALITY_HPP_

#include <algorithm>
#include <numeric>
#include <vector>

#include "axdbn/dataio.hpp"
#include "axdbn/inference.hpp"
#include "axdbn/model.hpp"

namespace axdbn {

enum class CriticalityMetric { kCrossEntropy, kRandom };

/// Per-neuron criticality scores (layer-mean normalized mean absolute
/// cross-entropy gradients) plus the least-to-most-critical ordering over
/// the flat layer-major neuron numbering.
struct CriticalityRanking {
  std::vector<double> scores;  // one per hidden neuron, flat layer-major
  std::vector<int> order;      // ascending criticality; ties by flat index
  CriticalityMetric metric = CriticalityMetric::kCrossEntropy;
};

inline constexpr double kProbFloor = 1e-12;  // guards ln(a_c) at a_c = 0

/// Cross-entropy loss of a mean-field forward pass against a one-hot label.
inline double cross_entropy_loss(const LayerActivations& acts, int label) {
  return -std::log(std::max(acts.class_probs[label], kProbFloor));
}

/// dL/dh^L: the softmax cross-entropy gradient through the class layer,
/// sum_c (a^c_c - y_c) Wc[c][j].
inline VectorXd output_layer_sensitivity(const DdbnModel& m,
                                         const LayerActivations& acts,
                                         int label) {
  check(label >= 0 && label < m.classes, "sensitivity: bad label");
  VectorXd delta = acts.class_probs;
  delta[label] -= 1.0;
  return m.class_weights.transpose() * delta;
}

/// dL/dh^l from dL/dh^{l+1}: chain rule through a^{l+1} = sigmoid(z^{l+1}),
/// sum_i s_i sigma'(z^{l+1}_i) W^{l+1}[j][i].
inline VectorXd backprop_sensitivity(const DdbnModel& m, int layer,
                                     const VectorXd& next_sensitivity,
                                     const LayerActivations& acts) {
  check(layer >= 0 && layer + 1 < m.depth(), "backprop: bad layer");
  const VectorXd& a = acts.act[layer + 1];
  check(next_sensitivity.size() == a.size(), "backprop: dimension mismatch");
  VectorXd scaled(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    scaled[i] = next_sensitivity[i] * a[i] * (1.0 - a[i]);
  return m.weights[layer + 1] * scaled;
}

/// Mean absolute loss gradient per hidden neuron over `sample`, normalized
/// by its layer's mean; neurons then ranked least critical first (ties
/// break to the lower flat index, i.e. lower layer, then lower index).
inline CriticalityRanking criticality_scores(const DdbnModel& m,
                                             const Dataset& sample) {
  check(sample.size() >= 1, "criticality_scores: empty sample");
  check(sample.input_dim == m.visible, "criticality_scores: dim mismatch");
  const int L = m.depth();
  std::vector<VectorXd> mean_abs(L);
  for (int l = 0; l < L; ++l) mean_abs[l] = VectorXd::Zero(m.layer_sizes[l]);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const VectorXd x = to_vector(std::span<const uint8_t>(
        sample.row(i), static_cast<std::size_t>(sample.input_dim)));
    const LayerActivations acts = mean_field_forward(m, x);
    VectorXd s = output_layer_sensitivity(m, acts, sample.labels[i]);
    mean_abs[L - 1] += s.cwiseAbs();
    for (int l = L - 2; l >= 0; --l) {
      s = backprop_sensitivity(m, l, s, acts);
      mean_abs[l] += s.cwiseAbs();
    }
  }
  CriticalityRanking out;
  out.metric = CriticalityMetric::kCrossEntropy;
  for (int l = 0; l < L; ++l) {
    mean_abs[l] /= static_cast<double>(sample.size());
    const double layer_mean = mean_abs[l].mean();
    for (Eigen::Index j = 0; j < mean_abs[l].size(); ++j)
      out.scores.push_back(layer_mean > 0.0 ? mean_abs[l][j] / layer_mean
                                            : 1.0);
  }
  out.order.resize(out.scores.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    if (out.scores[a] != out.scores[b]) return out.scores[a] < out.scores[b];
    return a < b;
  });
  return out;
}

/// Baseline: a seeded uniform permutation of all hidden neurons, scores 1.
inline CriticalityRanking random_ordering(const DdbnModel& m, uint64_t seed) {
  CriticalityRanking out;
  out.metric = CriticalityMetric::kRandom;
  out.scores.assign(m.hidden_count(), 1.0);
  out.order.resize(m.hidden_count());
  std::iota(out.order.begin(), out.order.end(), 0);
  RandomStream rng(seed);
  rng.shuffle(out.order);
  return out;
}

}  // namespace axdbn

#endif  // AXDBN_CRITICALITY_HPP_
