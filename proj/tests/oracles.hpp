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

// Test-only oracles, intentionally independent of the library's fast paths:
// exhaustive 2^H marginalization over hidden states and finite differences
// through the mean-field forward pass.

#ifndef AXDBN_TESTS_ORACLES_HPP_
#define AXDBN_TESTS_ORACLES_HPP_

#include <cmath>
#include <vector>

#include "axdbn/criticality.hpp"
#include "axdbn/inference.hpp"
#include "axdbn/model.hpp"

namespace axdbn::oracle {

/// log sum_h exp(-E(x, h, c)) by enumerating all 2^H hidden states of the
/// top DRBM. `top_input` plays the role of x (real-valued allowed).
inline double log_sum_exp_energy(const DdbnModel& m, const VectorXd& top_input,
                                 int class_index) {
  const int L = m.depth() - 1;
  const int H = m.layer_sizes[L];
  VectorXd c = VectorXd::Zero(m.classes);
  c[class_index] = 1.0;
  std::vector<double> terms;
  terms.reserve(std::size_t(1) << H);
  // Energy terms that involve x directly use a zero visible bias when the
  // "visible" layer is a hidden layer of the stack (no such bias exists).
  const VectorXd bx = L == 0 ? m.visible_bias
                             : VectorXd::Zero(m.layer_input_size(L));
  for (uint64_t bits = 0; bits < (uint64_t(1) << H); ++bits) {
    VectorXd h(H);
    for (int j = 0; j < H; ++j) h[j] = (bits >> j) & 1 ? 1.0 : 0.0;
    const double e = drbm_energy(top_input, h, c, m.weights[L],
                                 m.class_weights, bx, m.hidden_bias[L],
                                 m.class_bias);
    terms.push_back(-e);
  }
  double mx = terms.front();
  for (double t : terms) mx = std::max(mx, t);
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - mx);
  return mx + std::log(sum);
}

/// Class posterior by brute-force marginalization of the joint over h.
inline VectorXd brute_force_posterior(const DdbnModel& m,
                                      const VectorXd& top_input) {
  VectorXd logp(m.classes);
  for (int c = 0; c < m.classes; ++c)
    logp[c] = log_sum_exp_energy(m, top_input, c);
  const double mx = logp.maxCoeff();
  VectorXd p = (logp.array() - mx).exp();
  return p / p.sum();
}

/// For depth > 1 the oracle marginalizes the top DRBM over the mean-field
/// activations of the lower stack, mirroring the free-energy path.
inline VectorXd brute_force_posterior_from_x(const DdbnModel& m,
                                             const VectorXd& x) {
  if (m.depth() == 1) return brute_force_posterior(m, x);
  VectorXd a = x;
  for (int l = 0; l < m.depth() - 1; ++l) {
    VectorXd z = m.hidden_bias[l] + m.weights[l].transpose() * a;
    a = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  return brute_force_posterior(m, a);
}

/// Cross-entropy loss as a function of one perturbed hidden layer: layers
/// above `layer` are recomputed from the modified activations.
inline double loss_from_perturbed_layer(const DdbnModel& m,
                                        const VectorXd& perturbed_act,
                                        int layer, int label) {
  VectorXd a = perturbed_act;
  for (int l = layer + 1; l < m.depth(); ++l) {
    VectorXd z = m.hidden_bias[l] + m.weights[l].transpose() * a;
    a = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  const VectorXd probs = softmax(m.class_bias + m.class_weights * a);
  return -std::log(std::max(probs[label], kProbFloor));
}

/// Central finite differences of the cross-entropy loss w.r.t. every
/// activation of `layer`.
inline VectorXd finite_difference_sensitivity(const DdbnModel& m,
                                              const LayerActivations& acts,
                                              int layer, int label,
                                              double eps = 1e-5) {
  const VectorXd& a = acts.act[layer];
  VectorXd grad(a.size());
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    VectorXd hi = a, lo = a;
    hi[j] += eps;
    lo[j] -= eps;
    grad[j] = (loss_from_perturbed_layer(m, hi, layer, label) -
               loss_from_perturbed_layer(m, lo, layer, label)) /
              (2.0 * eps);
  }
  return grad;
}

/// Random small model for oracle comparisons.
inline DdbnModel random_model(int visible, int classes, std::vector<int> sizes,
                              uint64_t seed, double scale = 0.5) {
  DdbnModel m = DdbnModel::random_init(visible, classes, sizes, seed);
  RandomStream rng(derive_seed(seed, 77));
  auto fill = [&](MatrixXd& w) {
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        w(i, j) = scale * rng.next_gaussian();
  };
  auto fillv = [&](VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = 0.5 * scale * rng.next_gaussian();
  };
  for (auto& w : m.weights) fill(w);
  fill(m.class_weights);
  for (auto& b : m.hidden_bias) fillv(b);
  fillv(m.visible_bias);
  fillv(m.class_bias);
  return m;
}

inline VectorXd random_binary(int dim, RandomStream& rng) {
  VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.next_bits(1) ? 1.0 : 0.0;
  return v;
}

}  // namespace axdbn::oracle

#endif  // AXDBN_TESTS_ORACLES_HPP_
