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

#ifndef AXDBN_MODEL_HPP_
#define AXDBN_MODEL_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "axdbn/common.hpp"
#include "axdbn/rng.hpp"

namespace axdbn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Discriminative deep belief network parameters. Layer l's weight matrix is
/// (previous size x layer size); the class weight matrix is (classes x top
/// size). A depth-1 model is exactly a discriminative RBM: the visible layer
/// concatenates the input bits with a one-hot class vector.
struct DdbnModel {
  int visible = 0;  // V
  int classes = 0;  // C
  std::vector<int> layer_sizes;       // hidden layer widths, bottom up
  std::vector<MatrixXd> weights;      // W^l, prev x cur
  std::vector<VectorXd> hidden_bias;  // b^l
  MatrixXd class_weights;             // W^c, C x N_L
  VectorXd visible_bias;              // b^x
  VectorXd class_bias;                // b^c

  int depth() const { return static_cast<int>(layer_sizes.size()); }
  int top_size() const { return layer_sizes.back(); }
  int layer_input_size(int layer) const {
    return layer == 0 ? visible : layer_sizes[layer - 1];
  }
  int hidden_count() const {
    int n = 0;
    for (int s : layer_sizes) n += s;
    return n;
  }
  /// Offset of layer `l` in the flat layer-major hidden-neuron numbering.
  int layer_offset(int layer) const {
    int off = 0;
    for (int l = 0; l < layer; ++l) off += layer_sizes[l];
    return off;
  }

  bool all_finite() const {
    auto ok = [](const auto& m) { return m.allFinite(); };
    if (!ok(visible_bias) || !ok(class_bias) || !ok(class_weights))
      return false;
    for (const auto& w : weights)
      if (!ok(w)) return false;
    for (const auto& b : hidden_bias)
      if (!ok(b)) return false;
    return true;
  }

  void validate() const {
    check(depth() >= 1, "model: need at least one hidden layer");
    check(visible > 0 && classes > 0, "model: V and C must be positive");
    check(static_cast<int>(weights.size()) == depth(), "model: weights count");
    check(static_cast<int>(hidden_bias.size()) == depth(),
          "model: hidden bias count");
    for (int l = 0; l < depth(); ++l) {
      check(weights[l].rows() == layer_input_size(l) &&
                weights[l].cols() == layer_sizes[l],
            "model: weight matrix shape mismatch");
      check(hidden_bias[l].size() == layer_sizes[l],
            "model: hidden bias shape mismatch");
    }
    check(class_weights.rows() == classes && class_weights.cols() == top_size(),
          "model: class weight shape mismatch");
    check(visible_bias.size() == visible, "model: visible bias shape");
    check(class_bias.size() == classes, "model: class bias shape");
    check(all_finite(), "model: non-finite parameter");
  }

  /// Weights ~ N(0, 0.01), biases zero.
  static DdbnModel random_init(int visible, int classes,
                               std::vector<int> sizes, uint64_t seed) {
    DdbnModel m;
    m.visible = visible;
    m.classes = classes;
    m.layer_sizes = std::move(sizes);
    RandomStream rng(derive_seed(seed, seed_role::kInit));
    auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
      MatrixXd w(r, c);
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
          w(i, j) = 0.01 * rng.next_gaussian();
      return w;
    };
    for (int l = 0; l < m.depth(); ++l) {
      m.weights.push_back(gaussian(m.layer_input_size(l), m.layer_sizes[l]));
      m.hidden_bias.push_back(VectorXd::Zero(m.layer_sizes[l]));
    }
    m.class_weights = gaussian(classes, m.top_size());
    m.visible_bias = VectorXd::Zero(visible);
    m.class_bias = VectorXd::Zero(classes);
    return m;
  }
};

/// E(v,h) = -v.b_v - h.b_h - v'Wh for one RBM.
inline double rbm_energy(const VectorXd& v, const VectorXd& h,
                         const MatrixXd& W, const VectorXd& visible_bias,
                         const VectorXd& hidden_bias) {
  check(v.size() == W.rows() && h.size() == W.cols() &&
            v.size() == visible_bias.size() && h.size() == hidden_bias.size(),
        "rbm_energy: dimension mismatch");
  return -v.dot(visible_bias) - h.dot(hidden_bias) - v.dot(W * h);
}

/// E(x,h,c) = -x.b_x - h.b_h - c.b_c - x'Wh - c'W_c h for a DRBM; c one-hot.
inline double drbm_energy(const VectorXd& x, const VectorXd& h,
                          const VectorXd& c, const MatrixXd& W,
                          const MatrixXd& Wc, const VectorXd& bx,
                          const VectorXd& bh, const VectorXd& bc) {
  check(x.size() == W.rows() && h.size() == W.cols() && c.size() == Wc.rows(),
        "drbm_energy: dimension mismatch");
  int ones = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    check(c[i] == 0.0 || c[i] == 1.0, "drbm_energy: c must be one-hot");
    ones += c[i] == 1.0;
  }
  check(ones == 1, "drbm_energy: c must be one-hot");
  return -x.dot(bx) - h.dot(bh) - c.dot(bc) - x.dot(W * h) - c.dot(Wc * h);
}

/// P(h_j | input [, c]) for one layer: sigmoid of b + W'input (+ Wc'c on the
/// top layer of the class-bearing DRBM). Exact sigmoid.
inline VectorXd hidden_conditional(const DdbnModel& m, int layer,
                                   const VectorXd& input,
                                   const VectorXd* class_onehot = nullptr) {
  check(layer >= 0 && layer < m.depth(), "hidden_conditional: bad layer");
  check(input.size() == m.layer_input_size(layer),
        "hidden_conditional: dimension mismatch");
  VectorXd z = m.hidden_bias[layer] + m.weights[layer].transpose() * input;
  if (class_onehot != nullptr) {
    check(layer == m.depth() - 1,
          "hidden_conditional: class input only enters the top layer");
    check(class_onehot->size() == m.classes,
          "hidden_conditional: class dimension mismatch");
    z += m.class_weights.transpose() * (*class_onehot);
  }
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

/// P(v_i | h) for one RBM: sigmoid of b_v + W h.
inline VectorXd visible_conditional(const MatrixXd& W,
                                    const VectorXd& visible_bias,
                                    const VectorXd& h) {
  VectorXd z = visible_bias + W * h;
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

inline VectorXd softmax(VectorXd z) {
  const double m = z.maxCoeff();
  z = (z.array() - m).exp();
  return z / z.sum();
}

/// P(c | h_top) = softmax(b_c + W_c h_top).
inline VectorXd class_conditional(const DdbnModel& m, const VectorXd& h_top) {
  check(h_top.size() == m.top_size(), "class_conditional: dimension mismatch");
  return softmax(m.class_bias + m.class_weights * h_top);
}

namespace detail {
inline double softplus(double t) {
  // log(1 + e^t), stable on both tails
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}
}  // namespace detail

/// Free energy of the top DRBM: F(x, c) = -x.b_x - b_c - sum_j softplus(b_j
/// + W_c[c,j] + (W'x)_j), i.e. -log sum_h exp(-E(x, h, c)). The input-bias
/// term is constant across classes (classification ignores it) and applies
/// only at depth 1, where the top input is the visible layer; for depth > 1
/// callers pass the lower layers' mean-field activations as x.
inline double free_energy(const DdbnModel& m, const VectorXd& top_input,
                          int class_index) {
  const int L = m.depth() - 1;
  check(top_input.size() == m.layer_input_size(L),
        "free_energy: dimension mismatch");
  check(class_index >= 0 && class_index < m.classes,
        "free_energy: class index out of range");
  VectorXd z = m.hidden_bias[L] + m.weights[L].transpose() * top_input;
  double acc = -m.class_bias[class_index];
  if (L == 0) acc -= top_input.dot(m.visible_bias);
  for (Eigen::Index j = 0; j < z.size(); ++j)
    acc -= detail::softplus(z[j] + m.class_weights(class_index, j));
  return acc;
}

/// P(c | x) = softmax over classes of -F(x, c).
inline VectorXd class_posterior(const DdbnModel& m, const VectorXd& top_input) {
  VectorXd neg_f(m.classes);
  for (int c = 0; c < m.classes; ++c) neg_f[c] = -free_energy(m, top_input, c);
  return softmax(neg_f);
}

}  // namespace axdbn

#endif  // AXDBN_MODEL_HPP_
