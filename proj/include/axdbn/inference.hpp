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

#ifndef AXDBN_INFERENCE_HPP_
#define AXDBN_INFERENCE_HPP_

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

#include "axdbn/dataio.hpp"
#include "axdbn/model.hpp"
#include "axdbn/precision.hpp"
#include "axdbn/qformat.hpp"
#include "axdbn/rng.hpp"

namespace axdbn {

enum class SigmoidKind { kExact, kPlan };

/// Gibbs-sampling configuration. One classification runs `gibbs_rounds`
/// bottom-up passes; every hidden neuron consumes exactly one random draw per
/// round, plus one draw per round for the class layer, so runs with the same
/// seed are reproducible across platforms.
struct SamplerConfig {
  int gibbs_rounds = 100;
  uint64_t rng_seed = 0;
  SigmoidKind sigmoid = SigmoidKind::kExact;
};

struct GibbsResult {
  int predicted = 0;
  std::vector<int64_t> class_counts;
};

/// Mean-field forward pass (exact sigmoid, full precision): a^l = sigma(z^l)
/// layer by layer, class softmax on top. No class feedback enters the hidden
/// layers; the class layer is the output being scored.
struct LayerActivations {
  std::vector<VectorXd> preact;  // z^l per hidden layer
  std::vector<VectorXd> act;     // a^l per hidden layer
  VectorXd class_logits;         // z^c
  VectorXd class_probs;          // a^c = softmax(z^c)
};

inline LayerActivations mean_field_forward(const DdbnModel& m,
                                           const VectorXd& x) {
  check(x.size() == m.visible, "mean_field_forward: dimension mismatch");
  LayerActivations out;
  const VectorXd* input = &x;
  for (int l = 0; l < m.depth(); ++l) {
    VectorXd z = m.hidden_bias[l] + m.weights[l].transpose() * (*input);
    out.act.push_back(z.unaryExpr(
        [](double v) { return 1.0 / (1.0 + std::exp(-v)); }));
    out.preact.push_back(std::move(z));
    input = &out.act.back();
  }
  out.class_logits = m.class_bias + m.class_weights * (*input);
  out.class_probs = softmax(out.class_logits);
  return out;
}

inline VectorXd to_vector(std::span<const uint8_t> bits) {
  VectorXd v(static_cast<Eigen::Index>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) v[i] = bits[i];
  return v;
}

/// argmin_c F(x, c); for stacked models the lower layers are evaluated by
/// mean-field activation probabilities. Ties break to the lowest class index.
inline int free_energy_classify(const DdbnModel& m, const VectorXd& x) {
  VectorXd top_input;
  if (m.depth() == 1) {
    top_input = x;
  } else {
    check(x.size() == m.visible, "free_energy_classify: dimension mismatch");
    VectorXd a = x;
    for (int l = 0; l < m.depth() - 1; ++l) {
      VectorXd z = m.hidden_bias[l] + m.weights[l].transpose() * a;
      a = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    }
    top_input = std::move(a);
  }
  int best = 0;
  double best_f = free_energy(m, top_input, 0);
  for (int c = 1; c < m.classes; ++c) {
    const double f = free_energy(m, top_input, c);
    if (f < best_f) {
      best_f = f;
      best = c;
    }
  }
  return best;
}

inline int free_energy_classify(const DdbnModel& m,
                                std::span<const uint8_t> x) {
  return free_energy_classify(m, to_vector(x));
}

// ---------------------------------------------------------------------------
// Limited-precision network: LP1 quantizes weights and biases per neuron,
// LP2 runs the pre-activation accumulation in the neuron's own format with
// saturation at every MAC step, LP3 quantizes the activation output. The
// accumulation order is fixed: bias, then inputs by ascending index, then
// (top layer only) the class-feedback weight of the previous round's sample.
// Pruned neurons carry zeroed weights and [0,0] bounds, so their state is
// constantly 0 and they vanish from downstream sums.
// ---------------------------------------------------------------------------

namespace detail {

inline int64_t sat_add_clamped(int64_t a, int64_t b, int64_t lo, int64_t hi) {
  const int64_t s =
      static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
  if (((a ^ s) & (b ^ s)) < 0) return b < 0 ? lo : hi;  // int64 overflow
  return s < lo ? lo : (s > hi ? hi : s);
}

}  // namespace detail

struct QuantizedLayer {
  int in_dim = 0;
  int out_dim = 0;
  bool has_class_feedback = false;      // top layer of the network
  bool overflow_guard = false;          // any neuron at >= 63 total bits
  std::vector<int64_t> weights;         // [in][out], input-major
  std::vector<int64_t> bias;            // [out]
  std::vector<int64_t> lo, hi;          // per-neuron raw saturation bounds
  std::vector<int64_t> act_one;         // raw value of quantize(1.0)
  std::vector<int32_t> fbits;           // per-neuron fractional width
  std::vector<uint8_t> pruned;          // 1 if removed
  std::vector<int64_t> class_feedback;  // [classes][out], top layer only

  /// acc[j] := bias[j]; then += weights for every active input, saturating.
  /// Below 63 total bits a raw add cannot wrap, so the common path is a
  /// plain add-and-clamp the compiler can vectorize; the guarded path is
  /// bit-identical where both apply.
  void accumulate(std::span<const int> active, std::vector<int64_t>& acc)
      const {
    acc.assign(bias.begin(), bias.end());
    if (overflow_guard) {
      for (int i : active) {
        const int64_t* w = weights.data() + std::size_t(i) * out_dim;
        for (int j = 0; j < out_dim; ++j)
          acc[j] = detail::sat_add_clamped(acc[j], w[j], lo[j], hi[j]);
      }
      return;
    }
    for (int i : active) {
      const int64_t* w = weights.data() + std::size_t(i) * out_dim;
      for (int j = 0; j < out_dim; ++j) {
        int64_t s = acc[j] + w[j];
        s = s < lo[j] ? lo[j] : s;
        acc[j] = s > hi[j] ? hi[j] : s;
      }
    }
  }

  void add_class_feedback(int cls, std::vector<int64_t>& acc) const {
    const int64_t* w = class_feedback.data() + std::size_t(cls) * out_dim;
    for (int j = 0; j < out_dim; ++j)
      acc[j] = detail::sat_add_clamped(acc[j], w[j], lo[j], hi[j]);
  }
};

struct QuantizedClassHead {
  int in_dim = 0;
  int classes = 0;
  std::vector<int64_t> weights;  // [in][classes], Q8.8
  std::vector<int64_t> bias;     // [classes], Q8.8
};

class QuantizedNetwork {
 public:
  QuantizedNetwork(const DdbnModel& m, const PrecisionMap& map) : model_(&m) {
    m.validate();
    check(static_cast<int>(map.size()) == m.hidden_count(),
          "precision map length must equal hidden neuron count");
    int offset = 0;
    for (int l = 0; l < m.depth(); ++l) {
      QuantizedLayer q;
      q.in_dim = m.layer_input_size(l);
      q.out_dim = m.layer_sizes[l];
      q.has_class_feedback = (l == m.depth() - 1);
      q.weights.assign(std::size_t(q.in_dim) * q.out_dim, 0);
      q.bias.assign(q.out_dim, 0);
      q.lo.assign(q.out_dim, 0);
      q.hi.assign(q.out_dim, 0);
      q.act_one.assign(q.out_dim, 0);
      q.fbits.assign(q.out_dim, 1);
      q.pruned.assign(q.out_dim, 0);
      for (int j = 0; j < q.out_dim; ++j) {
        const NeuronPrecision& p = map[offset + j];
        if (p.pruned) {
          q.pruned[j] = 1;
          continue;
        }
        const QFormat f = p.format;
        if (f.total_bits() >= 63) q.overflow_guard = true;
        q.lo[j] = f.min_raw();
        q.hi[j] = f.max_raw();
        q.fbits[j] = f.fraction_bits;
        q.bias[j] = quantize_raw(m.hidden_bias[l][j], f);
        q.act_one[j] = quantize_raw(1.0, f);
        for (int i = 0; i < q.in_dim; ++i)
          q.weights[std::size_t(i) * q.out_dim + j] =
              quantize_raw(m.weights[l](i, j), f);
      }
      if (q.has_class_feedback) {
        q.class_feedback.assign(std::size_t(m.classes) * q.out_dim, 0);
        for (int c = 0; c < m.classes; ++c)
          for (int j = 0; j < q.out_dim; ++j) {
            const NeuronPrecision& p = map[offset + j];
            if (p.pruned) continue;
            q.class_feedback[std::size_t(c) * q.out_dim + j] =
                quantize_raw(m.class_weights(c, j), p.format);
          }
      }
      offset += q.out_dim;
      layers_.push_back(std::move(q));
    }
    head_.in_dim = m.top_size();
    head_.classes = m.classes;
    head_.weights.assign(std::size_t(head_.in_dim) * head_.classes, 0);
    head_.bias.assign(head_.classes, 0);
    for (int c = 0; c < m.classes; ++c)
      head_.bias[c] = quantize_raw(m.class_bias[c], kClassFormat);
    for (int j = 0; j < head_.in_dim; ++j)
      for (int c = 0; c < m.classes; ++c)
        head_.weights[std::size_t(j) * head_.classes + c] =
            quantize_raw(m.class_weights(c, j), kClassFormat);
  }

  const DdbnModel& model() const { return *model_; }
  const std::vector<QuantizedLayer>& layers() const { return layers_; }
  const QuantizedClassHead& head() const { return head_; }

  /// Activation of neuron j from a raw pre-activation: sigmoid (exact or
  /// PLAN), then LP3 quantization back to the neuron's format. Activations
  /// live in [0, 1], so only the upper bound can saturate (m = 1 formats cap
  /// at 1 - 2^-n).
  int64_t activation_raw(const QuantizedLayer& q, int j, int64_t acc,
                         SigmoidKind kind) const {
    const double z = std::ldexp(static_cast<double>(acc), -q.fbits[j]);
    const double a =
        kind == SigmoidKind::kPlan ? plan_sigmoid(z) : exact_sigmoid(z);
    int64_t raw = std::llround(std::ldexp(a, q.fbits[j]));
    if (raw > q.hi[j]) raw = q.hi[j];
    if (raw < 0 || raw > (INT64_C(1) << q.fbits[j]))
      throw std::logic_error("quantized activation out of format range");
    return raw;
  }

 private:
  const DdbnModel* model_;
  std::vector<QuantizedLayer> layers_;
  QuantizedClassHead head_;
};

namespace detail {

inline void collect_active(const std::vector<uint8_t>& states,
                           std::vector<int>& active) {
  active.clear();
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i]) active.push_back(static_cast<int>(i));
}

inline int argmax_counts(const std::vector<int64_t>& counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = static_cast<int>(c);
  return best;
}

}  // namespace detail

/// Bit-exact limited-precision Gibbs classification (the on-chip pipeline).
/// Per round: sample every hidden layer bottom-up, the top layer seeing the
/// previous round's class sample through the quantized class weights (none on
/// round one), then sample a one-hot class from the exact softmax of the
/// Q8.8 class pre-activations. The uniform thresholds u are the top n bits of
/// one generator draw per neuron, an n-bit PRPG stand-in.
inline GibbsResult gibbs_classify(const QuantizedNetwork& qn,
                                  std::span<const uint8_t> x,
                                  const SamplerConfig& cfg) {
  const DdbnModel& m = qn.model();
  check(static_cast<int>(x.size()) == m.visible,
        "gibbs_classify: dimension mismatch");
  check(cfg.gibbs_rounds >= 1, "gibbs_classify: need at least one round");
  RandomStream rng(cfg.rng_seed);
  const int L = m.depth();

  std::vector<int> active;
  active.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) active.push_back(static_cast<int>(i));

  // The visible input is clamped, so layer 1's input accumulation never
  // changes across rounds; cache it.
  const QuantizedLayer& first = qn.layers().front();
  std::vector<int64_t> first_acc;
  first.accumulate(active, first_acc);

  // For a depth-1 model the whole hidden pre-activation is determined by the
  // clamped input plus one class-feedback weight; precompute the quantized
  // activation per (feedback class, neuron). Entry 0 is "no feedback".
  std::vector<int64_t> top_table;
  if (L == 1) {
    top_table.assign(std::size_t(m.classes + 1) * first.out_dim, 0);
    for (int c = -1; c < m.classes; ++c) {
      std::vector<int64_t> acc = first_acc;
      if (c >= 0) first.add_class_feedback(c, acc);
      for (int j = 0; j < first.out_dim; ++j)
        if (!first.pruned[j])
          top_table[std::size_t(c + 1) * first.out_dim + j] =
              qn.activation_raw(first, j, acc[j], cfg.sigmoid);
    }
  }

  // Deeper stacks: layer 1 sees no feedback, so its activation is fixed too.
  std::vector<int64_t> first_act;
  if (L > 1) {
    first_act.assign(first.out_dim, 0);
    for (int j = 0; j < first.out_dim; ++j)
      if (!first.pruned[j])
        first_act[j] = qn.activation_raw(first, j, first_acc[j], cfg.sigmoid);
  }

  std::vector<std::vector<uint8_t>> states(L);
  for (int l = 0; l < L; ++l) states[l].assign(m.layer_sizes[l], 0);
  std::vector<int64_t> counts(m.classes, 0);
  std::vector<int64_t> acc;
  std::vector<int> layer_active;
  std::vector<double> class_probs(m.classes);
  int prev_class = -1;

  for (int round = 0; round < cfg.gibbs_rounds; ++round) {
    for (int l = 0; l < L; ++l) {
      const QuantizedLayer& q = qn.layers()[l];
      if (L == 1) {
        const int64_t* act =
            top_table.data() + std::size_t(prev_class + 1) * q.out_dim;
        for (int j = 0; j < q.out_dim; ++j) {
          const uint64_t u = rng.next_bits(q.fbits[j]);
          states[l][j] = u < static_cast<uint64_t>(act[j]) ? 1 : 0;
        }
        break;
      }
      if (l == 0) {
        for (int j = 0; j < q.out_dim; ++j) {
          const uint64_t u = rng.next_bits(q.fbits[j]);
          states[l][j] = u < static_cast<uint64_t>(first_act[j]) ? 1 : 0;
        }
        continue;
      }
      detail::collect_active(states[l - 1], layer_active);
      q.accumulate(layer_active, acc);
      if (q.has_class_feedback && prev_class >= 0)
        q.add_class_feedback(prev_class, acc);
      for (int j = 0; j < q.out_dim; ++j) {
        const int64_t act = q.pruned[j]
                                ? 0
                                : qn.activation_raw(q, j, acc[j], cfg.sigmoid);
        const uint64_t u = rng.next_bits(q.fbits[j]);
        states[l][j] = u < static_cast<uint64_t>(act) ? 1 : 0;
      }
    }
    // Class layer: Q8.8 accumulation, softmax, one-hot categorical sample.
    const QuantizedClassHead& head = qn.head();
    std::vector<int64_t> zc(head.bias.begin(), head.bias.end());
    const int64_t clo = kClassFormat.min_raw();
    const int64_t chi = kClassFormat.max_raw();
    const std::vector<uint8_t>& top = states[L - 1];
    for (int j = 0; j < head.in_dim; ++j) {
      if (!top[j]) continue;
      const int64_t* w = head.weights.data() + std::size_t(j) * head.classes;
      for (int c = 0; c < head.classes; ++c)
        zc[c] = detail::sat_add_clamped(zc[c], w[c], clo, chi);
    }
    double max_z = -1e300;
    for (int c = 0; c < head.classes; ++c)
      max_z = std::max(max_z, static_cast<double>(zc[c]));
    double sum = 0.0;
    for (int c = 0; c < head.classes; ++c) {
      class_probs[c] = std::exp((static_cast<double>(zc[c]) - max_z) *
                                kClassFormat.step());
      sum += class_probs[c];
    }
    for (double& p : class_probs) p /= sum;
    prev_class = rng.next_categorical(class_probs);
    ++counts[prev_class];
  }
  return {detail::argmax_counts(counts), std::move(counts)};
}

/// Full-precision Gibbs classification; same chain and same per-round draw
/// pattern as the quantized pipeline, with real arithmetic.
inline GibbsResult gibbs_classify(const DdbnModel& m,
                                  std::span<const uint8_t> x,
                                  const SamplerConfig& cfg) {
  check(static_cast<int>(x.size()) == m.visible,
        "gibbs_classify: dimension mismatch");
  check(cfg.gibbs_rounds >= 1, "gibbs_classify: need at least one round");
  RandomStream rng(cfg.rng_seed);
  const int L = m.depth();
  auto act_of = [&](double z) {
    return cfg.sigmoid == SigmoidKind::kPlan ? plan_sigmoid(z)
                                             : exact_sigmoid(z);
  };

  VectorXd first_base = m.hidden_bias[0];
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) first_base += m.weights[0].row(static_cast<int>(i)).transpose();
  // With no feedback into layer 1 of a stack, its activations are fixed.
  VectorXd first_act;
  if (L > 1) first_act = first_base.unaryExpr(act_of);

  std::vector<VectorXd> state(L);
  std::vector<int64_t> counts(m.classes, 0);
  std::vector<double> class_probs(m.classes);
  int prev_class = -1;
  for (int round = 0; round < cfg.gibbs_rounds; ++round) {
    for (int l = 0; l < L; ++l) {
      if (l == 0 && L > 1) {
        VectorXd& s = state[0];
        s.resize(first_act.size());
        for (int j = 0; j < first_act.size(); ++j)
          s[j] = rng.next_unit() < first_act[j] ? 1.0 : 0.0;
        continue;
      }
      VectorXd z;
      if (l == 0) {
        z = first_base;
      } else {
        z = m.hidden_bias[l];
        const VectorXd& prev = state[l - 1];
        for (int i = 0; i < prev.size(); ++i)
          if (prev[i] != 0.0) z += m.weights[l].row(i).transpose();
      }
      if (l == L - 1 && prev_class >= 0)
        z += m.class_weights.row(prev_class).transpose();
      VectorXd& s = state[l];
      s.resize(z.size());
      for (int j = 0; j < z.size(); ++j)
        s[j] = rng.next_unit() < act_of(z[j]) ? 1.0 : 0.0;
    }
    VectorXd zc = m.class_bias + m.class_weights * state[L - 1];
    VectorXd probs = softmax(zc);
    for (int c = 0; c < m.classes; ++c) class_probs[c] = probs[c];
    prev_class = rng.next_categorical(class_probs);
    ++counts[prev_class];
  }
  return {detail::argmax_counts(counts), std::move(counts)};
}

/// Spec-facing convenience overload: quantizes on the fly when a map is given.
inline GibbsResult gibbs_classify(const DdbnModel& m,
                                  std::span<const uint8_t> x,
                                  const SamplerConfig& cfg,
                                  const PrecisionMap* map) {
  if (map == nullptr) return gibbs_classify(m, x, cfg);
  check(!map->empty(), "gibbs_classify: empty precision map");
  QuantizedNetwork qn(m, *map);
  return gibbs_classify(qn, x, cfg);
}

// ---------------------------------------------------------------------------
// Batch accuracy evaluators. Input i classifies with stream seed
// base_seed XOR i, so results are independent of evaluation order.
// ---------------------------------------------------------------------------

inline double gibbs_accuracy(const DdbnModel& m, const Dataset& ds,
                             const SamplerConfig& cfg,
                             const PrecisionMap* map = nullptr,
                             const ProgressFn& progress = nullptr) {
  std::unique_ptr<QuantizedNetwork> qn;
  if (map != nullptr) qn = std::make_unique<QuantizedNetwork>(m, *map);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    SamplerConfig percfg = cfg;
    percfg.rng_seed = cfg.rng_seed ^ static_cast<uint64_t>(i);
    std::span<const uint8_t> row(ds.row(i),
                                 static_cast<std::size_t>(ds.input_dim));
    const GibbsResult r = qn ? gibbs_classify(*qn, row, percfg)
                             : gibbs_classify(m, row, percfg);
    correct += r.predicted == ds.labels[i];
    if (progress && (i + 1) % 2000 == 0)
      report_progress(progress, "  eval " + std::to_string(i + 1) + "/" +
                                    std::to_string(ds.size()));
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

inline double free_energy_accuracy(const DdbnModel& m, const Dataset& ds) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::span<const uint8_t> row(ds.row(i),
                                 static_cast<std::size_t>(ds.input_dim));
    correct += free_energy_classify(m, row) == ds.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace axdbn

#endif  // AXDBN_INFERENCE_HPP_
