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

#ifndef AXDBN_TRAINING_HPP_
#define AXDBN_TRAINING_HPP_

#include <numeric>
#include <optional>
#include <vector>

#include "axdbn/dataio.hpp"
#include "axdbn/inference.hpp"
#include "axdbn/model.hpp"
#include "axdbn/precision.hpp"

namespace axdbn {

/// Contrastive-divergence hyperparameters. Momentum follows the usual
/// schedule: `momentum` for the first `momentum_switch_epoch` epochs, then
/// `momentum_final`.
struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 15;
  int batch_size = 100;
  int cd_steps = 1;
  double momentum = 0.5;
  double momentum_final = 0.9;
  int momentum_switch_epoch = 5;
  double weight_decay = 1e-4;
  uint64_t rng_seed = 0;

  void validate() const {
    check(learning_rate >= 0.0, "train: learning_rate must be >= 0");
    check(cd_steps >= 1, "train: cd_steps must be >= 1");
    check(batch_size >= 1, "train: batch_size must be >= 1");
    check(epochs >= 0, "train: epochs must be >= 0");
  }

  double momentum_at(int epoch) const {
    return epoch < momentum_switch_epoch ? momentum : momentum_final;
  }
};

namespace detail {

/// Per-neuron LP1 view of one layer's shadow parameters, refreshed whenever
/// the shadow weights move. Raw arrays drive the bit-exact LP2 accumulation;
/// the double matrices drive the full-precision reconstruction GEMMs.
struct QuantView {
  int in_dim = 0, out_dim = 0, classes = 0;
  bool overflow_guard = false;
  std::vector<int64_t> w_raw;     // [in][out]
  std::vector<int64_t> bias_raw;  // [out]
  std::vector<int64_t> fb_raw;    // [classes][out] class term, per-neuron fmt
  std::vector<int64_t> lo, hi;
  std::vector<int32_t> fbits;
  std::vector<uint8_t> pruned;
  MatrixXd w_values;   // quantize(W) as doubles
  MatrixXd wc_values;  // class weights at Q8.8 (class-head view)

  void refresh(const MatrixXd& W, const VectorXd& b, const MatrixXd* Wc,
               std::span<const NeuronPrecision> fmt) {
    in_dim = static_cast<int>(W.rows());
    out_dim = static_cast<int>(W.cols());
    classes = Wc ? static_cast<int>(Wc->rows()) : 0;
    overflow_guard = false;
    w_raw.assign(std::size_t(in_dim) * out_dim, 0);
    bias_raw.assign(out_dim, 0);
    lo.assign(out_dim, 0);
    hi.assign(out_dim, 0);
    fbits.assign(out_dim, 1);
    pruned.assign(out_dim, 0);
    w_values = MatrixXd::Zero(in_dim, out_dim);
    for (int j = 0; j < out_dim; ++j) {
      if (fmt[j].pruned) {
        pruned[j] = 1;
        continue;
      }
      const QFormat f = fmt[j].format;
      if (f.total_bits() >= 63) overflow_guard = true;
      lo[j] = f.min_raw();
      hi[j] = f.max_raw();
      fbits[j] = f.fraction_bits;
      bias_raw[j] = quantize_raw(b[j], f);
      for (int i = 0; i < in_dim; ++i) {
        const int64_t r = quantize_raw(W(i, j), f);
        w_raw[std::size_t(i) * out_dim + j] = r;
        w_values(i, j) = raw_to_real(r, f);
      }
    }
    if (Wc) {
      fb_raw.assign(std::size_t(classes) * out_dim, 0);
      wc_values = MatrixXd::Zero(classes, out_dim);
      for (int c = 0; c < classes; ++c)
        for (int j = 0; j < out_dim; ++j) {
          if (fmt[j].pruned) continue;
          fb_raw[std::size_t(c) * out_dim + j] =
              quantize_raw((*Wc)(c, j), fmt[j].format);
          wc_values(c, j) =
              raw_to_real(quantize_raw((*Wc)(c, j), kClassFormat),
                          kClassFormat);
        }
    }
  }

  /// Hidden activation probabilities for one binary sample row: LP2
  /// saturating accumulation (bias, inputs ascending, then the class unit),
  /// exact sigmoid, LP3 output quantization. Pruned neurons emit 0.
  void hidden_probs(const double* x, int label, double* out) const {
    thread_local std::vector<int64_t> acc;
    acc.assign(bias_raw.begin(), bias_raw.end());
    for (int i = 0; i < in_dim; ++i) {
      if (x[i] == 0.0) continue;
      const int64_t* w = w_raw.data() + std::size_t(i) * out_dim;
      if (overflow_guard) {
        for (int j = 0; j < out_dim; ++j)
          acc[j] = axdbn::detail::sat_add_clamped(acc[j], w[j], lo[j], hi[j]);
      } else {
        for (int j = 0; j < out_dim; ++j) {
          int64_t s = acc[j] + w[j];
          s = s < lo[j] ? lo[j] : s;
          acc[j] = s > hi[j] ? hi[j] : s;
        }
      }
    }
    if (label >= 0) {
      const int64_t* w = fb_raw.data() + std::size_t(label) * out_dim;
      for (int j = 0; j < out_dim; ++j)
        acc[j] = axdbn::detail::sat_add_clamped(acc[j], w[j], lo[j], hi[j]);
    }
    for (int j = 0; j < out_dim; ++j) {
      if (pruned[j]) {
        out[j] = 0.0;
        continue;
      }
      const double z = std::ldexp(static_cast<double>(acc[j]), -fbits[j]);
      double a = exact_sigmoid(z);
      int64_t raw = std::llround(std::ldexp(a, fbits[j]));
      if (raw > hi[j]) raw = hi[j];
      out[j] = std::ldexp(static_cast<double>(raw), -fbits[j]);
    }
  }
};

}  // namespace detail

/// CD-k trainer for one (D)RBM layer. Owns the momentum state and, for
/// stacked layers (l >= 1), a training-local visible bias that is discarded
/// afterwards; everything else updates the model in place. When `formats` is
/// supplied the forward/sampling path runs at limited precision while the
/// updates land on the full-precision shadow parameters.
class LayerTrainer {
 public:
  LayerTrainer(DdbnModel& model, int layer, bool with_class, TrainConfig cfg,
               std::span<const NeuronPrecision> formats = {},
               std::span<const uint8_t> prev_pruned = {})
      : model_(model),
        layer_(layer),
        with_class_(with_class),
        cfg_(cfg),
        formats_(formats),
        prev_pruned_(prev_pruned) {
    cfg_.validate();
    check(!with_class || layer == model.depth() - 1,
          "LayerTrainer: class units only on the top layer");
    const int in = model.layer_input_size(layer);
    const int out = model.layer_sizes[layer];
    vel_w_ = MatrixXd::Zero(in, out);
    vel_b_ = VectorXd::Zero(out);
    vel_bv_ = VectorXd::Zero(in);
    if (layer > 0) aux_visible_bias_ = VectorXd::Zero(in);
    if (with_class_) {
      vel_wc_ = MatrixXd::Zero(model.classes, out);
      vel_bc_ = VectorXd::Zero(model.classes);
    }
    check(formats_.empty() || static_cast<int>(formats_.size()) == out,
          "LayerTrainer: precision span length mismatch");
    check(prev_pruned_.empty() || static_cast<int>(prev_pruned_.size()) == in,
          "LayerTrainer: prev-layer mask length mismatch");
  }

  /// One CD-k update from a batch of binary visible rows (B x in) and labels
  /// (top layer only; ignored otherwise). Draw order: H0 row-major, then per
  /// CD step X1 row-major, one class draw per row, and H for the next step.
  void process_batch(const MatrixXd& x0, const std::vector<int32_t>& labels,
                     int epoch, RandomStream& rng) {
    check(x0.rows() >= 1, "cd_update: empty batch");
    check(x0.cols() == model_.layer_input_size(layer_),
          "cd_update: dimension mismatch");
    const int batch = static_cast<int>(x0.rows());
    const int out = model_.layer_sizes[layer_];
    MatrixXd& W = model_.weights[layer_];
    VectorXd& bh = model_.hidden_bias[layer_];
    VectorXd& bv = layer_ == 0 ? model_.visible_bias : aux_visible_bias_;

    const bool quant = !formats_.empty();
    if (quant)
      qview_.refresh(W, bh, with_class_ ? &model_.class_weights : nullptr,
                     formats_);

    MatrixXd c0;
    if (with_class_) {
      check(static_cast<int>(labels.size()) == batch,
            "cd_update: label count mismatch");
      c0 = MatrixXd::Zero(batch, model_.classes);
      for (int r = 0; r < batch; ++r) c0(r, labels[r]) = 1.0;
    }

    MatrixXd p0 = hidden_probs(x0, labels, quant);
    MatrixXd h = sample_bernoulli(p0, rng);

    MatrixXd x1, c1, p1;
    std::vector<int32_t> neg_labels(with_class_ ? batch : 0);
    for (int step = 0; step < cfg_.cd_steps; ++step) {
      x1 = reconstruct_visible(h, bv, rng, quant);
      if (with_class_) sample_classes(h, c1, neg_labels, rng, quant);
      p1 = hidden_probs(x1, neg_labels, quant);
      if (step + 1 < cfg_.cd_steps) h = sample_bernoulli(p1, rng);
    }

    const double inv_b = 1.0 / batch;
    const double lr = cfg_.learning_rate;
    const double mom = cfg_.momentum_at(epoch);
    const double wd = cfg_.weight_decay;

    MatrixXd gw = (x0.transpose() * p0 - x1.transpose() * p1) * inv_b - wd * W;
    VectorXd gb = (p0.colwise().sum() - p1.colwise().sum()) * inv_b;
    VectorXd gbv = (x0.colwise().sum() - x1.colwise().sum()) * inv_b;
    mask_updates(gw, gb, gbv);
    vel_w_ = mom * vel_w_ + lr * gw;
    vel_b_ = mom * vel_b_ + lr * gb;
    vel_bv_ = mom * vel_bv_ + lr * gbv;
    W += vel_w_;
    bh += vel_b_;
    bv += vel_bv_;
    if (with_class_) {
      MatrixXd gwc = (c0.transpose() * p0 - c1.transpose() * p1) * inv_b -
                     wd * model_.class_weights;
      VectorXd gbc = (c0.colwise().sum() - c1.colwise().sum()) * inv_b;
      for (int j = 0; j < out; ++j)
        if (is_pruned(j)) gwc.col(j).setZero();
      vel_wc_ = mom * vel_wc_ + lr * gwc;
      vel_bc_ = mom * vel_bc_ + lr * gbc;
      model_.class_weights += vel_wc_;
      model_.class_bias += vel_bc_;
    }
  }

 private:
  bool is_pruned(int j) const { return !formats_.empty() && formats_[j].pruned; }
  bool prev_is_pruned(int i) const {
    return !prev_pruned_.empty() && prev_pruned_[i];
  }

  MatrixXd hidden_probs(const MatrixXd& x, const std::vector<int32_t>& labels,
                        bool quant) {
    const int batch = static_cast<int>(x.rows());
    const int out = model_.layer_sizes[layer_];
    MatrixXd p(batch, out);
    if (!quant) {
      p = x * model_.weights[layer_];
      p.rowwise() += model_.hidden_bias[layer_].transpose();
      if (with_class_)
        for (int r = 0; r < batch; ++r)
          p.row(r) += model_.class_weights.row(labels[r]);
      p = p.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
      return p;
    }
    std::vector<double> row(out);
    std::vector<double> xrow(x.cols());
    for (int r = 0; r < batch; ++r) {
      for (int i = 0; i < x.cols(); ++i) xrow[i] = x(r, i);
      qview_.hidden_probs(xrow.data(), with_class_ ? labels[r] : -1,
                          row.data());
      for (int j = 0; j < out; ++j) p(r, j) = row[j];
    }
    return p;
  }

  MatrixXd sample_bernoulli(const MatrixXd& p, RandomStream& rng) {
    MatrixXd s(p.rows(), p.cols());
    for (int r = 0; r < p.rows(); ++r)
      for (int c = 0; c < p.cols(); ++c)
        s(r, c) = rng.next_unit() < p(r, c) ? 1.0 : 0.0;
    return s;
  }

  /// Visible reconstruction: full-precision sigmoid over the (LP1-valued,
  /// when quantized) weights; binary sample; positions belonging to pruned
  /// previous-layer neurons are held at zero.
  MatrixXd reconstruct_visible(const MatrixXd& h, const VectorXd& bv,
                               RandomStream& rng, bool quant) {
    const MatrixXd& W = quant ? qview_.w_values : model_.weights[layer_];
    MatrixXd pv = h * W.transpose();
    pv.rowwise() += bv.transpose();
    pv = pv.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    MatrixXd x1(pv.rows(), pv.cols());
    for (int r = 0; r < pv.rows(); ++r)
      for (int c = 0; c < pv.cols(); ++c) {
        const double u = rng.next_unit();
        x1(r, c) = !prev_is_pruned(c) && u < pv(r, c) ? 1.0 : 0.0;
      }
    return x1;
  }

  void sample_classes(const MatrixXd& h, MatrixXd& c1,
                      std::vector<int32_t>& neg_labels, RandomStream& rng,
                      bool quant) {
    const MatrixXd& Wc = quant ? qview_.wc_values : model_.class_weights;
    MatrixXd logits = h * Wc.transpose();
    logits.rowwise() += model_.class_bias.transpose();
    c1 = MatrixXd::Zero(h.rows(), model_.classes);
    std::vector<double> probs(model_.classes);
    for (int r = 0; r < logits.rows(); ++r) {
      double mx = logits.row(r).maxCoeff();
      double sum = 0.0;
      for (int c = 0; c < model_.classes; ++c) {
        probs[c] = std::exp(logits(r, c) - mx);
        sum += probs[c];
      }
      for (double& v : probs) v /= sum;
      const int cls = rng.next_categorical(probs);
      neg_labels[r] = cls;
      c1(r, cls) = 1.0;
    }
  }

  /// Pruned neurons receive no updates at all (gradient, decay or momentum);
  /// likewise the outgoing weights of pruned previous-layer neurons.
  void mask_updates(MatrixXd& gw, VectorXd& gb, VectorXd& gbv) {
    if (!formats_.empty())
      for (int j = 0; j < gw.cols(); ++j)
        if (formats_[j].pruned) {
          gw.col(j).setZero();
          gb[j] = 0.0;
        }
    if (!prev_pruned_.empty())
      for (int i = 0; i < gw.rows(); ++i)
        if (prev_pruned_[i]) {
          gw.row(i).setZero();
          gbv[i] = 0.0;
        }
  }

  DdbnModel& model_;
  int layer_;
  bool with_class_;
  TrainConfig cfg_;
  std::span<const NeuronPrecision> formats_;
  std::span<const uint8_t> prev_pruned_;
  VectorXd aux_visible_bias_;
  MatrixXd vel_w_, vel_wc_;
  VectorXd vel_b_, vel_bv_, vel_bc_;
  detail::QuantView qview_;
};

/// Single CD step on the top (class-bearing) layer; momentum state is local
/// to the call. For depth-1 models this is a full DRBM update.
inline void cd_update(DdbnModel& model, const Dataset& batch,
                      const TrainConfig& cfg) {
  check(batch.size() >= 1, "cd_update: empty batch");
  LayerTrainer trainer(model, model.depth() - 1, true, cfg);
  MatrixXd x0(batch.size(), batch.input_dim);
  for (std::size_t r = 0; r < batch.size(); ++r)
    for (int i = 0; i < batch.input_dim; ++i) x0(r, i) = batch.row(r)[i];
  RandomStream rng(cfg.rng_seed);
  trainer.process_batch(x0, batch.labels, 0, rng);
}

namespace detail {

/// Binary-state inputs for layer `layer` (0 = the data itself). Full
/// precision path: exact sigmoid probabilities sampled once per data point
/// with a derived seed. Quantized path: the LP pipeline's samples.
inline std::vector<uint8_t> layer_inputs(
    const DdbnModel& m, const Dataset& data, int layer, uint64_t seed,
    const QuantizedNetwork* qn) {
  const std::size_t n = data.size();
  if (layer == 0) return data.inputs;
  std::vector<uint8_t> prev = layer_inputs(m, data, layer - 1, seed, qn);
  const int in = m.layer_input_size(layer - 1);
  const int out = m.layer_sizes[layer - 1];
  std::vector<uint8_t> states(n * out);
  RandomStream rng(derive_seed(seed, seed_role::kStacking, layer - 1));
  std::vector<int> active;
  std::vector<int64_t> acc;
  for (std::size_t r = 0; r < n; ++r) {
    const uint8_t* xr = prev.data() + r * in;
    if (qn == nullptr) {
      VectorXd z = m.hidden_bias[layer - 1];
      for (int i = 0; i < in; ++i)
        if (xr[i]) z += m.weights[layer - 1].row(i).transpose();
      for (int j = 0; j < out; ++j)
        states[r * out + j] =
            rng.next_unit() < exact_sigmoid(z[j]) ? 1 : 0;
    } else {
      const QuantizedLayer& q = qn->layers()[layer - 1];
      active.clear();
      for (int i = 0; i < in; ++i)
        if (xr[i]) active.push_back(i);
      q.accumulate(active, acc);
      for (int j = 0; j < out; ++j) {
        const int64_t act =
            q.pruned[j] ? 0
                        : qn->activation_raw(q, j, acc[j], SigmoidKind::kExact);
        const uint64_t u = rng.next_bits(q.fbits[j]);
        states[r * out + j] = u < static_cast<uint64_t>(act) ? 1 : 0;
      }
    }
  }
  return states;
}

/// Greedy layer-by-layer CD. `map` null trains at full precision; otherwise
/// the forward path quantizes per the map and updates hit the shadow weights.
inline void greedy_train(DdbnModel& model, const Dataset& data,
                         const TrainConfig& cfg, const PrecisionMap* map,
                         const ProgressFn& progress) {
  cfg.validate();
  check(data.size() >= 1, "train: empty dataset");
  check(data.input_dim == model.visible && data.num_classes == model.classes,
        "train: dataset does not match model");
  const int L = model.depth();
  for (int layer = 0; layer < L; ++layer) {
    const bool with_class = layer == L - 1;
    std::span<const NeuronPrecision> formats;
    std::span<const uint8_t> prev_pruned;
    std::unique_ptr<QuantizedNetwork> qn;
    std::vector<uint8_t> prev_mask;
    if (map != nullptr) {
      formats = std::span<const NeuronPrecision>(
          map->data() + model.layer_offset(layer), model.layer_sizes[layer]);
      if (layer > 0) {
        const int prev_off = model.layer_offset(layer - 1);
        prev_mask.resize(model.layer_sizes[layer - 1]);
        for (std::size_t i = 0; i < prev_mask.size(); ++i)
          prev_mask[i] = (*map)[prev_off + i].pruned ? 1 : 0;
        prev_pruned = prev_mask;
      }
      qn = std::make_unique<QuantizedNetwork>(model, *map);
    }
    const std::vector<uint8_t> inputs =
        layer_inputs(model, data, layer, cfg.rng_seed, qn.get());
    qn.reset();  // weights move during training; view no longer valid

    LayerTrainer trainer(model, layer, with_class, cfg, formats, prev_pruned);
    RandomStream rng(derive_seed(cfg.rng_seed, seed_role::kTrain, layer));
    const int in = model.layer_input_size(layer);
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t b = std::min<std::size_t>(cfg.batch_size, n - start);
        MatrixXd x0(b, in);
        std::vector<int32_t> labels(with_class ? b : 0);
        for (std::size_t r = 0; r < b; ++r) {
          const std::size_t idx = order[start + r];
          const uint8_t* row = inputs.data() + idx * in;
          for (int i = 0; i < in; ++i) x0(r, i) = row[i];
          if (with_class) labels[r] = data.labels[idx];
        }
        trainer.process_batch(x0, labels, epoch, rng);
      }
      check(model.all_finite(), "train: non-finite parameter after epoch");
      report_progress(progress, "  layer " + std::to_string(layer + 1) + "/" +
                                    std::to_string(L) + " epoch " +
                                    std::to_string(epoch + 1) + "/" +
                                    std::to_string(cfg.epochs));
    }
  }
}

}  // namespace detail

/// Greedy layerwise training: layer 1 as an RBM on the data (a DRBM when the
/// model is depth 1), intermediate layers on binary states of the layer
/// below with everything beneath frozen, the top layer as a DRBM with class
/// units.
inline DdbnModel train_layerwise(int visible, int classes,
                                 const std::vector<int>& arch,
                                 const Dataset& data, const TrainConfig& cfg,
                                 const ProgressFn& progress = nullptr) {
  check(!arch.empty(), "train_layerwise: need at least one hidden layer");
  DdbnModel model = DdbnModel::random_init(visible, classes, arch,
                                           cfg.rng_seed);
  detail::greedy_train(model, data, cfg, nullptr, progress);
  return model;
}

inline DdbnModel train_layerwise(const std::vector<int>& arch,
                                 const Dataset& data, const TrainConfig& cfg,
                                 const ProgressFn& progress = nullptr) {
  return train_layerwise(data.input_dim, data.num_classes, arch, data, cfg,
                         progress);
}

/// Quantization-aware retraining: CD updates on the full-precision shadow
/// parameters with the forward/sampling path running at the map's precision
/// (exact sigmoid). Pruned neurons stay at zero output and receive no
/// updates.
inline void retrain_quantized(DdbnModel& model, const PrecisionMap& map,
                              const Dataset& data, const TrainConfig& cfg,
                              const ProgressFn& progress = nullptr) {
  check(static_cast<int>(map.size()) == model.hidden_count(),
        "retrain_quantized: map length mismatch");
  detail::greedy_train(model, data, cfg, &map, progress);
}

}  // namespace axdbn

#endif  // AXDBN_TRAINING_HPP_
