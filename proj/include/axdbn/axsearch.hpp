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

#ifndef AXDBN_AXSEARCH_HPP_
#define AXDBN_AXSEARCH_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "axdbn/criticality.hpp"
#include "axdbn/inference.hpp"
#include "axdbn/precision.hpp"
#include "axdbn/training.hpp"

namespace axdbn {

struct SearchConfig {
  double acc_min = 0.0;  // absolute validation-accuracy floor
  BitwidthLadder ladder = default_ladder();
  int numc = 0;  // neuron step size; 0 picks ceil(numhid / 10)
  CriticalityMetric metric = CriticalityMetric::kCrossEntropy;
  SamplerConfig eval{100, 0, SigmoidKind::kPlan};
  TrainConfig retrain = default_retrain();
  int criticality_samples = 2000;
  uint64_t rng_seed = 0;

  static TrainConfig default_retrain() {
    TrainConfig t;
    t.epochs = 2;
    return t;
  }
};

struct InnerStep {
  int outer = 0;
  int numr = 0;
  bool changed = false;   // candidate differs from the current map
  bool accepted = false;  // candidate committed (val accuracy >= acc_min)
  double val_acc = 0.0;   // measured accuracy (0 when unchanged/skipped)
  int64_t sumbit_after = 0;
};

struct OuterRecord {
  int outer = 0;
  int64_t sumbit_end = 0;         // after the inner sweep (= after retrain)
  double post_retrain_acc = 0.0;  // map accuracy on the retrained weights
  bool retrain_reverted = false;
};

struct SearchTrace {
  std::string uniform_format;               // chosen uniform starting rung
  std::vector<std::pair<std::string, double>> uniform_evals;
  std::vector<InnerStep> steps;
  std::vector<OuterRecord> outers;
  std::vector<int64_t> sumbit_history;      // post-uniform, then per outer
  std::vector<CriticalityRanking> rankings;  // one per outer iteration
};

struct SearchResult {
  PrecisionMap map;
  double final_val_acc = 0.0;
  SearchTrace trace;
};

namespace detail {

inline std::size_t ladder_index(const BitwidthLadder& ladder,
                                const NeuronPrecision& p) {
  for (std::size_t i = 0; i < ladder.size(); ++i)
    if (ladder[i] == p) return i;
  throw std::invalid_argument("precision map entry not on the ladder");
}

struct ParamSnapshot {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> hidden_bias;
  MatrixXd class_weights;
  VectorXd visible_bias, class_bias;

  static ParamSnapshot take(const DdbnModel& m) {
    return {m.weights, m.hidden_bias, m.class_weights, m.visible_bias,
            m.class_bias};
  }
  void restore(DdbnModel& m) const {
    m.weights = weights;
    m.hidden_bias = hidden_bias;
    m.class_weights = class_weights;
    m.visible_bias = visible_bias;
    m.class_bias = class_bias;
  }
};

}  // namespace detail

/// Stage 1: lower all hidden neurons uniformly, widest rung first, and keep
/// the lowest rung whose quantized validation accuracy still meets acc_min.
/// PRUNED is never selected uniformly. Throws InfeasibleError when even the
/// widest rung misses the floor.
inline PrecisionMap uniform_reduce(const DdbnModel& model,
                                   const BitwidthLadder& ladder,
                                   double acc_min, const SamplerConfig& eval,
                                   const Dataset& val,
                                   SearchTrace* trace = nullptr,
                                   const ProgressFn& progress = nullptr) {
  check(!ladder.empty(), "uniform_reduce: empty ladder");
  const int numhid = model.hidden_count();
  PrecisionMap best;
  for (const NeuronPrecision& rung : ladder) {
    if (rung.pruned) continue;
    const PrecisionMap candidate = uniform_map(numhid, rung);
    const double acc = gibbs_accuracy(model, val, eval, &candidate);
    if (trace) trace->uniform_evals.emplace_back(rung.to_string(), acc);
    report_progress(progress, "uniform " + rung.to_string() + ": acc " +
                                  std::to_string(acc));
    if (acc < acc_min) break;
    best = candidate;
    if (trace) trace->uniform_format = rung.to_string();
  }
  if (best.empty())
    throw InfeasibleError(
        "accuracy-loss constraint infeasible: even the widest uniform format "
        "misses the validation floor");
  return best;
}

/// One greedy move: the numr least-critical neurons each step one rung down
/// the ladder (already-bottom entries, PRUNED included, stay). Returns the
/// candidate without committing it.
inline PrecisionMap neuron_approx(const PrecisionMap& map, int numr,
                                  const std::vector<int>& order,
                                  const BitwidthLadder& ladder) {
  check(numr >= 0 && numr <= static_cast<int>(order.size()),
        "neuron_approx: numr out of range");
  check(map.size() == order.size(), "neuron_approx: order/map mismatch");
  PrecisionMap out = map;
  for (int k = 0; k < numr; ++k) {
    const int neuron = order[k];
    const std::size_t idx = detail::ladder_index(ladder, out[neuron]);
    if (idx + 1 < ladder.size()) out[neuron] = ladder[idx + 1];
  }
  return out;
}

/// The approximation loop: criticality ranking, an accept/revert inner sweep
/// with numr stepping numhid, numhid-numc, ... down to zero, then retraining
/// on the full-precision shadow weights; repeated until the total assigned
/// bits stop decreasing. Every committed map meets acc_min at the evaluation
/// seed; when a retraining pass itself breaks the floor it is reverted and
/// the search stops there.
inline SearchResult ax_search(DdbnModel& model, const SearchConfig& cfg,
                              const Dataset& train, const Dataset& val,
                              const ProgressFn& progress = nullptr) {
  const int numhid = model.hidden_count();
  const int numc =
      cfg.numc > 0 ? cfg.numc : static_cast<int>(std::ceil(numhid / 10.0));
  SearchResult result;
  result.map = uniform_reduce(model, cfg.ladder, cfg.acc_min, cfg.eval, val,
                              &result.trace, progress);
  int64_t prev_sumbit = sumbit(result.map);
  result.trace.sumbit_history.push_back(prev_sumbit);
  double current_acc = 0.0;  // accuracy of the (params, map) state in hand
  for (const auto& [name, acc] : result.trace.uniform_evals)
    if (name == result.trace.uniform_format) current_acc = acc;

  // Criticality sampling set: a fixed seeded subset of the training split.
  Dataset crit_sample;
  {
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(cfg.criticality_samples), train.size());
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RandomStream rng(derive_seed(cfg.rng_seed, seed_role::kCriticality));
    rng.shuffle(idx);
    crit_sample.input_dim = train.input_dim;
    crit_sample.num_classes = train.num_classes;
    for (std::size_t i = 0; i < k; ++i) {
      const uint8_t* row = train.row(idx[i]);
      crit_sample.inputs.insert(crit_sample.inputs.end(), row,
                                row + train.input_dim);
      crit_sample.labels.push_back(train.labels[idx[i]]);
    }
  }

  for (int outer = 1;; ++outer) {
    CriticalityRanking ranking =
        cfg.metric == CriticalityMetric::kCrossEntropy
            ? criticality_scores(model, crit_sample)
            : random_ordering(model,
                              derive_seed(cfg.rng_seed, seed_role::kSearch,
                                          static_cast<uint64_t>(outer)));
    result.trace.rankings.push_back(ranking);

    for (int numr = numhid; numr > 0; numr -= numc) {
      InnerStep step;
      step.outer = outer;
      step.numr = numr;
      PrecisionMap candidate =
          neuron_approx(result.map, numr, ranking.order, cfg.ladder);
      step.changed = candidate != result.map;
      if (step.changed) {
        step.val_acc = gibbs_accuracy(model, val, cfg.eval, &candidate);
        step.accepted = step.val_acc >= cfg.acc_min;
        if (step.accepted) {
          result.map = std::move(candidate);
          current_acc = step.val_acc;
        }
      }
      step.sumbit_after = sumbit(result.map);
      result.trace.steps.push_back(step);
      report_progress(progress,
                      "outer " + std::to_string(outer) + " numr " +
                          std::to_string(numr) +
                          (step.changed
                               ? (step.accepted ? " accepted " : " rejected ") +
                                     std::to_string(step.val_acc)
                               : " unchanged"));
    }

    OuterRecord rec;
    rec.outer = outer;
    const detail::ParamSnapshot before = detail::ParamSnapshot::take(model);
    TrainConfig retrain_cfg = cfg.retrain;
    retrain_cfg.rng_seed = derive_seed(cfg.retrain.rng_seed,
                                       seed_role::kRetrain,
                                       static_cast<uint64_t>(outer));
    retrain_quantized(model, result.map, train, retrain_cfg);
    rec.post_retrain_acc = gibbs_accuracy(model, val, cfg.eval, &result.map);
    if (rec.post_retrain_acc < cfg.acc_min) {
      before.restore(model);
      rec.retrain_reverted = true;
      rec.sumbit_end = sumbit(result.map);
      result.trace.outers.push_back(rec);
      result.trace.sumbit_history.push_back(rec.sumbit_end);
      report_progress(progress, "outer " + std::to_string(outer) +
                                    ": retrain reverted, stopping");
      break;
    }
    current_acc = rec.post_retrain_acc;
    rec.sumbit_end = sumbit(result.map);
    result.trace.outers.push_back(rec);
    result.trace.sumbit_history.push_back(rec.sumbit_end);
    const int64_t delta = prev_sumbit - rec.sumbit_end;
    prev_sumbit = rec.sumbit_end;
    report_progress(progress, "outer " + std::to_string(outer) + ": sumbit " +
                                  std::to_string(rec.sumbit_end) + " (delta " +
                                  std::to_string(delta) + "), acc " +
                                  std::to_string(rec.post_retrain_acc));
    if (delta <= 0) break;
  }
  result.final_val_acc = current_acc;
  check(result.final_val_acc >= cfg.acc_min,
        "ax_search: constraint violated at termination");
  return result;
}

}  // namespace axdbn

#endif  // AXDBN_AXSEARCH_HPP_
