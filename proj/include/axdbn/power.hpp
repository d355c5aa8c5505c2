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

#ifndef AXDBN_POWER_HPP_
#define AXDBN_POWER_HPP_

#include <map>
#include <vector>

#include "axdbn/precision.hpp"

namespace axdbn {

/// Network shape as the cost model sees it: x input units, c class units,
/// hidden layer widths bottom-up.
struct PowerArch {
  int inputs = 0;
  int classes = 0;
  std::vector<int> layer_sizes;
};

/// Abstract energy constants: A per bit moved, B_q per q-bit MAC. The
/// hardware-derived values are deployment inputs; these defaults are
/// placeholders on the same relative scale.
struct PowerConstants {
  double bit_transfer = 1.0;                         // A
  std::map<int, double> mac = {{4, 0.3},  {8, 0.5},  // B_q
                               {12, 0.75}, {16, 1.0}, {64, 6.0}};

  double mac_cost(int q) const {
    auto it = mac.find(q);
    check(it != mac.end(), "power: no MAC constant for this bitwidth");
    return it->second;
  }
  void validate() const {
    check(bit_transfer > 0.0, "power: A must be positive");
    double prev = 0.0;
    for (const auto& [q, b] : mac) {
      check(b > 0.0, "power: B_q must be positive");
      check(b >= prev, "power: B_q must be non-decreasing in q");
      prev = b;
    }
  }
};

struct PowerReport {
  double data_transfer = 0.0;   // DT
  double compute = 0.0;         // CW
  double total = 0.0;           // DT + CW
  double savings_vs_64bit = 0.0;
};

namespace detail {

/// Per-layer histogram of neuron bitwidths; pruned neurons are dropped here
/// (q = 0: no parameter bits, no MACs, and no fan-out seen by the next
/// layer).
struct LayerCounts {
  std::vector<std::map<int, int>> per_q;  // q -> count, per layer
  std::vector<int> alive;                 // non-pruned count per layer
};

inline LayerCounts count_formats(const PowerArch& arch,
                                 const PrecisionMap& map) {
  int total = 0;
  for (int s : arch.layer_sizes) total += s;
  check(static_cast<int>(map.size()) == total,
        "power: precision map does not match architecture");
  LayerCounts out;
  int offset = 0;
  for (int s : arch.layer_sizes) {
    std::map<int, int> hist;
    int alive = 0;
    for (int j = 0; j < s; ++j) {
      const NeuronPrecision& p = map[offset + j];
      if (p.pruned) continue;
      ++hist[p.bits()];
      ++alive;
    }
    out.per_q.push_back(std::move(hist));
    out.alive.push_back(alive);
    offset += s;
  }
  return out;
}

}  // namespace detail

/// Off-chip to on-chip transfer cost:
/// DT = A((x+1) sum_q q N^q_h1 + sum_l (N_hl + 1) sum_q q N^q_h(l+1)
///        + 16 (N_hL + 1) c + k (x + c)).
inline double data_transfer_cost(const PowerArch& arch,
                                 const PrecisionMap& map, long samples,
                                 const PowerConstants& constants) {
  check(samples >= 0, "power: negative sample count");
  constants.validate();
  const auto counts = detail::count_formats(arch, map);
  const int L = static_cast<int>(arch.layer_sizes.size());
  double bits = 0.0;
  for (const auto& [q, n] : counts.per_q[0])
    bits += static_cast<double>(arch.inputs + 1) * q * n;
  for (int l = 0; l + 1 < L; ++l)
    for (const auto& [q, n] : counts.per_q[l + 1])
      bits += static_cast<double>(counts.alive[l] + 1) * q * n;
  bits += 16.0 * (counts.alive[L - 1] + 1) * arch.classes;
  bits += static_cast<double>(samples) * (arch.inputs + arch.classes);
  return constants.bit_transfer * bits;
}

/// MAC workload cost:
/// CW = k((x+1) sum_q B_q N^q_h1 + sum_l (N_hl + 1) sum_q B_q N^q_h(l+1)
///        + B_16 (N_hL + 1) c).
inline double compute_cost(const PowerArch& arch, const PrecisionMap& map,
                           long samples, const PowerConstants& constants) {
  check(samples >= 0, "power: negative sample count");
  constants.validate();
  const auto counts = detail::count_formats(arch, map);
  const int L = static_cast<int>(arch.layer_sizes.size());
  double per_sample = 0.0;
  for (const auto& [q, n] : counts.per_q[0])
    per_sample += static_cast<double>(arch.inputs + 1) * constants.mac_cost(q) * n;
  for (int l = 0; l + 1 < L; ++l)
    for (const auto& [q, n] : counts.per_q[l + 1])
      per_sample +=
          static_cast<double>(counts.alive[l] + 1) * constants.mac_cost(q) * n;
  per_sample += constants.mac_cost(16) * (counts.alive[L - 1] + 1) *
                arch.classes;
  return static_cast<double>(samples) * per_sample;
}

/// DT + CW plus savings relative to the same architecture held uniformly at
/// 64-bit with every neuron present.
inline PowerReport power_report(const PowerArch& arch, const PrecisionMap& map,
                                long samples, const PowerConstants& constants) {
  PowerReport r;
  r.data_transfer = data_transfer_cost(arch, map, samples, constants);
  r.compute = compute_cost(arch, map, samples, constants);
  r.total = r.data_transfer + r.compute;
  int total_neurons = 0;
  for (int s : arch.layer_sizes) total_neurons += s;
  const PrecisionMap baseline(total_neurons, NeuronPrecision(QFormat(8, 56)));
  const double base_total =
      data_transfer_cost(arch, baseline, samples, constants) +
      compute_cost(arch, baseline, samples, constants);
  r.savings_vs_64bit = base_total > 0.0 ? 1.0 - r.total / base_total : 0.0;
  return r;
}

}  // namespace axdbn

#endif  // AXDBN_POWER_HPP_
