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

#ifndef AXDBN_PRECISION_HPP_
#define AXDBN_PRECISION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "axdbn/qformat.hpp"

namespace axdbn {

/// One rung of the per-neuron bitwidth ladder: a fixed-point format, or the
/// neuron removed entirely (0 bits, constant-zero output).
struct NeuronPrecision {
  bool pruned = false;
  QFormat format{1, 0};  // ignored when pruned

  NeuronPrecision() = default;
  explicit NeuronPrecision(QFormat f) : pruned(false), format(f) {}

  static NeuronPrecision Pruned() {
    NeuronPrecision p;
    p.pruned = true;
    return p;
  }

  int bits() const { return pruned ? 0 : format.total_bits(); }

  std::string to_string() const {
    return pruned ? "PRUNED" : format.to_string();
  }

  static NeuronPrecision parse(std::string_view text) {
    if (text == "PRUNED" || text == "pruned") return Pruned();
    return NeuronPrecision(QFormat::parse(text));
  }

  friend bool operator==(const NeuronPrecision& a, const NeuronPrecision& b) {
    if (a.pruned != b.pruned) return false;
    return a.pruned || a.format == b.format;
  }
};

/// Per-hidden-neuron precision assignment, flattened layer-major (all of
/// layer 1, then layer 2, ...). Class neurons are implicitly Q8.8.
using PrecisionMap = std::vector<NeuronPrecision>;

/// Ordered search space, widest first. Default: Q8.56, Q8.8, Q6.6, Q4.4,
/// Q1.3, PRUNED.
using BitwidthLadder = std::vector<NeuronPrecision>;

inline const QFormat kClassFormat{8, 8};  // class neurons are 16-bit Q8.8

inline BitwidthLadder default_ladder() {
  return {NeuronPrecision(QFormat(8, 56)), NeuronPrecision(QFormat(8, 8)),
          NeuronPrecision(QFormat(6, 6)),  NeuronPrecision(QFormat(4, 4)),
          NeuronPrecision(QFormat(1, 3)),  NeuronPrecision::Pruned()};
}

/// Total assigned bits across hidden neurons; PRUNED contributes 0.
inline int64_t sumbit(const PrecisionMap& map) {
  int64_t total = 0;
  for (const auto& p : map) total += p.bits();
  return total;
}

/// Average neuron bitwidth with pruned neurons counted at 0 bits.
inline double average_bitwidth(const PrecisionMap& map) {
  if (map.empty()) return 0.0;
  return static_cast<double>(sumbit(map)) / static_cast<double>(map.size());
}

inline PrecisionMap uniform_map(std::size_t neurons, NeuronPrecision p) {
  return PrecisionMap(neurons, p);
}

/// Parses a comma-separated ladder such as "Q8.56,Q8.8,Q6.6,Q4.4,Q1.3,PRUNED".
inline BitwidthLadder parse_ladder(std::string_view text) {
  BitwidthLadder ladder;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = text.substr(start, comma - start);
    if (!item.empty()) ladder.push_back(NeuronPrecision::parse(item));
    start = comma + 1;
  }
  check(!ladder.empty(), "ladder: empty");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    check(ladder[i].bits() < ladder[i - 1].bits(),
          "ladder: must be strictly decreasing in total bits");
  return ladder;
}

}  // namespace axdbn

#endif  // AXDBN_PRECISION_HPP_
