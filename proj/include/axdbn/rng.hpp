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

#ifndef AXDBN_RNG_HPP_
#define AXDBN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "axdbn/common.hpp"

namespace axdbn {

/// splitmix64 step; used to derive independent role seeds from a run seed.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += UINT64_C(0x9E3779B97F4A7C15));
  z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
  z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
  return z ^ (z >> 31);
}

/// Deterministic sub-seed for (base, role, index) triples.
inline uint64_t derive_seed(uint64_t base, uint64_t role, uint64_t index = 0) {
  uint64_t s = base ^ (role * UINT64_C(0x9E3779B97F4A7C15));
  uint64_t a = splitmix64(s);
  s ^= index + UINT64_C(0xD1B54A32D192ED03);
  return a ^ splitmix64(s);
}

/// Seeded random stream over a standardized engine. All value conversions
/// are explicit so the produced sequences are identical across platforms;
/// std distributions are avoided on purpose (their algorithms are
/// implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Top n bits of one draw: a uniform integer in [0, 2^n). Models an n-bit
  /// pseudo-random pattern generator; consumes exactly one engine step, same
  /// as next_unit().
  uint64_t next_bits(int n) { return engine_() >> (64 - n); }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Standard normal via Box-Muller (both values used, in order).
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, bound) by rejection (unbiased).
  uint64_t next_below(uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % bound;
  }

  /// Fisher-Yates shuffle with a fixed step order.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Samples an index from a probability vector by CDF inversion.
  int next_categorical(std::span<const double> probs) {
    const double u = next_unit();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Role tags for derive_seed.
namespace seed_role {
inline constexpr uint64_t kInit = 1;       // parameter initialization
inline constexpr uint64_t kTrain = 2;      // CD sampling + shuffles, per layer
inline constexpr uint64_t kStacking = 3;   // binary states feeding layer l+1
inline constexpr uint64_t kEval = 4;       // classification streams
inline constexpr uint64_t kCriticality = 5;
inline constexpr uint64_t kSearch = 6;
inline constexpr uint64_t kRetrain = 7;
}  // namespace seed_role

}  // namespace axdbn

#endif  // AXDBN_RNG_HPP_
