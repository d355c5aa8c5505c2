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

#ifndef AXDBN_QFORMAT_HPP_
#define AXDBN_QFORMAT_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "axdbn/common.hpp"

namespace axdbn {

/// Signed fixed-point format Qm.n: m integer bits (sign included), n fractional
/// bits. Values are raw/2^n with raw in [-2^(m+n-1), 2^(m+n-1)-1], i.e. the
/// representable range is [-2^(m-1), 2^(m-1) - 2^-n] with step 2^-n.
struct QFormat {
  int integer_bits = 1;   // m, >= 1
  int fraction_bits = 0;  // n, >= 0

  QFormat() = default;
  QFormat(int m, int n) : integer_bits(m), fraction_bits(n) {
    if (m < 1 || n < 0 || m + n > 64)
      throw std::invalid_argument("QFormat: need m >= 1, n >= 0, m+n <= 64");
  }

  int total_bits() const { return integer_bits + fraction_bits; }
  double step() const { return std::ldexp(1.0, -fraction_bits); }
  // Note: for m+n > 53 these two are the nearest doubles, not exact endpoints.
  double max_value() const {
    return std::ldexp(1.0, integer_bits - 1) - step();
  }
  double min_value() const { return -std::ldexp(1.0, integer_bits - 1); }

  int64_t max_raw() const {
    return static_cast<int64_t>((UINT64_C(1) << (total_bits() - 1)) - 1);
  }
  int64_t min_raw() const { return -max_raw() - 1; }

  std::string to_string() const {
    return "Q" + std::to_string(integer_bits) + "." +
           std::to_string(fraction_bits);
  }

  /// Parses the textual form "Qm.n" (as used in configs and reports).
  static QFormat parse(std::string_view text) {
    if (text.size() < 4 || (text[0] != 'Q' && text[0] != 'q'))
      throw std::invalid_argument("QFormat: expected \"Qm.n\", got \"" +
                                  std::string(text) + "\"");
    const auto dot = text.find('.');
    if (dot == std::string_view::npos)
      throw std::invalid_argument("QFormat: missing '.' in \"" +
                                  std::string(text) + "\"");
    int m = 0, n = 0;
    try {
      m = std::stoi(std::string(text.substr(1, dot - 1)));
      n = std::stoi(std::string(text.substr(dot + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("QFormat: malformed \"" + std::string(text) +
                                  "\"");
    }
    return QFormat(m, n);
  }

  friend bool operator==(const QFormat& a, const QFormat& b) {
    return a.integer_bits == b.integer_bits &&
           a.fraction_bits == b.fraction_bits;
  }
};

/// Nearest representable raw value for x under fmt. Round to nearest, ties
/// away from zero; out-of-range values saturate to the endpoints.
inline int64_t quantize_raw(double x, QFormat fmt) {
  if (!std::isfinite(x)) throw std::domain_error("quantize: non-finite input");
  const double scaled = std::ldexp(x, fmt.fraction_bits);
  // 2^(m+n-1) is exact in double; anything at or past it saturates. This also
  // keeps llround away from values it cannot represent when m+n == 64.
  const double edge = std::ldexp(1.0, fmt.total_bits() - 1);
  if (scaled >= edge) return fmt.max_raw();
  if (scaled <= -edge) return fmt.min_raw();
  const int64_t r = std::llround(scaled);
  if (r > fmt.max_raw()) return fmt.max_raw();
  if (r < fmt.min_raw()) return fmt.min_raw();
  return r;
}

inline double raw_to_real(int64_t raw, QFormat fmt) {
  return std::ldexp(static_cast<double>(raw), -fmt.fraction_bits);
}

/// quantize(x) = nearest multiple of 2^-n within range, as a double.
inline double quantize(double x, QFormat fmt) {
  return raw_to_real(quantize_raw(x, fmt), fmt);
}

/// a + b in raw units, saturating at the format bounds (never wraps).
inline int64_t saturating_add_raw(int64_t a, int64_t b, QFormat fmt) {
  int64_t s;
  if (__builtin_add_overflow(a, b, &s))
    return b < 0 ? fmt.min_raw() : fmt.max_raw();
  if (s > fmt.max_raw()) return fmt.max_raw();
  if (s < fmt.min_raw()) return fmt.min_raw();
  return s;
}

/// One multiply-accumulate step of the LP2 pipeline: quantize(acc + w*x, fmt)
/// with a binary x. acc and w must already be representable in fmt.
inline double saturating_mac(double acc, double w, int x, QFormat fmt) {
  check(x == 0 || x == 1, "saturating_mac: x must be binary");
  int64_t r = quantize_raw(acc, fmt);
  if (x) r = saturating_add_raw(r, quantize_raw(w, fmt), fmt);
  return raw_to_real(r, fmt);
}

/// PLAN piecewise-linear sigmoid: four segments on |x| (breakpoints 1, 2.375,
/// 5), mirrored as 1 - f(|x|) for x <= 0. Shift/add-friendly constants.
inline double plan_sigmoid(double x) {
  const double a = std::fabs(x);
  double f;
  if (a > 5.0)
    f = 1.0;
  else if (a > 2.375)
    f = 0.03125 * a + 0.84375;
  else if (a > 1.0)
    f = 0.125 * a + 0.625;
  else
    f = 0.25 * a + 0.5;
  return x > 0.0 ? f : 1.0 - f;
}

inline double exact_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace axdbn

#endif  // AXDBN_QFORMAT_HPP_
