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

#ifndef AXDBN_COMMON_HPP_
#define AXDBN_COMMON_HPP_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace axdbn {

/// File/parse failures (bad magic, truncation, unreadable paths).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The accuracy-loss constraint cannot be met even at the widest format.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Contract check that stays active in release builds.
inline void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Optional progress sink for long-running phases. Null means silent.
using ProgressFn = std::function<void(const std::string&)>;

inline void report_progress(const ProgressFn& fn, const std::string& msg) {
  if (fn) fn(msg);
}

}  // namespace axdbn

#endif  // AXDBN_COMMON_HPP_
