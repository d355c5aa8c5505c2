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

#ifndef AXDBN_SERIALIZE_HPP_
#define AXDBN_SERIALIZE_HPP_

#include <bit>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>

#include "axdbn/model.hpp"
#include "axdbn/precision.hpp"

// Model container, version 1. Little-endian throughout:
//   magic "AXDBNMDL" | u32 version | u32 V | u32 C | u32 L | u32 sizes[L]
//   f64 visible_bias[V]
//   per layer: f64 W (prev x cur, row-major), f64 hidden_bias[cur]
//   f64 class_weights (C x N_L, row-major) | f64 class_bias[C]
//   u8 has_precision_map
//   if set: per hidden neuron (layer-major) u8 m, u8 n; PRUNED encoded (0,0)

namespace axdbn {

static_assert(std::endian::native == std::endian::little,
              "model container writes native little-endian scalars");

namespace detail {

inline constexpr char kModelMagic[8] = {'A', 'X', 'D', 'B',
                                        'N', 'M', 'D', 'L'};
inline constexpr uint32_t kModelVersion = 1;

inline void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
inline uint32_t read_u32(std::istream& in, const std::string& path) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw IoError("truncated model file: " + path);
  return v;
}
inline void write_f64s(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(
                                                  n * sizeof(double)));
}
inline void read_f64s(std::istream& in, double* p, std::size_t n,
                      const std::string& path) {
  in.read(reinterpret_cast<char*>(p),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
    throw IoError("truncated parameter block in model file: " + path);
}

}  // namespace detail

inline void save_model(const DdbnModel& m, const std::string& path,
                       const PrecisionMap* map = nullptr) {
  m.validate();
  if (map != nullptr)
    check(static_cast<int>(map->size()) == m.hidden_count(),
          "save_model: precision map length must equal hidden neuron count");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file: " + path);
  out.write(detail::kModelMagic, 8);
  detail::write_u32(out, detail::kModelVersion);
  detail::write_u32(out, static_cast<uint32_t>(m.visible));
  detail::write_u32(out, static_cast<uint32_t>(m.classes));
  detail::write_u32(out, static_cast<uint32_t>(m.depth()));
  for (int s : m.layer_sizes) detail::write_u32(out, static_cast<uint32_t>(s));
  detail::write_f64s(out, m.visible_bias.data(),
                     static_cast<std::size_t>(m.visible));
  for (int l = 0; l < m.depth(); ++l) {
    // Eigen stores column-major; emit row-major (prev index is the row).
    const MatrixXd& w = m.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double v = w(r, c);
        detail::write_f64s(out, &v, 1);
      }
    detail::write_f64s(out, m.hidden_bias[l].data(),
                       static_cast<std::size_t>(m.layer_sizes[l]));
  }
  for (Eigen::Index r = 0; r < m.class_weights.rows(); ++r)
    for (Eigen::Index c = 0; c < m.class_weights.cols(); ++c) {
      const double v = m.class_weights(r, c);
      detail::write_f64s(out, &v, 1);
    }
  detail::write_f64s(out, m.class_bias.data(),
                     static_cast<std::size_t>(m.classes));
  out.put(map != nullptr ? char(1) : char(0));
  if (map != nullptr) {
    for (const auto& p : *map) {
      out.put(p.pruned ? char(0) : static_cast<char>(p.format.integer_bits));
      out.put(p.pruned ? char(0) : static_cast<char>(p.format.fraction_bits));
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

struct LoadedModel {
  DdbnModel model;
  std::optional<PrecisionMap> precision_map;
};

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  char magic[8] = {};
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kModelMagic, 8) != 0)
    throw IoError("not an AXDBN model file: " + path);
  const uint32_t version = detail::read_u32(in, path);
  if (version != detail::kModelVersion)
    throw IoError("unsupported model format version " +
                  std::to_string(version) + " in " + path + " (want " +
                  std::to_string(detail::kModelVersion) + ")");
  LoadedModel out;
  DdbnModel& m = out.model;
  m.visible = static_cast<int>(detail::read_u32(in, path));
  m.classes = static_cast<int>(detail::read_u32(in, path));
  const uint32_t depth = detail::read_u32(in, path);
  if (depth == 0 || depth > 64) throw IoError("corrupt layer count in " + path);
  for (uint32_t l = 0; l < depth; ++l)
    m.layer_sizes.push_back(static_cast<int>(detail::read_u32(in, path)));
  m.visible_bias.resize(m.visible);
  detail::read_f64s(in, m.visible_bias.data(),
                    static_cast<std::size_t>(m.visible), path);
  for (uint32_t l = 0; l < depth; ++l) {
    const int prev = m.layer_input_size(static_cast<int>(l));
    const int cur = m.layer_sizes[l];
    MatrixXd w(prev, cur);
    for (int r = 0; r < prev; ++r)
      for (int c = 0; c < cur; ++c) {
        double v;
        detail::read_f64s(in, &v, 1, path);
        w(r, c) = v;
      }
    m.weights.push_back(std::move(w));
    VectorXd b(cur);
    detail::read_f64s(in, b.data(), static_cast<std::size_t>(cur), path);
    m.hidden_bias.push_back(std::move(b));
  }
  m.class_weights.resize(m.classes, m.top_size());
  for (int r = 0; r < m.classes; ++r)
    for (int c = 0; c < m.top_size(); ++c) {
      double v;
      detail::read_f64s(in, &v, 1, path);
      m.class_weights(r, c) = v;
    }
  m.class_bias.resize(m.classes);
  detail::read_f64s(in, m.class_bias.data(),
                    static_cast<std::size_t>(m.classes), path);
  const int has_map = in.get();
  if (has_map == std::istream::traits_type::eof())
    throw IoError("truncated model file: " + path);
  if (has_map == 1) {
    PrecisionMap map;
    for (int i = 0; i < m.hidden_count(); ++i) {
      const int mm = in.get();
      const int nn = in.get();
      if (mm == std::istream::traits_type::eof() ||
          nn == std::istream::traits_type::eof())
        throw IoError("truncated precision map in " + path);
      map.push_back(mm == 0 && nn == 0
                        ? NeuronPrecision::Pruned()
                        : NeuronPrecision(QFormat(mm, nn)));
    }
    out.precision_map = std::move(map);
  } else if (has_map != 0) {
    throw IoError("corrupt precision-map flag in " + path);
  }
  m.validate();
  return out;
}

}  // namespace axdbn

#endif  // AXDBN_SERIALIZE_HPP_
