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

#ifndef AXDBN_DATAIO_HPP_
#define AXDBN_DATAIO_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "axdbn/common.hpp"
#include "axdbn/rng.hpp"

namespace axdbn {

/// Labeled binary input vectors. Inputs are stored row-major as bytes in
/// {0, 1}; read-only after construction, shareable across threads.
struct Dataset {
  int input_dim = 0;
  int num_classes = 0;
  std::vector<uint8_t> inputs;  // size() * input_dim entries
  std::vector<int32_t> labels;

  std::size_t size() const { return labels.size(); }
  const uint8_t* row(std::size_t i) const {
    return inputs.data() + i * static_cast<std::size_t>(input_dim);
  }

  Dataset slice(std::size_t begin, std::size_t count) const {
    Dataset out;
    out.input_dim = input_dim;
    out.num_classes = num_classes;
    out.inputs.assign(row(begin), row(begin) + count * input_dim);
    out.labels.assign(labels.begin() + begin, labels.begin() + begin + count);
    return out;
  }
};

/// Raw pixel images as loaded from IDX files (one byte per pixel).
struct RawImages {
  int count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> pixels;  // count * rows * cols
  std::vector<uint8_t> labels;  // count
};

namespace detail {

inline uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated IDX header: " + path);
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) |
         (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

}  // namespace detail

/// Parses a big-endian IDX image/label file pair (magic 2051 / 2049),
/// validating dimensions and byte counts.
inline RawImages load_idx(const std::string& images_path,
                          const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open images file: " + images_path);
  const uint32_t magic_img = detail::read_be32(img, images_path);
  if (magic_img != 2051)
    throw IoError("bad images magic " + std::to_string(magic_img) + " in " +
                  images_path + " (want 2051)");
  RawImages out;
  out.count = static_cast<int>(detail::read_be32(img, images_path));
  out.rows = static_cast<int>(detail::read_be32(img, images_path));
  out.cols = static_cast<int>(detail::read_be32(img, images_path));
  const std::size_t want =
      std::size_t(out.count) * std::size_t(out.rows) * std::size_t(out.cols);
  out.pixels.resize(want);
  img.read(reinterpret_cast<char*>(out.pixels.data()),
           static_cast<std::streamsize>(want));
  if (static_cast<std::size_t>(img.gcount()) != want)
    throw IoError("truncated images payload in " + images_path + ": want " +
                  std::to_string(want) + " bytes, got " +
                  std::to_string(img.gcount()));

  std::ifstream lbl(labels_path, std::ios::binary);
  if (!lbl) throw IoError("cannot open labels file: " + labels_path);
  const uint32_t magic_lbl = detail::read_be32(lbl, labels_path);
  if (magic_lbl != 2049)
    throw IoError("bad labels magic " + std::to_string(magic_lbl) + " in " +
                  labels_path + " (want 2049)");
  const uint32_t n_lbl = detail::read_be32(lbl, labels_path);
  if (static_cast<int>(n_lbl) != out.count)
    throw IoError("image/label count mismatch: " + std::to_string(out.count) +
                  " images vs " + std::to_string(n_lbl) + " labels");
  out.labels.resize(n_lbl);
  lbl.read(reinterpret_cast<char*>(out.labels.data()),
           static_cast<std::streamsize>(n_lbl));
  if (static_cast<std::size_t>(lbl.gcount()) != n_lbl)
    throw IoError("truncated labels payload in " + labels_path);
  return out;
}

/// Fixed 0.5 threshold on [0,1]-normalized intensities: byte >= 128 -> 1.
inline Dataset binarize(const RawImages& raw, int num_classes = 10) {
  Dataset ds;
  ds.input_dim = raw.rows * raw.cols;
  ds.num_classes = num_classes;
  ds.inputs.resize(raw.pixels.size());
  for (std::size_t i = 0; i < raw.pixels.size(); ++i)
    ds.inputs[i] = raw.pixels[i] >= 128 ? 1 : 0;
  ds.labels.assign(raw.labels.begin(), raw.labels.end());
  return ds;
}

/// Writes a dataset back out as an IDX image/label file pair (pixel value
/// 255 for set bits). Used by the CLI tests and toy fixtures.
inline void write_idx(const Dataset& ds, const std::string& images_path,
                      const std::string& labels_path, int rows, int cols) {
  check(rows * cols == ds.input_dim, "write_idx: rows*cols != input_dim");
  auto be32 = [](std::ostream& o, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    o.write(reinterpret_cast<char*>(b), 4);
  };
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot write " + images_path);
  be32(img, 2051);
  be32(img, static_cast<uint32_t>(ds.size()));
  be32(img, static_cast<uint32_t>(rows));
  be32(img, static_cast<uint32_t>(cols));
  for (uint8_t v : ds.inputs) img.put(v ? char(255) : char(0));
  std::ofstream lbl(labels_path, std::ios::binary);
  if (!lbl) throw IoError("cannot write " + labels_path);
  be32(lbl, 2049);
  be32(lbl, static_cast<uint32_t>(ds.size()));
  for (int32_t v : ds.labels) lbl.put(static_cast<char>(v));
}

struct SplitResult {
  Dataset train;
  Dataset val;
};

/// Deterministic train/validation split. seed == 0 keeps dataset order and
/// moves the last val_size rows to validation; a nonzero seed shuffles
/// (Fisher-Yates) before the cut.
inline SplitResult split(const Dataset& ds, std::size_t val_size,
                         uint64_t seed = 0) {
  check(val_size <= ds.size(), "split: val_size exceeds dataset size");
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (seed != 0) {
    RandomStream rng(seed);
    rng.shuffle(order);
  }
  SplitResult out;
  for (Dataset* part : {&out.train, &out.val}) {
    part->input_dim = ds.input_dim;
    part->num_classes = ds.num_classes;
  }
  const std::size_t train_size = ds.size() - val_size;
  auto append = [&](Dataset& dst, std::size_t idx) {
    const uint8_t* r = ds.row(idx);
    dst.inputs.insert(dst.inputs.end(), r, r + ds.input_dim);
    dst.labels.push_back(ds.labels[idx]);
  };
  for (std::size_t i = 0; i < train_size; ++i) append(out.train, order[i]);
  for (std::size_t i = train_size; i < ds.size(); ++i) append(out.val, order[i]);
  return out;
}

/// Two Gaussian clusters in `dim` dimensions thresholded to bits; labels are
/// the cluster ids. Linearly separable with high probability at sigma 0.6.
inline Dataset make_toy_clusters(std::size_t count, int dim, uint64_t seed,
                                 double sigma = 0.6) {
  Dataset ds;
  ds.input_dim = dim;
  ds.num_classes = 2;
  ds.inputs.reserve(count * dim);
  ds.labels.reserve(count);
  RandomStream rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(rng.next_bits(1));
    for (int d = 0; d < dim; ++d) {
      // cluster 0 centers the first half of the coordinates at +1,
      // cluster 1 the second half
      const bool hot = (d < dim / 2) == (label == 0);
      const double g = (hot ? 1.0 : -1.0) + sigma * rng.next_gaussian();
      ds.inputs.push_back(g >= 0.0 ? 1 : 0);
    }
    ds.labels.push_back(label);
  }
  return ds;
}

struct MnistData {
  Dataset train;  // full 60k
  Dataset test;   // 10k
};

/// Loads the four standard IDX files from a directory and binarizes them.
inline MnistData load_mnist_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  auto p = [&](const char* name) { return (fs::path(dir) / name).string(); };
  MnistData d;
  d.train = binarize(
      load_idx(p("train-images-idx3-ubyte"), p("train-labels-idx1-ubyte")));
  d.test = binarize(
      load_idx(p("t10k-images-idx3-ubyte"), p("t10k-labels-idx1-ubyte")));
  return d;
}

}  // namespace axdbn

#endif  // AXDBN_DATAIO_HPP_
