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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "axdbn/dataio.hpp"

namespace axdbn {
namespace {

namespace fs = std::filesystem;

std::string mnist_dir() {
  const char* env = std::getenv("AXDBN_MNIST_DIR");
  return env != nullptr ? env : "/root/data/mnist";
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("axdbn_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path path() const { return path_; }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

TEST(Binarize, ThresholdAt128) {
  RawImages raw;
  raw.count = 1;
  raw.rows = 1;
  raw.cols = 3;
  raw.pixels = {0, 127, 128};
  raw.labels = {5};
  const Dataset ds = binarize(raw);
  EXPECT_EQ(ds.inputs, (std::vector<uint8_t>{0, 0, 1}));
  EXPECT_EQ(ds.labels[0], 5);
}

// Thresholding binary images (pixels already 0 or 255) changes nothing.
TEST(Binarize, IdempotentOnBinaryData) {
  Dataset ds = make_toy_clusters(64, 8, 3);
  RawImages raw;
  raw.count = static_cast<int>(ds.size());
  raw.rows = 1;
  raw.cols = 8;
  for (uint8_t b : ds.inputs) raw.pixels.push_back(b ? 255 : 0);
  for (int32_t l : ds.labels) raw.labels.push_back(static_cast<uint8_t>(l));
  EXPECT_EQ(binarize(raw, 2).inputs, ds.inputs);
}

TEST(LoadIdx, RoundTripAndValidation) {
  TempDir tmp;
  const Dataset toy = make_toy_clusters(50, 8, 17);
  const std::string img = (tmp.path() / "img").string();
  const std::string lbl = (tmp.path() / "lbl").string();
  write_idx(toy, img, lbl, 2, 4);
  const RawImages raw = load_idx(img, lbl);
  EXPECT_EQ(raw.count, 50);
  EXPECT_EQ(raw.rows * raw.cols, 8);
  const Dataset back = binarize(raw, 2);
  EXPECT_EQ(back.inputs, toy.inputs);
  for (std::size_t i = 0; i < toy.size(); ++i)
    EXPECT_EQ(back.labels[i], toy.labels[i]);

  // labels magic supplied as the images file
  EXPECT_THROW(load_idx(lbl, img), IoError);

  // truncated payload
  const std::string cut = (tmp.path() / "cut").string();
  {
    std::ifstream in(img, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    std::ofstream out(cut, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
  }
  EXPECT_THROW(load_idx(cut, lbl), IoError);

  // count mismatch
  const Dataset fewer = toy.slice(0, 40);
  const std::string lbl40 = (tmp.path() / "lbl40").string();
  write_idx(fewer, (tmp.path() / "img40").string(), lbl40, 2, 4);
  EXPECT_THROW(load_idx(img, lbl40), IoError);
}

TEST(Split, DefaultSuffixSplit) {
  Dataset ds = make_toy_clusters(100, 8, 5);
  const SplitResult s = split(ds, 25);
  EXPECT_EQ(s.train.size(), 75u);
  EXPECT_EQ(s.val.size(), 25u);
  for (int i = 0; i < 25; ++i) {
    EXPECT_EQ(s.val.labels[i], ds.labels[75 + i]);
    for (int d = 0; d < 8; ++d) EXPECT_EQ(s.val.row(i)[d], ds.row(75 + i)[d]);
  }
  const SplitResult empty_val = split(ds, 0);
  EXPECT_EQ(empty_val.train.size(), 100u);
  EXPECT_EQ(empty_val.val.size(), 0u);
  EXPECT_THROW(split(ds, 101), std::invalid_argument);
}

TEST(Split, SeededShuffleIsDeterministic) {
  Dataset ds = make_toy_clusters(100, 8, 5);
  const SplitResult a = split(ds, 30, 99);
  const SplitResult b = split(ds, 30, 99);
  EXPECT_EQ(a.train.inputs, b.train.inputs);
  EXPECT_EQ(a.val.labels, b.val.labels);
  const SplitResult c = split(ds, 30, 100);
  EXPECT_NE(a.val.labels, c.val.labels);
}

TEST(ToyClusters, SeparableAndDeterministic) {
  const Dataset a = make_toy_clusters(500, 8, 11);
  const Dataset b = make_toy_clusters(500, 8, 11);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
  // the majority vote over each half of the coordinates separates classes
  int correct = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    int first = 0, second = 0;
    for (int d = 0; d < 4; ++d) first += a.row(i)[d];
    for (int d = 4; d < 8; ++d) second += a.row(i)[d];
    correct += (first >= second ? 0 : 1) == a.labels[i];
  }
  EXPECT_GE(correct, 450);
}

TEST(Mnist, OfficialFilesLoadWhenPresent) {
  const std::string dir = mnist_dir();
  if (!fs::exists(fs::path(dir) / "train-images-idx3-ubyte"))
    GTEST_SKIP() << "MNIST IDX files not found under " << dir;
  const MnistData data = load_mnist_dir(dir);
  EXPECT_EQ(data.train.size(), 60000u);
  EXPECT_EQ(data.test.size(), 10000u);
  EXPECT_EQ(data.train.input_dim, 784);
  std::set<int32_t> classes(data.test.labels.begin(), data.test.labels.end());
  EXPECT_EQ(classes.size(), 10u);  // all ten digits present
  for (uint8_t v : data.train.inputs) ASSERT_LE(v, 1);
}

}  // namespace
}  // namespace axdbn
