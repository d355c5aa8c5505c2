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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "axdbn/inference.hpp"
#include "axdbn/serialize.hpp"
#include "oracles.hpp"

namespace axdbn {
namespace {

namespace fs = std::filesystem;

std::string temp_file(const char* tag) {
  return (fs::temp_directory_path() /
          (std::string("axdbn_ser_") + tag + "_" + std::to_string(::getpid())))
      .string();
}

TEST(Serialize, BitExactRoundTrip) {
  const DdbnModel m = oracle::random_model(9, 3, {5, 4}, 123);
  const std::string path = temp_file("roundtrip");
  PrecisionMap map;
  const BitwidthLadder ladder = default_ladder();
  for (int i = 0; i < m.hidden_count(); ++i) map.push_back(ladder[i % 6]);
  save_model(m, path, &map);
  const LoadedModel back = load_model(path);
  EXPECT_EQ(back.model.visible, 9);
  EXPECT_EQ(back.model.classes, 3);
  ASSERT_EQ(back.model.layer_sizes, (std::vector<int>{5, 4}));
  for (int l = 0; l < 2; ++l) {
    EXPECT_TRUE(back.model.weights[l] == m.weights[l]);
    EXPECT_TRUE(back.model.hidden_bias[l] == m.hidden_bias[l]);
  }
  EXPECT_TRUE(back.model.class_weights == m.class_weights);
  EXPECT_TRUE(back.model.visible_bias == m.visible_bias);
  EXPECT_TRUE(back.model.class_bias == m.class_bias);
  ASSERT_TRUE(back.precision_map.has_value());
  EXPECT_EQ(*back.precision_map, map);
  std::remove(path.c_str());
}

TEST(Serialize, ClassificationEquivalentAfterRoundTrip) {
  const DdbnModel m = oracle::random_model(10, 4, {6}, 321);
  const std::string path = temp_file("equiv");
  save_model(m, path);
  const LoadedModel back = load_model(path);
  EXPECT_FALSE(back.precision_map.has_value());
  RandomStream rng(5);
  for (int i = 0; i < 100; ++i) {
    const VectorXd x = oracle::random_binary(10, rng);
    EXPECT_EQ(free_energy_classify(back.model, x), free_energy_classify(m, x));
  }
  std::remove(path.c_str());
}

TEST(Serialize, RejectsCorruptHeaders) {
  const DdbnModel m = oracle::random_model(4, 2, {3}, 9);
  const std::string path = temp_file("corrupt");
  save_model(m, path);

  // flip the magic
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
  }
  EXPECT_THROW(load_model(path), IoError);

  // wrong version
  save_model(m, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const uint32_t bad = 999;
    f.write(reinterpret_cast<const char*>(&bad), 4);
  }
  try {
    load_model(path);
    FAIL() << "expected version error";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }

  // truncated parameter block
  save_model(m, path);
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 16);
  EXPECT_THROW(load_model(path), IoError);

  EXPECT_THROW(load_model(path + ".does_not_exist"), IoError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace axdbn
