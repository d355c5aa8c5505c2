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

// End-to-end checks of the command-line tool on a small synthetic IDX
// dataset: exit codes, report schemas, config-file overlay, and the power
// model hand instance through the CLI.

#include <gtest/gtest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "axdbn/dataio.hpp"
#include "axdbn/serialize.hpp"
#include "oracles.hpp"

#ifndef AXDBN_CLI_PATH
#define AXDBN_CLI_PATH "tools/axdbn"
#endif

namespace axdbn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AXDBN_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::temp_directory_path() /
                        ("axdbn_cli_" + std::to_string(::getpid())));
    fs::create_directories(*dir_ / "data");
    Dataset toy = make_toy_clusters(2400, 64, 99);
    write_idx(toy.slice(0, 2000),
              (*dir_ / "data/train-images-idx3-ubyte").string(),
              (*dir_ / "data/train-labels-idx1-ubyte").string(), 8, 8);
    write_idx(toy.slice(2000, 400),
              (*dir_ / "data/t10k-images-idx3-ubyte").string(),
              (*dir_ / "data/t10k-labels-idx1-ubyte").string(), 8, 8);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
    dir_ = nullptr;
  }
  static std::string data_args() {
    return "--data-dir " + (*dir_ / "data").string() + " --val-size 400";
  }
  static inline fs::path* dir_ = nullptr;
};

TEST_F(CliFixture, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("--definitely-not-a-flag 2>/dev/null"), 2);
  EXPECT_EQ(run_cli("evaluate 2>/dev/null"), 2);  // missing required --model
  EXPECT_EQ(run_cli("--help >/dev/null"), 0);
}

TEST_F(CliFixture, IoErrorsExitThree) {
  EXPECT_EQ(run_cli("power --model /nonexistent.axdbn 2>/dev/null"), 3);
  EXPECT_EQ(run_cli("train --arch 8 --epochs 1 --seed 1 --data-dir /nonexistent --out " +
                    (*dir_ / "x").string() + " 2>/dev/null"),
            3);
}

TEST_F(CliFixture, TrainApproximateEvaluateFlow) {
  const std::string out = (*dir_ / "flow").string();
  ASSERT_EQ(run_cli("train --arch 10 --epochs 3 --seed 4 " + data_args() +
                    " --gibbs-rounds 20 --report-gibbs-rounds 20 --out " +
                    out + " --quiet >/dev/null 2>&1"),
            0);
  const std::string model = out + "/model_10_seed4.axdbn";
  ASSERT_TRUE(fs::exists(model));
  json metrics;
  std::ifstream(out + "/model_10_seed4_metrics.json") >> metrics;
  for (const char* key : {"fp_val_acc", "fp_test_acc", "seed"})
    EXPECT_TRUE(metrics.contains(key)) << key;

  ASSERT_EQ(run_cli("approximate --model " + model +
                    " --constraint 0.3 --metric random --seed 4 " +
                    data_args() +
                    " --gibbs-rounds 20 --report-gibbs-rounds 20 "
                    "--retrain-epochs 1 --criticality-samples 100 --out " +
                    out + "/ax --quiet >/dev/null 2>&1"),
            0);
  json summary;
  std::ifstream(out + "/ax/summary.json") >> summary;
  for (const char* key :
       {"final_avg_bitwidth", "final_acc_val", "final_acc_test",
        "sumbit_history", "power", "uniform_format"})
    EXPECT_TRUE(summary.contains(key)) << key;
  EXPECT_TRUE(fs::exists(out + "/ax/search_trace.csv"));
  EXPECT_TRUE(fs::exists(out + "/ax/ranking.csv"));
  EXPECT_TRUE(fs::exists(out + "/ax/power_report.json"));

  // search trace columns
  std::ifstream trace(out + "/ax/search_trace.csv");
  std::string header;
  std::getline(trace, header);
  EXPECT_EQ(header, "outer,numr,changed,accepted,val_acc,sumbit_after");

  // the approximated model file carries the precision map
  const LoadedModel back = load_model(out + "/ax/model_ax.axdbn");
  ASSERT_TRUE(back.precision_map.has_value());
  EXPECT_EQ(static_cast<int>(back.precision_map->size()), 10);

  // evaluate runs the quantized pipeline on the stored map
  ASSERT_EQ(run_cli("evaluate --model " + out + "/ax/model_ax.axdbn " +
                    data_args() +
                    " --split val --sigmoid plan --gibbs-rounds 20 --seed 4 "
                    "--out " +
                    out + "/eval.json --quiet >/dev/null 2>&1"),
            0);
  json eval;
  std::ifstream(out + "/eval.json") >> eval;
  EXPECT_TRUE(eval["quantized"].get<bool>());
  EXPECT_GT(eval["accuracy"].get<double>(), 0.4);
}

TEST_F(CliFixture, InfeasibleConstraintExitsFour) {
  const std::string out = (*dir_ / "infeasible").string();
  ASSERT_EQ(run_cli("train --arch 8 --epochs 1 --seed 2 " + data_args() +
                    " --gibbs-rounds 10 --report-gibbs-rounds 10 --out " +
                    out + " --quiet >/dev/null 2>&1"),
            0);
  // negative allowed loss pushes the floor above what any format reaches
  EXPECT_EQ(run_cli("approximate --model " + out + "/model_8_seed2.axdbn" +
                    " --constraint -0.5 --seed 2 " + data_args() +
                    " --gibbs-rounds 10 --out " + out +
                    "/ax --quiet >/dev/null 2>&1"),
            4);
  json failure;
  std::ifstream(out + "/ax/summary.json") >> failure;
  EXPECT_EQ(failure["status"], "infeasible");
}

// The power-model hand instance (x=4, c=2, three Q4.4 neurons, k=1)
// reproduced through a model file and the CLI.
TEST_F(CliFixture, PowerHandInstanceEndToEnd) {
  const DdbnModel m = oracle::random_model(4, 2, {3}, 5);
  const PrecisionMap map(3, NeuronPrecision(QFormat(4, 4)));
  const std::string model = (*dir_ / "power_hand.axdbn").string();
  save_model(m, model, &map);
  const std::string out = (*dir_ / "power_hand.json").string();
  ASSERT_EQ(run_cli("power --model " + model + " --samples 1 --out " + out +
                    " >/dev/null 2>&1"),
            0);
  json r;
  std::ifstream(out) >> r;
  EXPECT_DOUBLE_EQ(r["DT"].get<double>(), 254.0);
  EXPECT_DOUBLE_EQ(r["CW"].get<double>(), 15.0 * 0.5 + 8.0 * 1.0);
  EXPECT_DOUBLE_EQ(r["total"].get<double>(), 254.0 + 15.5);

  // a model without a map is costed as uniform 64-bit (with a warning)
  const std::string bare = (*dir_ / "power_bare.axdbn").string();
  save_model(m, bare);
  const std::string out2 = (*dir_ / "power_bare.json").string();
  ASSERT_EQ(run_cli("power --model " + bare + " --samples 1 --out " + out2 +
                    " >/dev/null 2>&1"),
            0);
  json r2;
  std::ifstream(out2) >> r2;
  EXPECT_DOUBLE_EQ(r2["savings_vs_64bit"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(r2["avg_bitwidth"].get<double>(), 64.0);
}

TEST_F(CliFixture, ConfigFileMirrorsFlagsAndFlagsWin) {
  const std::string out = (*dir_ / "config").string();
  fs::create_directories(out);
  const std::string cfg_path = out + "/run.json";
  {
    json cfg{{"arch", "9"},
             {"data-dir", (*dir_ / "data").string()},
             {"val-size", 400},
             {"epochs", 1},
             {"seed", 7},
             {"gibbs-rounds", 10},
             {"report-gibbs-rounds", 10},
             {"out", out}};
    std::ofstream(cfg_path) << cfg.dump();
  }
  // --epochs on the command line overrides the file's value
  ASSERT_EQ(run_cli("train --config " + cfg_path +
                    " --epochs 2 --quiet >/dev/null 2>&1"),
            0);
  json metrics;
  std::ifstream(out + "/model_9_seed7_metrics.json") >> metrics;
  EXPECT_EQ(metrics["epochs"].get<int>(), 2);
  EXPECT_EQ(metrics["arch"], "9");
  EXPECT_EQ(metrics["seed"].get<uint64_t>(), 7u);
}

TEST_F(CliFixture, MonteCarloSchemaAtToyScale) {
  const std::string out = (*dir_ / "mc").string();
  ASSERT_EQ(run_cli("montecarlo --arch 10 --seeds 3 --constraint 0.3 " +
                    data_args() +
                    " --epochs 2 --gibbs-rounds 15 --report-gibbs-rounds 15 "
                    "--retrain-epochs 1 --out " +
                    out + " --quiet >/dev/null 2>&1"),
            0);
  std::ifstream csv(out + "/montecarlo.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header,
            "seed,metric,status,fp_test_acc,ax_test_acc,avg_bitwidth,"
            "power_savings,final_val_acc,sumbit");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 2);  // one seed, both metrics

  json summary;
  std::ifstream(out + "/montecarlo_summary.json") >> summary;
  for (const char* metric : {"ce", "random"}) {
    ASSERT_TRUE(summary.contains(metric)) << metric;
    for (const char* field : {"test_acc", "avg_bitwidth", "power_savings"}) {
      const json& stats = summary[metric][field];
      for (const char* stat : {"median", "iqr", "mean", "stddev"})
        EXPECT_TRUE(stats.contains(stat)) << metric << "." << field;
      // single seed: median equals mean, spread is zero
      EXPECT_DOUBLE_EQ(stats["median"].get<double>(),
                       stats["mean"].get<double>());
      EXPECT_DOUBLE_EQ(stats["iqr"].get<double>(), 0.0);
      EXPECT_DOUBLE_EQ(stats["stddev"].get<double>(), 0.0);
    }
    EXPECT_TRUE(summary[metric].contains("bitwidth_histogram"));
  }
  EXPECT_TRUE(summary.contains("fp_test_acc"));
}

}  // namespace
}  // namespace axdbn
