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

// Command-line workbench: train DRBMs/DDBNs, run the bitwidth approximation
// search, evaluate models, report the energy cost model, and drive seeded
// Monte-Carlo sweeps. Reports are plain CSV/JSON and carry no timestamps, so
// a rerun with the same configuration and seeds reproduces them byte for
// byte.
//
// Exit codes: 0 success, 2 usage, 3 I/O or parse failure, 4 infeasible
// accuracy constraint, 5 internal error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "axdbn/axdbn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitInternal = 5;

std::vector<int> parse_arch(const std::string& text) {
  std::vector<int> arch;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto dash = text.find('-', start);
    if (dash == std::string::npos) dash = text.size();
    const std::string item = text.substr(start, dash - start);
    if (!item.empty()) arch.push_back(std::stoi(item));
    start = dash + 1;
  }
  if (arch.empty()) throw CLI::ValidationError("--arch", "empty architecture");
  for (int s : arch)
    if (s <= 0) throw CLI::ValidationError("--arch", "layer sizes must be > 0");
  return arch;
}

std::vector<uint64_t> parse_seeds(const std::string& text) {
  std::vector<uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(start, comma - start);
    if (!item.empty()) seeds.push_back(std::stoull(item));
    start = comma + 1;
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "empty seed list");
  return seeds;
}

std::string arch_name(const std::vector<int>& arch) {
  std::string s;
  for (std::size_t i = 0; i < arch.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(arch[i]);
  }
  return s;
}

void log_line(const std::string& msg) { std::cerr << msg << "\n"; }

axdbn::ProgressFn progress_logger(bool quiet) {
  if (quiet) return nullptr;
  return [](const std::string& m) { log_line(m); };
}

axdbn::PowerConstants load_power_constants(const std::string& path) {
  axdbn::PowerConstants c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw axdbn::IoError("cannot open power constants file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw axdbn::IoError("malformed power constants file " + path + ": " +
                         e.what());
  }
  if (j.contains("A")) c.bit_transfer = j["A"].get<double>();
  for (int q : {4, 8, 12, 16, 64}) {
    const std::string key = "B_" + std::to_string(q);
    if (j.contains(key)) c.mac[q] = j[key].get<double>();
  }
  c.validate();
  return c;
}

json power_report_json(const axdbn::PowerReport& r, long samples) {
  return json{{"DT", r.data_transfer},
              {"CW", r.compute},
              {"total", r.total},
              {"savings_vs_64bit", r.savings_vs_64bit},
              {"samples", samples}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw axdbn::IoError("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

// Applies JSON config values to options the user did not pass on the command
// line (flags override the file).
class ConfigOverlay {
 public:
  ConfigOverlay(CLI::App* cmd, std::string path) : cmd_(cmd) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw axdbn::IoError("cannot open config file: " + path);
    try {
      in >> values_;
    } catch (const json::exception& e) {
      throw axdbn::IoError("malformed config file " + path + ": " + e.what());
    }
  }

  template <typename T>
  void apply(const std::string& name, T& var) const {
    if (values_.is_null() || !values_.contains(name)) return;
    const CLI::Option* opt = cmd_->get_option("--" + name);
    if (opt->count() > 0) return;
    var = values_[name].get<T>();
  }

 private:
  CLI::App* cmd_;
  json values_;
};

struct DataOptions {
  std::string data_dir;
  int val_size = 10000;

  axdbn::MnistData load() const {
    if (data_dir.empty())
      throw CLI::ValidationError("--data-dir", "data directory required");
    return axdbn::load_mnist_dir(data_dir);
  }
};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainCmd {
  std::string arch_text = "300";
  std::string config;
  DataOptions data;
  std::string out_dir = ".";
  uint64_t seed = 1;
  axdbn::TrainConfig train;
  int eval_rounds = 100;
  int report_rounds = 300;
  bool quiet = false;
};

json train_one(const TrainCmd& o, const axdbn::MnistData& mnist,
               const std::vector<int>& arch, uint64_t seed,
               const std::string& model_path) {
  const axdbn::SplitResult split = axdbn::split(mnist.train, o.data.val_size);
  axdbn::TrainConfig cfg = o.train;
  cfg.rng_seed = seed;
  const auto progress = progress_logger(o.quiet);
  axdbn::report_progress(progress, "training " + arch_name(arch) + " seed " +
                                       std::to_string(seed));
  const axdbn::DdbnModel model =
      axdbn::train_layerwise(arch, split.train, cfg, progress);
  axdbn::save_model(model, model_path);

  axdbn::SamplerConfig val_eval;
  val_eval.gibbs_rounds = o.eval_rounds;
  val_eval.rng_seed = axdbn::derive_seed(seed, axdbn::seed_role::kEval);
  axdbn::SamplerConfig test_eval = val_eval;
  test_eval.gibbs_rounds = o.report_rounds;
  json metrics{
      {"seed", seed},
      {"arch", arch_name(arch)},
      {"epochs", cfg.epochs},
      {"fp_val_acc", axdbn::gibbs_accuracy(model, split.val, val_eval)},
      {"fp_test_acc", axdbn::gibbs_accuracy(model, mnist.test, test_eval)},
      {"fp_test_acc_fe", axdbn::free_energy_accuracy(model, mnist.test)},
      {"fp_val_acc_fe", axdbn::free_energy_accuracy(model, split.val)},
      {"model_file", fs::path(model_path).filename().string()}};
  return metrics;
}

int run_train(const TrainCmd& o) {
  const std::vector<int> arch = parse_arch(o.arch_text);
  const axdbn::MnistData mnist = o.data.load();
  fs::create_directories(o.out_dir);
  const std::string stem =
      "model_" + arch_name(arch) + "_seed" + std::to_string(o.seed);
  const std::string model_path =
      (fs::path(o.out_dir) / (stem + ".axdbn")).string();
  const json metrics = train_one(o, mnist, arch, o.seed, model_path);
  const std::string metrics_path =
      (fs::path(o.out_dir) / (stem + "_metrics.json")).string();
  write_json(metrics_path, metrics);
  std::cout << metrics.dump(2) << "\n";
  log_line("wrote " + model_path);
  log_line("wrote " + metrics_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// approximate
// ---------------------------------------------------------------------------

struct ApproximateCmd {
  std::string model_path;
  std::string config;
  DataOptions data;
  std::string out_dir = ".";
  double constraint = 0.01;
  std::string metric = "ce";
  std::string ladder_text;
  uint64_t seed = 1;
  int eval_rounds = 100;
  int report_rounds = 300;
  int retrain_epochs = 2;
  int numc = 0;
  int criticality_samples = 2000;
  std::string power_constants_path;
  long power_samples = 10000;
  bool quiet = false;
};

json approximate_one(const ApproximateCmd& o, const axdbn::MnistData& mnist,
                     axdbn::DdbnModel model, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const axdbn::SplitResult split = axdbn::split(mnist.train, o.data.val_size);
  const auto progress = progress_logger(o.quiet);

  axdbn::SearchConfig cfg;
  if (!o.ladder_text.empty()) cfg.ladder = axdbn::parse_ladder(o.ladder_text);
  cfg.metric = o.metric == "random" ? axdbn::CriticalityMetric::kRandom
                                    : axdbn::CriticalityMetric::kCrossEntropy;
  cfg.eval.gibbs_rounds = o.eval_rounds;
  cfg.eval.rng_seed = axdbn::derive_seed(o.seed, axdbn::seed_role::kEval);
  cfg.eval.sigmoid = axdbn::SigmoidKind::kPlan;
  cfg.retrain.epochs = o.retrain_epochs;
  cfg.retrain.rng_seed = o.seed;
  cfg.numc = o.numc;
  cfg.criticality_samples = o.criticality_samples;
  cfg.rng_seed = o.seed;

  // The accuracy floor: full-precision validation accuracy on the same
  // Gibbs channel (exact sigmoid, no quantization) minus the allowed loss.
  axdbn::SamplerConfig fp_eval = cfg.eval;
  fp_eval.sigmoid = axdbn::SigmoidKind::kExact;
  const double fp_val_acc = axdbn::gibbs_accuracy(model, split.val, fp_eval);
  cfg.acc_min = fp_val_acc - o.constraint;
  axdbn::report_progress(progress, "fp val acc " + std::to_string(fp_val_acc) +
                                       ", acc_min " +
                                       std::to_string(cfg.acc_min));

  const axdbn::SearchResult result =
      axdbn::ax_search(model, cfg, split.train, split.val, progress);

  // Artifacts: approximated model (map attached), the trace, the rankings,
  // the power report and a run summary.
  const std::string model_out =
      (fs::path(out_dir) / "model_ax.axdbn").string();
  axdbn::save_model(model, model_out, &result.map);

  axdbn::CsvWriter trace_csv(
      {"outer", "numr", "changed", "accepted", "val_acc", "sumbit_after"});
  for (const axdbn::InnerStep& s : result.trace.steps)
    trace_csv.append_row({std::to_string(s.outer), std::to_string(s.numr),
                          std::to_string(int(s.changed)),
                          std::to_string(int(s.accepted)),
                          axdbn::fmt_double(s.val_acc),
                          std::to_string(s.sumbit_after)});
  trace_csv.write((fs::path(out_dir) / "search_trace.csv").string());

  axdbn::CsvWriter ranking_csv({"outer", "layer", "index", "score", "rank"});
  for (std::size_t outer = 0; outer < result.trace.rankings.size(); ++outer) {
    const axdbn::CriticalityRanking& r = result.trace.rankings[outer];
    std::vector<int> rank_of(r.order.size());
    for (std::size_t pos = 0; pos < r.order.size(); ++pos)
      rank_of[r.order[pos]] = static_cast<int>(pos);
    int flat = 0;
    for (int l = 0; l < model.depth(); ++l)
      for (int j = 0; j < model.layer_sizes[l]; ++j, ++flat)
        ranking_csv.append_row(
            {std::to_string(outer + 1), std::to_string(l + 1),
             std::to_string(j), axdbn::fmt_double(r.scores[flat]),
             std::to_string(rank_of[flat])});
  }
  ranking_csv.write((fs::path(out_dir) / "ranking.csv").string());

  axdbn::PowerArch parch{model.visible, model.classes, model.layer_sizes};
  const axdbn::PowerConstants constants =
      load_power_constants(o.power_constants_path);
  const axdbn::PowerReport power =
      axdbn::power_report(parch, result.map, o.power_samples, constants);
  write_json((fs::path(out_dir) / "power_report.json").string(),
             power_report_json(power, o.power_samples));

  axdbn::SamplerConfig test_eval = cfg.eval;
  test_eval.gibbs_rounds = o.report_rounds;
  const double test_acc =
      axdbn::gibbs_accuracy(model, mnist.test, test_eval, &result.map);

  std::map<std::string, int> format_histogram;
  for (const axdbn::NeuronPrecision& p : result.map)
    ++format_histogram[p.to_string()];

  json summary{{"seed", o.seed},
               {"metric", o.metric},
               {"constraint", o.constraint},
               {"fp_val_acc", fp_val_acc},
               {"acc_min", cfg.acc_min},
               {"uniform_format", result.trace.uniform_format},
               {"final_avg_bitwidth", axdbn::average_bitwidth(result.map)},
               {"final_sumbit", axdbn::sumbit(result.map)},
               {"final_acc_val", result.final_val_acc},
               {"final_acc_test", test_acc},
               {"sumbit_history", result.trace.sumbit_history},
               {"bitwidth_histogram", format_histogram},
               {"power", power_report_json(power, o.power_samples)}};
  write_json((fs::path(out_dir) / "summary.json").string(), summary);
  return summary;
}

int run_approximate(const ApproximateCmd& o) {
  const axdbn::MnistData mnist = o.data.load();
  axdbn::LoadedModel loaded = axdbn::load_model(o.model_path);
  try {
    const json summary =
        approximate_one(o, mnist, std::move(loaded.model), o.out_dir);
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
  } catch (const axdbn::InfeasibleError& e) {
    fs::create_directories(o.out_dir);
    const json failure{{"status", "infeasible"},
                       {"error", e.what()},
                       {"seed", o.seed},
                       {"constraint", o.constraint},
                       {"metric", o.metric}};
    write_json((fs::path(o.out_dir) / "summary.json").string(), failure);
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  }
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateCmd {
  std::string model_path;
  std::string config;
  DataOptions data;
  std::string split_name = "test";
  std::string method = "gibbs";
  std::string sigmoid = "exact";
  int gibbs_rounds = 300;
  uint64_t seed = 1;
  std::string out_path;
  bool quiet = false;
};

int run_evaluate(const EvaluateCmd& o) {
  const axdbn::MnistData mnist = o.data.load();
  const axdbn::LoadedModel loaded = axdbn::load_model(o.model_path);
  const axdbn::SplitResult split = axdbn::split(mnist.train, o.data.val_size);
  const axdbn::Dataset* ds = nullptr;
  if (o.split_name == "test")
    ds = &mnist.test;
  else if (o.split_name == "val")
    ds = &split.val;
  else if (o.split_name == "train")
    ds = &split.train;
  else
    throw CLI::ValidationError("--split", "expected test, val or train");

  double acc = 0.0;
  if (o.method == "free-energy") {
    acc = axdbn::free_energy_accuracy(loaded.model, *ds);
  } else if (o.method == "gibbs") {
    axdbn::SamplerConfig cfg;
    cfg.gibbs_rounds = o.gibbs_rounds;
    cfg.rng_seed = axdbn::derive_seed(o.seed, axdbn::seed_role::kEval);
    cfg.sigmoid = o.sigmoid == "plan" ? axdbn::SigmoidKind::kPlan
                                      : axdbn::SigmoidKind::kExact;
    const axdbn::PrecisionMap* map =
        loaded.precision_map ? &*loaded.precision_map : nullptr;
    acc = axdbn::gibbs_accuracy(loaded.model, *ds, cfg, map,
                                progress_logger(o.quiet));
  } else {
    throw CLI::ValidationError("--method", "expected gibbs or free-energy");
  }
  json out{{"model", fs::path(o.model_path).filename().string()},
           {"split", o.split_name},
           {"method", o.method},
           {"sigmoid", o.sigmoid},
           {"gibbs_rounds", o.gibbs_rounds},
           {"seed", o.seed},
           {"quantized", loaded.precision_map.has_value()},
           {"accuracy", acc}};
  std::cout << out.dump(2) << "\n";
  if (!o.out_path.empty()) write_json(o.out_path, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// power
// ---------------------------------------------------------------------------

struct PowerCmd {
  std::string model_path;
  std::string config;
  std::string constants_path;
  long samples = 10000;
  std::string out_path;
};

int run_power(const PowerCmd& o) {
  const axdbn::LoadedModel loaded = axdbn::load_model(o.model_path);
  const axdbn::PowerConstants constants =
      load_power_constants(o.constants_path);
  axdbn::PowerArch arch{loaded.model.visible, loaded.model.classes,
                        loaded.model.layer_sizes};
  axdbn::PrecisionMap map;
  if (loaded.precision_map) {
    map = *loaded.precision_map;
  } else {
    std::cerr << "warning: model carries no precision map; assuming uniform "
                 "Q8.56\n";
    map = axdbn::uniform_map(loaded.model.hidden_count(),
                             axdbn::NeuronPrecision(axdbn::QFormat(8, 56)));
  }
  const axdbn::PowerReport r =
      axdbn::power_report(arch, map, o.samples, constants);
  json out = power_report_json(r, o.samples);
  out["avg_bitwidth"] = axdbn::average_bitwidth(map);
  std::cout << out.dump(2) << "\n";
  if (!o.out_path.empty()) write_json(o.out_path, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// montecarlo
// ---------------------------------------------------------------------------

struct MonteCarloCmd {
  std::string arch_text = "100-200";
  std::string config;
  DataOptions data;
  std::string out_dir = ".";
  double constraint = 0.01;
  std::string seeds_text = "1,2,3,4,5";
  std::string ladder_text;
  axdbn::TrainConfig train;
  int eval_rounds = 100;
  int report_rounds = 300;
  int retrain_epochs = 2;
  int numc = 0;
  std::string power_constants_path;
  long power_samples = 10000;
  bool quiet = false;
};

int run_montecarlo(const MonteCarloCmd& o) {
  const std::vector<int> arch = parse_arch(o.arch_text);
  const std::vector<uint64_t> seeds = parse_seeds(o.seeds_text);
  const axdbn::MnistData mnist = o.data.load();
  fs::create_directories(o.out_dir);

  axdbn::CsvWriter rows({"seed", "metric", "status", "fp_test_acc",
                         "ax_test_acc", "avg_bitwidth", "power_savings",
                         "final_val_acc", "sumbit"});
  struct Agg {
    std::vector<double> test_acc, bits, savings;
  };
  std::map<std::string, Agg> agg;
  std::vector<double> fp_accs;
  std::map<std::string, std::map<std::string, int>> histograms;

  for (uint64_t seed : seeds) {
    TrainCmd tc;
    tc.data = o.data;
    tc.train = o.train;
    tc.eval_rounds = o.eval_rounds;
    tc.report_rounds = o.report_rounds;
    tc.quiet = o.quiet;
    const fs::path seed_dir =
        fs::path(o.out_dir) / ("seed" + std::to_string(seed));
    fs::create_directories(seed_dir);
    const std::string model_path = (seed_dir / "model_fp.axdbn").string();
    const json train_metrics = train_one(tc, mnist, arch, seed, model_path);
    write_json((seed_dir / "train_metrics.json").string(), train_metrics);
    const double fp_test = train_metrics["fp_test_acc_fe"].get<double>();
    fp_accs.push_back(fp_test);

    for (const std::string metric : {"ce", "random"}) {
      ApproximateCmd ac;
      ac.data = o.data;
      ac.constraint = o.constraint;
      ac.metric = metric;
      ac.ladder_text = o.ladder_text;
      ac.seed = seed;
      ac.eval_rounds = o.eval_rounds;
      ac.report_rounds = o.report_rounds;
      ac.retrain_epochs = o.retrain_epochs;
      ac.numc = o.numc;
      ac.power_constants_path = o.power_constants_path;
      ac.power_samples = o.power_samples;
      ac.quiet = o.quiet;
      const std::string sub = (seed_dir / metric).string();
      try {
        axdbn::DdbnModel model = axdbn::load_model(model_path).model;
        const json summary = approximate_one(ac, mnist, std::move(model), sub);
        const double bits = summary["final_avg_bitwidth"].get<double>();
        const double savings =
            summary["power"]["savings_vs_64bit"].get<double>();
        const double test_acc = summary["final_acc_test"].get<double>();
        rows.append_row(
            {std::to_string(seed), metric, "ok", axdbn::fmt_double(fp_test),
             axdbn::fmt_double(test_acc), axdbn::fmt_double(bits),
             axdbn::fmt_double(savings),
             axdbn::fmt_double(summary["final_acc_val"].get<double>()),
             std::to_string(summary["final_sumbit"].get<long>())});
        agg[metric].test_acc.push_back(test_acc);
        agg[metric].bits.push_back(bits);
        agg[metric].savings.push_back(savings);
        for (const auto& [fmt, count] :
             summary["bitwidth_histogram"].get<std::map<std::string, int>>())
          histograms[metric][fmt] += count;
      } catch (const axdbn::InfeasibleError& e) {
        rows.append_row({std::to_string(seed), metric, "infeasible", "", "",
                         "", "", "", ""});
        log_line("seed " + std::to_string(seed) + " " + metric +
                 ": infeasible (" + e.what() + ")");
      }
    }
  }

  rows.write((fs::path(o.out_dir) / "montecarlo.csv").string());

  auto stats_json = [](const axdbn::SummaryStats& s) {
    return json{{"median", s.median},
                {"iqr", s.iqr},
                {"mean", s.mean},
                {"stddev", s.stddev}};
  };
  json summary{{"arch", arch_name(arch)},
               {"constraint", o.constraint},
               {"seeds", seeds},
               {"fp_test_acc", stats_json(axdbn::summarize(fp_accs))}};
  for (const auto& [metric, a] : agg) {
    summary[metric] =
        json{{"runs", a.test_acc.size()},
             {"test_acc", stats_json(axdbn::summarize(a.test_acc))},
             {"avg_bitwidth", stats_json(axdbn::summarize(a.bits))},
             {"power_savings", stats_json(axdbn::summarize(a.savings))},
             {"bitwidth_histogram", histograms[metric]}};
  }
  write_json((fs::path(o.out_dir) / "montecarlo_summary.json").string(),
             summary);
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

void add_train_flags(CLI::App* cmd, axdbn::TrainConfig& t) {
  cmd->add_option("--epochs", t.epochs, "CD training epochs per layer");
  cmd->add_option("--learning-rate", t.learning_rate, "CD learning rate");
  cmd->add_option("--batch-size", t.batch_size, "minibatch size");
  cmd->add_option("--cd-steps", t.cd_steps, "Gibbs steps per CD update");
  cmd->add_option("--momentum", t.momentum, "initial momentum");
  cmd->add_option("--momentum-final", t.momentum_final,
                  "momentum after the switch epoch");
  cmd->add_option("--momentum-switch-epoch", t.momentum_switch_epoch,
                  "epoch index at which momentum switches");
  cmd->add_option("--weight-decay", t.weight_decay, "L2 weight decay");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "axdbn: discriminative RBM/DBN training, per-neuron fixed-point "
      "approximation search, and energy cost reporting"};
  app.require_subcommand(1);

  TrainCmd train;
  CLI::App* ctrain = app.add_subcommand(
      "train", "train a full-precision model and report its accuracy");
  ctrain->add_option("--arch", train.arch_text,
                     "hidden layer sizes, e.g. 300 or 100-200");
  ctrain->add_option("--config", train.config, "JSON config file");
  ctrain->add_option("--data-dir", train.data.data_dir,
                     "directory with the four MNIST IDX files");
  ctrain->add_option("--val-size", train.data.val_size,
                     "training rows held out for validation");
  ctrain->add_option("--out", train.out_dir, "output directory");
  ctrain->add_option("--seed", train.seed, "run seed");
  ctrain->add_option("--gibbs-rounds", train.eval_rounds,
                     "sampling rounds for validation accuracy");
  ctrain->add_option("--report-gibbs-rounds", train.report_rounds,
                     "sampling rounds for reported test accuracy");
  ctrain->add_flag("--quiet", train.quiet, "suppress progress output");
  add_train_flags(ctrain, train.train);

  ApproximateCmd approx;
  CLI::App* capprox = app.add_subcommand(
      "approximate",
      "uniform bitwidth reduction followed by the criticality-ordered "
      "per-neuron search with retraining");
  capprox->add_option("--model", approx.model_path, "trained model file")
      ->required();
  capprox->add_option("--config", approx.config, "JSON config file");
  capprox->add_option("--data-dir", approx.data.data_dir,
                      "directory with the four MNIST IDX files");
  capprox->add_option("--val-size", approx.data.val_size,
                      "training rows held out for validation");
  capprox->add_option("--out", approx.out_dir, "output directory");
  capprox->add_option("--constraint", approx.constraint,
                      "allowed accuracy loss, e.g. 0.01");
  capprox->add_option("--metric", approx.metric, "ce or random")
      ->check(CLI::IsMember({"ce", "random"}));
  capprox->add_option(
      "--ladder", approx.ladder_text,
      "bitwidth ladder, e.g. Q8.56,Q8.8,Q6.6,Q4.4,Q1.3,PRUNED");
  capprox->add_option("--seed", approx.seed, "run seed");
  capprox->add_option("--gibbs-rounds", approx.eval_rounds,
                      "sampling rounds per search evaluation");
  capprox->add_option("--report-gibbs-rounds", approx.report_rounds,
                      "sampling rounds for reported test accuracy");
  capprox->add_option("--retrain-epochs", approx.retrain_epochs,
                      "retraining epochs per outer iteration");
  capprox->add_option("--numc", approx.numc,
                      "neuron step size (0 = numhid/10)");
  capprox->add_option("--criticality-samples", approx.criticality_samples,
                      "training samples used for criticality scores");
  capprox->add_option("--power-constants", approx.power_constants_path,
                      "JSON file with A and B_q constants");
  capprox->add_option("--power-samples", approx.power_samples,
                      "classification count k in the power model");
  capprox->add_flag("--quiet", approx.quiet, "suppress progress output");

  EvaluateCmd eval;
  CLI::App* ceval = app.add_subcommand(
      "evaluate", "classification accuracy of a model file on a split");
  ceval->add_option("--model", eval.model_path, "model file")->required();
  ceval->add_option("--config", eval.config, "JSON config file");
  ceval->add_option("--data-dir", eval.data.data_dir,
                    "directory with the four MNIST IDX files");
  ceval->add_option("--val-size", eval.data.val_size,
                    "training rows held out for validation");
  ceval->add_option("--split", eval.split_name, "test, val or train");
  ceval->add_option("--method", eval.method, "gibbs or free-energy");
  ceval->add_option("--sigmoid", eval.sigmoid, "exact or plan")
      ->check(CLI::IsMember({"exact", "plan"}));
  ceval->add_option("--gibbs-rounds", eval.gibbs_rounds, "sampling rounds");
  ceval->add_option("--seed", eval.seed, "run seed");
  ceval->add_option("--out", eval.out_path, "also write the JSON here");
  ceval->add_flag("--quiet", eval.quiet, "suppress progress output");

  PowerCmd power;
  CLI::App* cpower = app.add_subcommand(
      "power", "data-transfer + compute cost of a model's precision map");
  cpower->add_option("--model", power.model_path, "model file")->required();
  cpower->add_option("--config", power.config, "JSON config file");
  cpower->add_option("--power-constants", power.constants_path,
                     "JSON file with A and B_q constants");
  cpower->add_option("--samples", power.samples,
                     "classification count k in the power model");
  cpower->add_option("--out", power.out_path, "also write the JSON here");

  MonteCarloCmd mc;
  CLI::App* cmc = app.add_subcommand(
      "montecarlo",
      "train + approximate across seeds for both metrics; emits per-seed "
      "rows and aggregate statistics");
  cmc->add_option("--arch", mc.arch_text, "hidden layer sizes");
  cmc->add_option("--config", mc.config, "JSON config file");
  cmc->add_option("--data-dir", mc.data.data_dir,
                  "directory with the four MNIST IDX files");
  cmc->add_option("--val-size", mc.data.val_size,
                  "training rows held out for validation");
  cmc->add_option("--out", mc.out_dir, "output directory");
  cmc->add_option("--constraint", mc.constraint, "allowed accuracy loss");
  cmc->add_option("--seeds", mc.seeds_text, "comma-separated seed list");
  cmc->add_option("--ladder", mc.ladder_text, "bitwidth ladder");
  cmc->add_option("--gibbs-rounds", mc.eval_rounds,
                  "sampling rounds per search evaluation");
  cmc->add_option("--report-gibbs-rounds", mc.report_rounds,
                  "sampling rounds for reported accuracy");
  cmc->add_option("--retrain-epochs", mc.retrain_epochs,
                  "retraining epochs per outer iteration");
  cmc->add_option("--numc", mc.numc, "neuron step size (0 = numhid/10)");
  cmc->add_option("--power-constants", mc.power_constants_path,
                  "JSON file with A and B_q constants");
  cmc->add_option("--power-samples", mc.power_samples,
                  "classification count k in the power model");
  cmc->add_flag("--quiet", mc.quiet, "suppress progress output");
  add_train_flags(cmc, mc.train);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ctrain) {
      ConfigOverlay overlay(ctrain, train.config);
      overlay.apply("arch", train.arch_text);
      overlay.apply("data-dir", train.data.data_dir);
      overlay.apply("val-size", train.data.val_size);
      overlay.apply("out", train.out_dir);
      overlay.apply("seed", train.seed);
      overlay.apply("epochs", train.train.epochs);
      overlay.apply("learning-rate", train.train.learning_rate);
      overlay.apply("batch-size", train.train.batch_size);
      overlay.apply("cd-steps", train.train.cd_steps);
      overlay.apply("momentum", train.train.momentum);
      overlay.apply("momentum-final", train.train.momentum_final);
      overlay.apply("momentum-switch-epoch",
                    train.train.momentum_switch_epoch);
      overlay.apply("weight-decay", train.train.weight_decay);
      overlay.apply("gibbs-rounds", train.eval_rounds);
      overlay.apply("report-gibbs-rounds", train.report_rounds);
      return run_train(train);
    }
    if (*capprox) {
      ConfigOverlay overlay(capprox, approx.config);
      overlay.apply("data-dir", approx.data.data_dir);
      overlay.apply("val-size", approx.data.val_size);
      overlay.apply("out", approx.out_dir);
      overlay.apply("constraint", approx.constraint);
      overlay.apply("metric", approx.metric);
      overlay.apply("ladder", approx.ladder_text);
      overlay.apply("seed", approx.seed);
      overlay.apply("gibbs-rounds", approx.eval_rounds);
      overlay.apply("report-gibbs-rounds", approx.report_rounds);
      overlay.apply("retrain-epochs", approx.retrain_epochs);
      overlay.apply("numc", approx.numc);
      overlay.apply("criticality-samples", approx.criticality_samples);
      overlay.apply("power-constants", approx.power_constants_path);
      overlay.apply("power-samples", approx.power_samples);
      return run_approximate(approx);
    }
    if (*ceval) {
      ConfigOverlay overlay(ceval, eval.config);
      overlay.apply("data-dir", eval.data.data_dir);
      overlay.apply("val-size", eval.data.val_size);
      overlay.apply("split", eval.split_name);
      overlay.apply("method", eval.method);
      overlay.apply("sigmoid", eval.sigmoid);
      overlay.apply("gibbs-rounds", eval.gibbs_rounds);
      overlay.apply("seed", eval.seed);
      return run_evaluate(eval);
    }
    if (*cpower) {
      ConfigOverlay overlay(cpower, power.config);
      overlay.apply("power-constants", power.constants_path);
      overlay.apply("samples", power.samples);
      return run_power(power);
    }
    if (*cmc) {
      ConfigOverlay overlay(cmc, mc.config);
      overlay.apply("arch", mc.arch_text);
      overlay.apply("data-dir", mc.data.data_dir);
      overlay.apply("val-size", mc.data.val_size);
      overlay.apply("out", mc.out_dir);
      overlay.apply("constraint", mc.constraint);
      overlay.apply("seeds", mc.seeds_text);
      overlay.apply("ladder", mc.ladder_text);
      overlay.apply("gibbs-rounds", mc.eval_rounds);
      overlay.apply("report-gibbs-rounds", mc.report_rounds);
      overlay.apply("retrain-epochs", mc.retrain_epochs);
      overlay.apply("numc", mc.numc);
      overlay.apply("power-constants", mc.power_constants_path);
      overlay.apply("power-samples", mc.power_samples);
      overlay.apply("epochs", mc.train.epochs);
      overlay.apply("learning-rate", mc.train.learning_rate);
      overlay.apply("batch-size", mc.train.batch_size);
      overlay.apply("cd-steps", mc.train.cd_steps);
      overlay.apply("momentum", mc.train.momentum);
      overlay.apply("momentum-final", mc.train.momentum_final);
      overlay.apply("momentum-switch-epoch", mc.train.momentum_switch_epoch);
      overlay.apply("weight-decay", mc.train.weight_decay);
      return run_montecarlo(mc);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const axdbn::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const axdbn::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
