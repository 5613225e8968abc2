// Copyright 2026 The fedsched Authors.
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

// fedsched: pool generation, pool selection, subset schedules and simulation.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "fedsched/config.h"
#include "fedsched/error.h"
#include "fedsched/experiment.h"
#include "fedsched/fl_sim.h"
#include "fedsched/io.h"
#include "fedsched/pool_select.h"
#include "fedsched/random.h"
#include "fedsched/subset_gen.h"
#include "json.hpp"

namespace {

using fedsched::Error;
using fedsched::ErrorCode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void SetUpLogging() {
  auto logger = spdlog::stderr_color_mt("fedsched");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("FEDSCHED_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour it when asked for.
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
  }
}

void Emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    fedsched::io::WriteFileAtomic(path, content);
  }
}

std::vector<double> ParseList(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, std::string("bad number in ") + what + ": \"" + item + "\"");
    }
  }
  return out;
}

fedsched::ScoreVector ParseScoreVector(const std::string& text, const char* what) {
  const auto v = ParseList(text, what);
  if (v.size() != fedsched::kNumCriteria) {
    throw Error(ErrorCode::kConfig, std::string(what) + " needs " +
                                        std::to_string(fedsched::kNumCriteria) + " values");
  }
  fedsched::ScoreVector out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

struct GenerateArgs {
  std::string type;
  int clients = 100;
  int classes = 10;
  int samples = 60;
  double cost_a = 2.0;
  double cost_b = 5.0;
  std::string out;
};

int RunGenerate(const GenerateArgs& a, std::uint64_t seed) {
  const auto type = fedsched::sim::ParseNonIidType(a.type);
  if (!type) throw Error(ErrorCode::kConfig, "unknown pool type \"" + a.type + "\"");
  fedsched::sim::NonIidSpec spec;
  spec.type = *type;
  spec.n_clients = a.clients;
  spec.n_classes = a.classes;
  spec.samples_per_client = a.samples;
  spec.seed = fedsched::DeriveSeed(seed, "pool");
  const auto pool = fedsched::sim::MakeNonIidPool(spec);
  fedsched::sim::CandidateOptions co;
  co.cost_a = a.cost_a;
  co.cost_b = a.cost_b;
  co.seed = fedsched::DeriveSeed(seed, "candidates");
  const auto candidates = fedsched::sim::MakeCandidates(pool, co);
  const auto file = fedsched::io::MakeClientFile(pool, candidates, a.classes);
  Emit(a.out, fedsched::io::ClientFileToJson(file).dump(2) + "\n");
  return kExitOk;
}

// An empty optimum (zero budget) leaves nothing to approximate.
double RatioOrZero(double optimum, double achieved) {
  return optimum > 0.0 ? fedsched::ApproximationRatio(optimum, achieved) : 0.0;
}

struct SelectArgs {
  std::string clients;
  std::int64_t budget = 0;
  std::string method = "all";
  int min_clients = 0;
  std::string thresholds;
  std::string weights;
  std::string random_order;
  bool skip_overflow = false;
  std::string out;
};

int RunSelect(const SelectArgs& a, std::uint64_t seed) {
  using namespace fedsched;
  if (a.budget < 0) throw Error(ErrorCode::kConfig, "--budget must be non-negative");
  const io::ClientFile file = io::LoadClientFile(a.clients);
  Weights weights;
  weights.fill(1.0);
  if (!a.weights.empty()) weights = ParseScoreVector(a.weights, "--weights");
  std::vector<Candidate> candidates = io::ToCandidates(file, weights);
  if (!a.thresholds.empty()) {
    candidates = FilterCandidates(candidates, ParseScoreVector(a.thresholds, "--thresholds"));
  }
  if (a.min_clients > 0) {
    const std::int64_t need = MinBudget(candidates, a.min_clients);
    if (a.budget < need) {
      throw Error(ErrorCode::kInfeasibleInstance,
                  "budget " + std::to_string(a.budget) + " cannot guarantee " +
                      std::to_string(a.min_clients) + " clients; min_budget is " +
                      std::to_string(need));
    }
  }
  const OverflowRule rule = a.skip_overflow ? OverflowRule::kSkipAndContinue : OverflowRule::kStop;

  auto random_pick = [&]() {
    if (a.random_order.empty()) return SelectRandom(candidates, a.budget, DeriveSeed(seed, "random"), rule);
    std::vector<ClientId> order;
    std::stringstream ss(a.random_order);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const auto id = file.Find(name);
      if (!id) throw Error(ErrorCode::kConfig, "--random-order names unknown client \"" + name + "\"");
      order.push_back(*id);
    }
    PoolSelectionResult r = SelectInOrder(candidates, a.budget, order, rule);
    r.method = SelectionMethod::kRandom;
    return r;
  };

  json out;
  if (a.method == "all") {
    PoolSelectionResult dp = SelectDp(candidates, a.budget);
    PoolSelectionResult greedy = SelectGreedy(candidates, a.budget, rule);
    PoolSelectionResult random = random_pick();
    greedy.approx_ratio = RatioOrZero(dp.total_score, greedy.total_score);
    random.approx_ratio = RatioOrZero(dp.total_score, random.total_score);
    out = json{{"dp", io::SelectionToJson(dp, file)},
               {"greedy", io::SelectionToJson(greedy, file)},
               {"random", io::SelectionToJson(random, file)}};
  } else if (a.method == "dp") {
    out = io::SelectionToJson(SelectDp(candidates, a.budget), file);
  } else if (a.method == "greedy" || a.method == "random") {
    // Ratios need the optimum, which the DP provides.
    const double optimum = SelectDp(candidates, a.budget).total_score;
    PoolSelectionResult r = a.method == "greedy" ? SelectGreedy(candidates, a.budget, rule)
                                                 : random_pick();
    r.approx_ratio = RatioOrZero(optimum, r.total_score);
    out = io::SelectionToJson(r, file);
  } else {
    throw Error(ErrorCode::kConfig, "unknown method \"" + a.method + "\"");
  }
  Emit(a.out, out.dump(2) + "\n");
  return kExitOk;
}

struct SubsetsArgs {
  std::string clients;
  fedsched::SubsetGenConfig config;
  std::string out;
  std::string csv;
  std::string baseline;
  std::string baseline_csv;
};

int RunSubsets(const SubsetsArgs& a, std::uint64_t seed) {
  using namespace fedsched;
  const io::ClientFile file = io::LoadClientFile(a.clients);
  const std::vector<PoolClient> pool = io::ToPool(file);
  const SubsetSchedule schedule = GenerateSubsets(pool, a.config, DeriveSeed(seed, "subsets"));
  json out = io::ScheduleToJson(schedule, file);
  out["mean_nid"] = MeanSubsetNid(pool, schedule.subsets);
  if (!a.baseline.empty()) {
    if (a.baseline != "random") {
      throw Error(ErrorCode::kConfig, "unknown baseline \"" + a.baseline + "\"");
    }
    std::vector<std::size_t> sizes;
    for (const auto& s : schedule.subsets) sizes.push_back(s.size());
    const auto random = RandomSubsets(pool, sizes, DeriveSeed(seed, "random-subsets"));
    std::vector<double> nids;
    for (const auto& s : random) nids.push_back(MeanSubsetNid(pool, {&s, 1}));
    out["random_baseline"] = {{"subsets", io::SubsetsToJson(random, nids, file)},
                              {"mean_nid", MeanSubsetNid(pool, random)}};
    if (!a.baseline_csv.empty()) {
      io::WriteFileAtomic(a.baseline_csv, io::StackedHistogramCsv(random, file));
    }
  }
  if (!a.csv.empty()) io::WriteFileAtomic(a.csv, io::StackedHistogramCsv(schedule.subsets, file));
  Emit(a.out, out.dump(2) + "\n");
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::optional<int> periods;
  bool no_train = false;
  std::string out_dir = ".";
};

int RunSimulate(const SimulateArgs& a, std::optional<std::uint64_t> seed) {
  using namespace fedsched;
  RunConfig config = LoadRunConfig(a.config);
  if (seed) config.seed = *seed;
  ExperimentOptions options;
  options.train = !a.no_train;
  options.max_periods = a.periods;
  options.run_random_arm = !a.no_train;
  const ExperimentResult result = RunExperiment(config, options);

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  if (!a.no_train) {
    io::WriteFileAtomic((dir / "scheduled_metrics.csv").string(),
                        io::MetricsCsv(result.scheduled.timeline));
    io::WriteFileAtomic((dir / "random_metrics.csv").string(),
                        io::MetricsCsv(result.random->timeline));
  }
  const std::string summary = SummaryToJson(result, config).dump(2) + "\n";
  io::WriteFileAtomic((dir / "summary.json").string(), summary);
  std::cout << summary;
  return kExitOk;
}

int RunReport(const std::string& path) {
  using namespace fedsched;
  json s;
  try {
    s = json::parse(io::ReadFile(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  auto line = [](const json& arm) {
    std::ostringstream o;
    o << arm.value("policy", "?") << ": rounds=" << arm.value("rounds", 0)
      << " periods=" << arm.value("periods", 0);
    if (arm.contains("final_accuracy")) {
      o << " final_acc=" << io::FormatFixed(arm["final_accuracy"].get<double>());
      const json& r = arm["rounds_to_threshold"];
      o << " rounds_to_threshold=" << (r.is_null() ? std::string("never") : r.dump());
    }
    o << " selections/period=[" << arm.value("min_selections_per_period", 0) << ","
      << arm.value("max_selections_per_period", 0) << "]"
      << " mean_nid=" << io::FormatFixed(arm.value("mean_subset_nid", 0.0));
    return o.str();
  };
  std::cout << "pool " << s.value("pool_type", "?") << ", " << s.value("pool_clients", 0)
            << " clients, seed " << s.value("seed", 0) << "\n";
  if (s.contains("scheduled")) std::cout << line(s["scheduled"]) << "\n";
  if (s.contains("random")) std::cout << line(s["random"]) << "\n";
  if (s.contains("scheduled_final_acc") && s.contains("random_final_acc")) {
    const double gap = s["scheduled_final_acc"].get<double>() - s["random_final_acc"].get<double>();
    std::cout << "accuracy gap (scheduled - random): " << io::FormatFixed(gap) << "\n";
  }
  return kExitOk;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidRequirement:
    case ErrorCode::kInfeasibleInstance:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  SetUpLogging();
  CLI::App app("Client pool selection and fair subset scheduling for federated learning");
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Root seed for every random choice")->capture_default_str();
  app.fallthrough();

  std::function<int()> action;

  CLI::App* pool = app.add_subcommand("pool", "Generate or select client pools");
  pool->require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = pool->add_subcommand("generate", "Write a synthetic non-iid client file");
  generate->add_option("--type", gen.type, "one-label, two-labels or three-labels")->required();
  generate->add_option("--clients", gen.clients, "Number of clients")->check(CLI::PositiveNumber);
  generate->add_option("--classes", gen.classes, "Number of classes")->check(CLI::PositiveNumber);
  generate->add_option("--samples", gen.samples, "Samples per client")->check(CLI::PositiveNumber);
  generate->add_option("--cost-a", gen.cost_a, "Cost slope");
  generate->add_option("--cost-b", gen.cost_b, "Cost intercept");
  generate->add_option("--out", gen.out, "Output path (stdout if omitted)");
  generate->callback([&] { action = [&] { return RunGenerate(gen, seed.value_or(0)); }; });

  SelectArgs sel;
  CLI::App* select = pool->add_subcommand("select", "Select a pool under a budget");
  select->add_option("--clients", sel.clients, "Client file")->required();
  select->add_option("--budget", sel.budget, "Budget B")->required();
  select->add_option("--method", sel.method, "dp, greedy, random or all")
      ->check(CLI::IsMember({"dp", "greedy", "random", "all"}));
  select->add_option("--min-clients", sel.min_clients, "Required pool size n*");
  select->add_option("--thresholds", sel.thresholds, "11 comma-separated score thresholds");
  select->add_option("--weights", sel.weights, "11 comma-separated criterion weights");
  select->add_option("--random-order", sel.random_order,
                     "Comma-separated client ids replayed as the random draw");
  select->add_flag("--skip-overflow", sel.skip_overflow,
                   "Keep scanning past a candidate that does not fit");
  select->add_option("--out", sel.out, "Output path (stdout if omitted)");
  select->callback([&] { action = [&] { return RunSelect(sel, seed.value_or(0)); }; });

  SubsetsArgs sub;
  CLI::App* subsets = app.add_subcommand("subsets", "Generate one period of subsets");
  subsets->add_option("--clients", sub.clients, "Client file")->required();
  subsets->add_option("--n", sub.config.n, "Target subset size");
  subsets->add_option("--delta", sub.config.delta, "Size tolerance");
  subsets->add_option("--x-star", sub.config.x_star, "Max selections per client");
  subsets->add_option("--out", sub.out, "Schedule JSON path (stdout if omitted)");
  subsets->add_option("--csv", sub.csv, "Stacked-histogram CSV path");
  subsets->add_option("--baseline", sub.baseline, "Also draw size-matched subsets (random)")
      ->check(CLI::IsMember({"random"}));
  subsets->add_option("--baseline-csv", sub.baseline_csv, "Stacked-histogram CSV of the baseline");
  subsets->callback([&] {
    action = [&] {
      sub.config.Validate();
      return RunSubsets(sub, seed.value_or(0));
    };
  });

  SimulateArgs simargs;
  CLI::App* simulate = app.add_subcommand("simulate", "Run scheduled and random arms");
  simulate->add_option("--config", simargs.config, "YAML run configuration")->required();
  simulate->add_option("--periods", simargs.periods, "Cap on scheduling periods")
      ->check(CLI::PositiveNumber);
  simulate->add_flag("--no-train", simargs.no_train, "Schedule only; report fairness stats");
  simulate->add_option("--out-dir", simargs.out_dir, "Directory for CSVs and summary.json");
  simulate->callback([&] { action = [&] { return RunSimulate(simargs, seed); }; });

  std::string summary_path;
  CLI::App* report = app.add_subcommand("report", "Print a summary.json as text");
  report->add_option("summary", summary_path, "summary.json written by simulate")->required();
  report->callback([&] { action = [&] { return RunReport(summary_path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
