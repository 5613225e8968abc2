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

#include "fedsched/experiment.h"

#include <algorithm>
#include <limits>

#include <spdlog/spdlog.h>

#include "fedsched/error.h"
#include "fedsched/fl_sim.h"
#include "fedsched/random.h"

namespace fedsched {

namespace {

// Stands in for training in dry runs: everybody returns, nothing is learned.
class NullTrainer : public Trainer {
 public:
  TrainerRoundResult TrainRound(int, std::span<const ClientId> participants) override {
    TrainerRoundResult r;
    for (ClientId id : participants) r.clients[id] = ClientRoundResult{true, 1.0};
    return r;
  }
};

ArmResult RunArm(const std::vector<PoolClient>& pool, const RunConfig& config,
                 const ExperimentOptions& options, const sim::SyntheticDataset& data,
                 SelectionPolicy policy) {
  SchedulerConfig sc = config.scheduler;
  sc.policy = policy;
  if (options.max_periods) sc.max_periods = *options.max_periods;
  // Both arms share the scheduler seed (dropouts) and the trainer seed
  // (initial weights and local shuffles).
  Scheduler scheduler(pool, sc, DeriveSeed(config.seed, "scheduler"));
  NullTrainer null_trainer;
  std::optional<sim::FedAvgTrainer> fedavg;
  Trainer* trainer = &null_trainer;
  if (options.train) {
    fedavg.emplace(data, config.training, DeriveSeed(config.seed, "trainer"));
    trainer = &*fedavg;
  }

  ArmResult arm;
  arm.policy = policy;
  arm.timeline = scheduler.RunTask(*trainer);
  arm.final_accuracy = arm.timeline.final_metric();
  arm.periods = static_cast<int>(arm.timeline.periods.size());
  if (options.train) {
    for (const RoundOutcome& r : arm.timeline.rounds) {
      if (r.global_metric >= config.accuracy_threshold) {
        arm.rounds_to_threshold = r.round_index + 1;
        break;
      }
    }
  }
  if (!arm.timeline.periods.empty()) {
    arm.min_selections = std::numeric_limits<int>::max();
    double nid = 0.0;
    int rounds = 0;
    for (const PeriodStats& p : arm.timeline.periods) {
      arm.min_selections = std::min(arm.min_selections, p.min_selections);
      arm.max_selections = std::max(arm.max_selections, p.max_selections);
      arm.undersized_subsets += p.undersized_subsets;
      nid += p.mean_subset_nid * p.rounds;
      rounds += p.rounds;
    }
    arm.mean_subset_nid = rounds > 0 ? nid / rounds : 0.0;
  }
  return arm;
}

nlohmann::json ArmToJson(const ArmResult& arm, bool trained) {
  nlohmann::json j = {{"policy", SelectionPolicyName(arm.policy)},
                      {"rounds", arm.timeline.rounds.size()},
                      {"periods", arm.periods},
                      {"min_selections_per_period", arm.min_selections},
                      {"max_selections_per_period", arm.max_selections},
                      {"mean_subset_nid", arm.mean_subset_nid},
                      {"undersized_subsets", arm.undersized_subsets}};
  if (trained) {
    j["final_accuracy"] = arm.final_accuracy;
    j["rounds_to_threshold"] =
        arm.rounds_to_threshold ? nlohmann::json(*arm.rounds_to_threshold) : nlohmann::json();
  }
  return j;
}

}  // namespace

ExperimentResult RunExperiment(const RunConfig& config, const ExperimentOptions& options) {
  config.Validate();
  ExperimentResult result;
  result.trained = options.train;
  sim::NonIidSpec spec = config.pool;
  spec.seed = DeriveSeed(config.seed, "pool");
  result.generated = sim::MakeNonIidPool(spec);

  if (config.selection.enabled) {
    sim::CandidateOptions co;
    co.cost_a = config.selection.cost_a;
    co.cost_b = config.selection.cost_b;
    co.weights = config.selection.weights;
    co.seed = DeriveSeed(config.seed, "candidates");
    const auto candidates = sim::MakeCandidates(result.generated, co);
    const auto eligible = FilterCandidates(candidates, config.selection.thresholds);
    if (config.selection.min_clients > 0) {
      const std::int64_t need = MinBudget(eligible, config.selection.min_clients);
      if (config.selection.budget < need) {
        throw Error(ErrorCode::kInfeasibleInstance,
                    "budget " + std::to_string(config.selection.budget) +
                        " cannot guarantee " + std::to_string(config.selection.min_clients) +
                        " clients; min_budget is " + std::to_string(need));
      }
    }
    result.selection = SelectGreedy(eligible, config.selection.budget);
    std::vector<char> keep(result.generated.size(), 0);
    for (ClientId id : result.selection->selected) keep[static_cast<std::size_t>(id)] = 1;
    for (const PoolClient& c : result.generated) {
      if (keep[static_cast<std::size_t>(c.id)]) result.pool.push_back(c);
    }
    spdlog::info("stage 1 kept {} of {} clients", result.pool.size(), result.generated.size());
  } else {
    result.pool = result.generated;
  }
  if (result.pool.empty()) throw Error(ErrorCode::kEmptyPool, "stage 1 selected nobody");

  sim::SyntheticDataset data;
  if (options.train) {
    sim::DataOptions dopt = config.data;
    dopt.seed = DeriveSeed(config.seed, "data");
    data = sim::MakeSyntheticDataset(result.pool, config.pool.n_classes, dopt);
  }
  result.scheduled = RunArm(result.pool, config, options, data, SelectionPolicy::kScheduled);
  if (options.run_random_arm) {
    result.random = RunArm(result.pool, config, options, data, SelectionPolicy::kRandom);
  }
  return result;
}

nlohmann::json SummaryToJson(const ExperimentResult& result, const RunConfig& config) {
  const bool trained = result.trained;
  nlohmann::json j = {{"seed", config.seed},
                      {"pool_type", sim::NonIidTypeName(config.pool.type)},
                      {"generated_clients", result.generated.size()},
                      {"pool_clients", result.pool.size()},
                      {"accuracy_threshold", config.accuracy_threshold},
                      {"scheduled", ArmToJson(result.scheduled, trained)}};
  if (result.selection) {
    j["selection"] = {{"total_score", result.selection->total_score},
                      {"total_cost", result.selection->total_cost}};
  }
  if (result.random) {
    j["random"] = ArmToJson(*result.random, trained);
    if (trained) {
      j["scheduled_final_acc"] = result.scheduled.final_accuracy;
      j["random_final_acc"] = result.random->final_accuracy;
    }
  }
  return j;
}

}  // namespace fedsched
