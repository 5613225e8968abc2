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

#ifndef FEDSCHED_SCHEDULER_H_
#define FEDSCHED_SCHEDULER_H_

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "fedsched/client.h"
#include "fedsched/random.h"
#include "fedsched/subset_gen.h"

namespace fedsched {

enum class SelectionPolicy {
  kScheduled,  // knapsack-generated subsets
  kRandom,     // n clients drawn uniformly from the active pool per round
};

std::string_view SelectionPolicyName(SelectionPolicy policy);

struct ConvergenceCriterion {
  double min_delta = 0.001;
  // Periods without an improvement of min_delta before stopping; 0 disables.
  int patience = 3;
};

struct SchedulerConfig {
  double reputation_threshold = 0.5;
  int suspension_periods = 1;
  double dropout_rate = 0.0;
  int max_periods = 100;
  // Hard cap on rounds across the task; 0 means no cap.
  int max_rounds = 0;
  ConvergenceCriterion convergence;
  SelectionPolicy policy = SelectionPolicy::kScheduled;
  SubsetGenConfig subsets;

  void Validate() const;
};

struct ClientRoundResult {
  bool returned = false;
  double quality = 0.0;
};

struct TrainerRoundResult {
  std::map<ClientId, ClientRoundResult> clients;
  double global_metric = 0.0;
};

// Executes one training round for the clients that are reachable. Clients
// absent from the result are treated as not having returned an update.
class Trainer {
 public:
  virtual ~Trainer() = default;
  virtual TrainerRoundResult TrainRound(int round_index,
                                        std::span<const ClientId> participants) = 0;
};

// Per-round q_t and b_t collected over the current period.
struct RoundAccumulator {
  std::vector<double> quality;
  std::vector<int> behavior;
};

struct PoolState {
  std::set<ClientId> active;
  std::map<ClientId, int> suspended;  // periods left
  std::set<ClientId> departed;
  // Availability for the next period; a missing entry means available.
  std::map<ClientId, bool> availability;
  std::map<ClientId, RoundAccumulator> rounds;
  // s_rep of the period that just finished.
  std::map<ClientId, double> reputation;

  static PoolState FromClients(std::span<const PoolClient> clients);
  // Throws if a client is in more than one of active / suspended / departed.
  void CheckInvariants() const;
};

struct RoundOutcome {
  int round_index = 0;
  int period = 0;
  int subset_index = 0;
  std::vector<ClientId> participants;
  std::map<ClientId, bool> returned;
  std::map<ClientId, double> quality;  // returned clients only
  double global_metric = 0.0;
  double subset_nid = 0.0;
  bool trainer_failed = false;

  int num_returned() const;
};

struct PeriodStats {
  int period = 0;
  int rounds = 0;
  int active_clients = 0;
  int min_selections = 0;
  int max_selections = 0;
  double mean_subset_nid = 0.0;
  int undersized_subsets = 0;
  std::vector<ClientId> dropped;
  std::vector<ClientId> suspended_after;
};

struct PeriodResult {
  std::vector<RoundOutcome> rounds;
  std::vector<std::vector<ClientId>> subsets;
  PeriodStats stats;
  bool truncated = false;  // hit the round cap before the period finished
};

struct TaskScores {
  double q_task = 0.0;
  double b_task = 0.0;
};

struct MetricsTimeline {
  std::vector<RoundOutcome> rounds;
  std::vector<PeriodStats> periods;
  // Per-task quality and behavior over every participated round.
  std::map<ClientId, TaskScores> task_scores;

  double final_metric() const { return rounds.empty() ? 0.0 : rounds.back().global_metric; }
};

// End of a period: suspend low-reputation and unavailable clients, count
// down suspensions and re-admit clients whose suspension ended.
PoolState UpdatePool(PoolState state, const SchedulerConfig& config);

// Runs scheduling periods over a client pool. Owns the pool state.
class Scheduler {
 public:
  Scheduler(std::vector<PoolClient> pool, SchedulerConfig config, std::uint64_t seed);

  // One full period: generate subsets, train one round per subset,
  // compute reputations, update the pool.
  PeriodResult RunPeriod(Trainer& trainer);

  // Periods until convergence, max_periods or max_rounds.
  MetricsTimeline RunTask(Trainer& trainer);

  const PoolState& state() const { return state_; }
  PoolState& mutable_state() { return state_; }
  int rounds_executed() const { return rounds_executed_; }

 private:
  std::vector<std::vector<ClientId>> PlanPeriod(const std::vector<PoolClient>& active,
                                                PeriodStats& stats);
  double SubsetNid(std::span<const ClientId> subset) const;

  std::vector<PoolClient> pool_;
  std::map<ClientId, std::size_t> index_;
  SchedulerConfig config_;
  std::uint64_t seed_;
  PoolState state_;
  int period_ = 0;
  int rounds_executed_ = 0;
  double last_metric_ = 0.0;
  std::map<ClientId, RoundAccumulator> task_rounds_;
};

}  // namespace fedsched

#endif  // FEDSCHED_SCHEDULER_H_
