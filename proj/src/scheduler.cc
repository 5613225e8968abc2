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

#include "fedsched/scheduler.h"

#include <algorithm>
#include <exception>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "fedsched/error.h"

namespace fedsched {

std::string_view SelectionPolicyName(SelectionPolicy policy) {
  switch (policy) {
    case SelectionPolicy::kScheduled: return "scheduled";
    case SelectionPolicy::kRandom: return "random";
  }
  return "unknown";
}

void SchedulerConfig::Validate() const {
  if (dropout_rate < 0.0 || dropout_rate > 1.0) {
    throw Error(ErrorCode::kConfig, "dropout_rate must lie in [0, 1], got " +
                                        std::to_string(dropout_rate));
  }
  if (suspension_periods < 1) {
    throw Error(ErrorCode::kConfig, "suspension_periods must be at least 1");
  }
  if (max_periods < 1) throw Error(ErrorCode::kConfig, "max_periods must be at least 1");
  if (max_rounds < 0) throw Error(ErrorCode::kConfig, "max_rounds must be non-negative");
  if (convergence.patience < 0) {
    throw Error(ErrorCode::kConfig, "convergence patience must be non-negative");
  }
  subsets.Validate();
}

PoolState PoolState::FromClients(std::span<const PoolClient> clients) {
  PoolState state;
  for (const PoolClient& c : clients) state.active.insert(c.id);
  return state;
}

void PoolState::CheckInvariants() const {
  for (const auto& [id, left] : suspended) {
    if (active.contains(id) || departed.contains(id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "client " + std::to_string(id) + " is suspended and active/departed");
    }
    if (left < 1) {
      throw Error(ErrorCode::kInvalidArgument, "suspension counter below 1");
    }
  }
  for (ClientId id : departed) {
    if (active.contains(id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "client " + std::to_string(id) + " is active and departed");
    }
  }
}

int RoundOutcome::num_returned() const {
  return static_cast<int>(std::count_if(returned.begin(), returned.end(),
                                        [](const auto& kv) { return kv.second; }));
}

PoolState UpdatePool(PoolState state, const SchedulerConfig& config) {
  std::vector<ClientId> readmit;
  for (auto it = state.suspended.begin(); it != state.suspended.end();) {
    if (--it->second <= 0) {
      readmit.push_back(it->first);
      it = state.suspended.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = state.active.begin(); it != state.active.end();) {
    const ClientId id = *it;
    int periods = 0;
    const auto rep = state.reputation.find(id);
    if (rep != state.reputation.end() && rep->second < config.reputation_threshold) {
      periods = config.suspension_periods;
    }
    const auto avail = state.availability.find(id);
    if (avail != state.availability.end() && !avail->second) {
      periods = std::max(periods, 1);
    }
    if (periods > 0) {
      state.suspended[id] = periods;
      it = state.active.erase(it);
    } else {
      ++it;
    }
  }
  for (ClientId id : readmit) state.active.insert(id);
  state.availability.clear();
  state.rounds.clear();
  return state;
}

Scheduler::Scheduler(std::vector<PoolClient> pool, SchedulerConfig config,
                     std::uint64_t seed)
    : pool_(std::move(pool)), config_(std::move(config)), seed_(seed) {
  config_.Validate();
  if (pool_.empty()) throw Error(ErrorCode::kEmptyPool, "empty client pool");
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (!index_.emplace(pool_[i].id, i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate client id " + std::to_string(pool_[i].id));
    }
  }
  state_ = PoolState::FromClients(pool_);
}

double Scheduler::SubsetNid(std::span<const ClientId> subset) const {
  Histogram sum;
  for (ClientId id : subset) sum += pool_[index_.at(id)].histogram;
  return sum.Total() > 0 ? Nid(sum) : 0.0;
}

std::vector<std::vector<ClientId>> Scheduler::PlanPeriod(
    const std::vector<PoolClient>& active, PeriodStats& stats) {
  const std::uint64_t period_seed = DeriveSeed(seed_, static_cast<std::uint64_t>(period_));
  std::vector<std::vector<ClientId>> subsets;
  std::map<ClientId, int> counts;
  for (const PoolClient& c : active) counts[c.id] = 0;
  if (config_.policy == SelectionPolicy::kScheduled) {
    const SubsetSchedule schedule =
        GenerateSubsets(active, config_.subsets, DeriveSeed(period_seed, "subsets"));
    subsets = schedule.subsets;
    counts = schedule.selection_counts;
    stats.undersized_subsets = schedule.CountUndersized(config_.subsets.min_size());
  } else {
    Rng rng(DeriveSeed(period_seed, "random-policy"));
    const std::size_t n = static_cast<std::size_t>(config_.subsets.n);
    const std::size_t rounds = (active.size() + n - 1) / n;
    std::vector<ClientId> ids;
    for (const PoolClient& c : active) ids.push_back(c.id);
    for (std::size_t t = 0; t < rounds; ++t) {
      std::vector<ClientId> subset;
      std::sample(ids.begin(), ids.end(), std::back_inserter(subset),
                  std::min(n, ids.size()), rng);
      for (ClientId id : subset) ++counts[id];
      subsets.push_back(std::move(subset));
    }
  }
  if (!counts.empty()) {
    const auto [lo, hi] = std::minmax_element(
        counts.begin(), counts.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    stats.min_selections = lo->second;
    stats.max_selections = hi->second;
  }
  return subsets;
}

PeriodResult Scheduler::RunPeriod(Trainer& trainer) {
  if (state_.active.empty()) {
    throw Error(ErrorCode::kEmptyPool, "no active clients to schedule");
  }
  state_.CheckInvariants();
  PeriodResult result;
  PeriodStats& stats = result.stats;
  stats.period = period_;
  stats.active_clients = static_cast<int>(state_.active.size());

  std::vector<PoolClient> active;
  for (ClientId id : state_.active) active.push_back(pool_[index_.at(id)]);

  // Dropouts are drawn over the whole pool in id order so that two runs with
  // the same seed drop the same clients whenever both have them active.
  std::set<ClientId> dropped;
  {
    Rng rng(DeriveSeed(DeriveSeed(seed_, static_cast<std::uint64_t>(period_)), "dropout"));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<ClientId> all_ids;
    for (const PoolClient& c : pool_) all_ids.push_back(c.id);
    std::sort(all_ids.begin(), all_ids.end());
    for (ClientId id : all_ids) {
      const double u = uniform(rng);
      if (u < config_.dropout_rate && state_.active.contains(id)) dropped.insert(id);
    }
  }
  stats.dropped.assign(dropped.begin(), dropped.end());

  result.subsets = PlanPeriod(active, stats);
  state_.rounds.clear();
  state_.reputation.clear();

  double nid_sum = 0.0;
  for (std::size_t t = 0; t < result.subsets.size(); ++t) {
    if (config_.max_rounds > 0 && rounds_executed_ >= config_.max_rounds) {
      result.truncated = true;
      break;
    }
    const std::vector<ClientId>& subset = result.subsets[t];
    RoundOutcome outcome;
    outcome.round_index = rounds_executed_;
    outcome.period = period_;
    outcome.subset_index = static_cast<int>(t);
    outcome.participants = subset;
    outcome.subset_nid = SubsetNid(subset);
    nid_sum += outcome.subset_nid;

    std::vector<ClientId> reachable;
    for (ClientId id : subset) {
      if (!dropped.contains(id)) reachable.push_back(id);
    }
    TrainerRoundResult trained;
    trained.global_metric = last_metric_;
    try {
      if (!reachable.empty()) trained = trainer.TrainRound(rounds_executed_, reachable);
    } catch (const std::exception& e) {
      spdlog::warn("round {} failed: {}", rounds_executed_, e.what());
      outcome.trainer_failed = true;
      trained = TrainerRoundResult{};
      trained.global_metric = last_metric_;
    }
    for (ClientId id : subset) {
      const auto it = trained.clients.find(id);
      const bool returned = !outcome.trainer_failed && !dropped.contains(id) &&
                            it != trained.clients.end() && it->second.returned;
      outcome.returned[id] = returned;
      state_.rounds[id].behavior.push_back(BehaviorRound(returned));
      task_rounds_[id].behavior.push_back(BehaviorRound(returned));
      if (returned) {
        outcome.quality[id] = it->second.quality;
        state_.rounds[id].quality.push_back(it->second.quality);
        task_rounds_[id].quality.push_back(it->second.quality);
      }
    }
    outcome.global_metric = trained.global_metric;
    last_metric_ = trained.global_metric;
    ++rounds_executed_;
    result.rounds.push_back(std::move(outcome));
  }
  stats.rounds = static_cast<int>(result.rounds.size());
  stats.mean_subset_nid =
      result.rounds.empty() ? 0.0 : nid_sum / static_cast<double>(result.rounds.size());

  // Step 3: reputations from this period's rounds. A client that never
  // returned has no quality values and gets q_task = 0.
  for (const auto& [id, acc] : state_.rounds) {
    if (acc.behavior.empty()) continue;
    const double b_task = PerTaskBehavior(acc.behavior);
    const double q_task = acc.quality.empty() ? 0.0 : PerTaskQuality(acc.quality);
    state_.reputation[id] = Reputation(q_task, b_task);
  }

  if (!result.truncated) {
    state_ = UpdatePool(std::move(state_), config_);
    for (const auto& [id, left] : state_.suspended) stats.suspended_after.push_back(id);
  }
  ++period_;
  return result;
}

MetricsTimeline Scheduler::RunTask(Trainer& trainer) {
  MetricsTimeline timeline;
  double best = -std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int p = 0; p < config_.max_periods; ++p) {
    if (config_.max_rounds > 0 && rounds_executed_ >= config_.max_rounds) break;
    if (state_.active.empty()) {
      // Everybody is suspended; let the counters run down.
      state_ = UpdatePool(std::move(state_), config_);
      ++period_;
      continue;
    }
    PeriodResult period = RunPeriod(trainer);
    for (auto& r : period.rounds) timeline.rounds.push_back(std::move(r));
    timeline.periods.push_back(period.stats);
    if (period.truncated) break;

    const double metric = last_metric_;
    if (metric >= best + config_.convergence.min_delta) {
      best = metric;
      stale = 0;
    } else {
      ++stale;
    }
    if (config_.convergence.patience > 0 && stale >= config_.convergence.patience) {
      spdlog::info("converged after {} periods", p + 1);
      break;
    }
  }
  for (const auto& [id, acc] : task_rounds_) {
    if (acc.behavior.empty()) continue;
    TaskScores scores;
    scores.b_task = PerTaskBehavior(acc.behavior);
    scores.q_task = acc.quality.empty() ? 0.0 : PerTaskQuality(acc.quality);
    timeline.task_scores[id] = scores;
  }
  return timeline;
}

}  // namespace fedsched
