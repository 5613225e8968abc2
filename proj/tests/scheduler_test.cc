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
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fedsched/error.h"
#include "fedsched/fl_sim.h"

namespace fedsched {
namespace {

std::vector<PoolClient> TypeOnePool(std::uint64_t seed = 1) {
  sim::NonIidSpec spec;
  spec.seed = seed;
  return sim::MakeNonIidPool(spec);
}

// Returns every participant with a fixed quality; optionally fails or drops
// chosen clients.
class FakeTrainer : public Trainer {
 public:
  TrainerRoundResult TrainRound(int round_index,
                                std::span<const ClientId> participants) override {
    calls.emplace_back(participants.begin(), participants.end());
    if (fail_rounds.contains(round_index)) throw std::runtime_error("boom");
    TrainerRoundResult r;
    for (ClientId id : participants) {
      r.clients[id] = ClientRoundResult{!silent.contains(id), quality};
    }
    metric += metric_step;
    r.global_metric = metric;
    return r;
  }

  double quality = 0.9;
  double metric = 0.0;
  double metric_step = 0.01;
  std::set<int> fail_rounds;
  std::set<ClientId> silent;
  std::vector<std::vector<ClientId>> calls;
};

TEST(UpdatePoolTest, ThresholdAndReadmission) {
  SchedulerConfig cfg;
  cfg.reputation_threshold = 1.0;
  PoolState s;
  s.active = {1, 2};
  s.suspended = {{3, 1}, {4, 2}};
  s.reputation[1] = Reputation(0.9, 1.0);
  s.reputation[2] = Reputation(0.0, 0.0);
  const PoolState next = UpdatePool(s, cfg);
  EXPECT_TRUE(next.active.contains(1));
  EXPECT_FALSE(next.active.contains(2));
  EXPECT_EQ(next.suspended.at(2), 1);
  EXPECT_TRUE(next.active.contains(3));
  EXPECT_EQ(next.suspended.at(4), 1);
  next.CheckInvariants();
}

TEST(UpdatePoolTest, UnavailableClientsSitOutOnePeriod) {
  SchedulerConfig cfg;
  cfg.suspension_periods = 3;
  PoolState s;
  s.active = {1, 2};
  s.availability[2] = false;
  s.reputation[1] = 2.0;
  s.reputation[2] = 2.0;
  PoolState next = UpdatePool(s, cfg);
  EXPECT_EQ(next.suspended.at(2), 1);
  EXPECT_TRUE(next.availability.empty());
  next = UpdatePool(next, cfg);
  EXPECT_TRUE(next.active.contains(2));
}

TEST(SchedulerConfigTest, Validation) {
  SchedulerConfig cfg;
  cfg.dropout_rate = 1.5;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg.dropout_rate = 0.0;
  cfg.suspension_periods = 0;
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(SchedulerTest, NoDropoutEveryoneReturns) {
  const auto pool = TypeOnePool();
  Scheduler sched(pool, SchedulerConfig{}, 7);
  FakeTrainer trainer;
  const PeriodResult r = sched.RunPeriod(trainer);
  EXPECT_GE(r.rounds.size(), 10u);
  EXPECT_LE(r.rounds.size(), 20u);
  std::set<ClientId> seen;
  for (const RoundOutcome& o : r.rounds) {
    for (ClientId id : o.participants) {
      EXPECT_TRUE(o.returned.at(id));
      EXPECT_DOUBLE_EQ(o.quality.at(id), 0.9);
      seen.insert(id);
    }
  }
  EXPECT_EQ(seen.size(), pool.size());
  for (const auto& [id, rep] : sched.state().reputation) EXPECT_DOUBLE_EQ(rep, 0.9 + 1.0);
  EXPECT_EQ(sched.state().active.size(), pool.size());
}

TEST(SchedulerTest, DroppedClientsStayScheduledWithZeroBehavior) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.dropout_rate = 0.2;
  Scheduler sched(pool, cfg, 3);
  FakeTrainer trainer;
  const PeriodResult r = sched.RunPeriod(trainer);
  ASSERT_FALSE(r.stats.dropped.empty());
  const std::set<ClientId> dropped(r.stats.dropped.begin(), r.stats.dropped.end());
  std::set<ClientId> scheduled;
  for (const RoundOutcome& o : r.rounds) {
    for (ClientId id : o.participants) {
      scheduled.insert(id);
      EXPECT_EQ(o.returned.at(id), !dropped.contains(id));
      EXPECT_EQ(o.quality.contains(id), !dropped.contains(id));
    }
  }
  EXPECT_EQ(scheduled.size(), pool.size());
  // Dropped clients never reach the trainer.
  for (const auto& call : trainer.calls) {
    for (ClientId id : call) EXPECT_FALSE(dropped.contains(id));
  }
  for (ClientId id : dropped) {
    EXPECT_DOUBLE_EQ(sched.state().reputation.at(id), 0.0);
    EXPECT_TRUE(sched.state().suspended.contains(id));
  }
}

TEST(SchedulerTest, ReputationMatchesScoring) {
  const auto pool = TypeOnePool();
  Scheduler sched(pool, SchedulerConfig{}, 2);
  FakeTrainer trainer;
  trainer.silent = {3, 17};
  const PeriodResult r = sched.RunPeriod(trainer);
  std::map<ClientId, std::vector<double>> q;
  std::map<ClientId, std::vector<int>> b;
  for (const RoundOutcome& o : r.rounds) {
    for (ClientId id : o.participants) {
      b[id].push_back(BehaviorRound(o.returned.at(id)));
      if (o.returned.at(id)) q[id].push_back(o.quality.at(id));
    }
  }
  for (const auto& [id, bs] : b) {
    const double qt = q[id].empty() ? 0.0 : PerTaskQuality(q[id]);
    EXPECT_DOUBLE_EQ(sched.state().reputation.at(id), Reputation(qt, PerTaskBehavior(bs)));
  }
  EXPECT_TRUE(sched.state().suspended.contains(3));
  EXPECT_TRUE(sched.state().suspended.contains(17));
}

TEST(SchedulerTest, TrainerFailureZeroesBehaviorAndContinues) {
  const auto pool = TypeOnePool();
  Scheduler sched(pool, SchedulerConfig{}, 2);
  FakeTrainer trainer;
  trainer.fail_rounds = {1};
  const PeriodResult r = sched.RunPeriod(trainer);
  ASSERT_GT(r.rounds.size(), 2u);
  EXPECT_TRUE(r.rounds[1].trainer_failed);
  EXPECT_EQ(r.rounds[1].num_returned(), 0);
  EXPECT_DOUBLE_EQ(r.rounds[1].global_metric, r.rounds[0].global_metric);
  EXPECT_FALSE(r.rounds[2].trainer_failed);
  EXPECT_EQ(r.rounds[2].num_returned(), static_cast<int>(r.rounds[2].participants.size()));
}

TEST(SchedulerTest, EmptyActivePoolIsAnError) {
  const auto pool = TypeOnePool();
  Scheduler sched(pool, SchedulerConfig{}, 2);
  sched.mutable_state().active.clear();
  FakeTrainer trainer;
  try {
    sched.RunPeriod(trainer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyPool);
  }
}

TEST(RunTaskTest, OnePeriod) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.max_periods = 1;
  Scheduler sched(pool, cfg, 1);
  FakeTrainer trainer;
  const MetricsTimeline t = sched.RunTask(trainer);
  ASSERT_EQ(t.periods.size(), 1u);
  EXPECT_EQ(t.rounds.size(), static_cast<std::size_t>(t.periods[0].rounds));
  EXPECT_EQ(static_cast<int>(t.rounds.size()), sched.rounds_executed());
}

TEST(RunTaskTest, PatienceZeroRunsAllPeriods) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.max_periods = 6;
  cfg.convergence.patience = 0;
  Scheduler sched(pool, cfg, 1);
  FakeTrainer trainer;
  trainer.metric_step = 0.0;
  const MetricsTimeline t = sched.RunTask(trainer);
  EXPECT_EQ(t.periods.size(), 6u);
}

TEST(RunTaskTest, StopsWhenMetricStalls) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.max_periods = 50;
  cfg.convergence.patience = 3;
  Scheduler sched(pool, cfg, 1);
  FakeTrainer trainer;
  trainer.metric_step = 0.0;
  const MetricsTimeline t = sched.RunTask(trainer);
  EXPECT_EQ(t.periods.size(), 4u);  // first period sets the best, three stale ones follow
}

TEST(RunTaskTest, RoundCapTruncates) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.max_rounds = 25;
  cfg.convergence.patience = 0;
  Scheduler sched(pool, cfg, 1);
  FakeTrainer trainer;
  const MetricsTimeline t = sched.RunTask(trainer);
  EXPECT_EQ(t.rounds.size(), 25u);
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    EXPECT_EQ(t.rounds[i].round_index, static_cast<int>(i));
  }
}

TEST(RunTaskTest, StablePoolWithoutDropoutOrThreshold) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.reputation_threshold = -std::numeric_limits<double>::infinity();
  cfg.max_periods = 4;
  cfg.convergence.patience = 0;
  Scheduler sched(pool, cfg, 1);
  FakeTrainer trainer;
  trainer.quality = -1.0;
  const MetricsTimeline t = sched.RunTask(trainer);
  for (const PeriodStats& p : t.periods) {
    EXPECT_EQ(p.active_clients, 100);
    EXPECT_TRUE(p.suspended_after.empty());
  }
}

TEST(RunTaskTest, SuspendedClientsDoNotParticipate) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.dropout_rate = 0.1;
  cfg.suspension_periods = 2;
  cfg.max_periods = 6;
  cfg.convergence.patience = 0;
  Scheduler sched(pool, cfg, 5);
  FakeTrainer trainer;
  std::set<ClientId> suspended;
  for (int p = 0; p < 6; ++p) {
    suspended.clear();
    for (const auto& [id, left] : sched.state().suspended) suspended.insert(id);
    const PeriodResult r = sched.RunPeriod(trainer);
    for (const RoundOutcome& o : r.rounds) {
      for (ClientId id : o.participants) EXPECT_FALSE(suspended.contains(id));
    }
    sched.state().CheckInvariants();
  }
}

TEST(SchedulerTest, FivePercentDropoutKeepsMostClientsReturning) {
  double returned_clients = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pool = TypeOnePool(seed);
    SchedulerConfig cfg;
    cfg.dropout_rate = 0.05;
    Scheduler sched(pool, cfg, seed);
    FakeTrainer trainer;
    const PeriodResult r = sched.RunPeriod(trainer);
    EXPECT_GE(r.rounds.size(), 10u);
    EXPECT_LE(r.rounds.size(), 20u);
    std::set<ClientId> ok;
    for (const RoundOutcome& o : r.rounds) {
      for (const auto& [id, back] : o.returned) {
        if (back) ok.insert(id);
      }
    }
    returned_clients += static_cast<double>(ok.size());
  }
  // Each run returns Binomial(100, 0.95) clients: mean 95, sd 2.18, so the
  // 20-run average sits within 3 standard errors of 95.
  EXPECT_NEAR(returned_clients / 20.0, 95.0, 1.5);
}

TEST(SchedulerTest, RandomPolicyDrawsFullRounds) {
  const auto pool = TypeOnePool();
  SchedulerConfig cfg;
  cfg.policy = SelectionPolicy::kRandom;
  Scheduler sched(pool, cfg, 4);
  FakeTrainer trainer;
  const PeriodResult r = sched.RunPeriod(trainer);
  ASSERT_EQ(r.rounds.size(), 10u);
  for (const auto& s : r.subsets) EXPECT_EQ(s.size(), 10u);
}

}  // namespace
}  // namespace fedsched
