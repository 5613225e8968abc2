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

#ifndef FEDSCHED_EXPERIMENT_H_
#define FEDSCHED_EXPERIMENT_H_

#include <optional>
#include <vector>

#include "fedsched/config.h"
#include "fedsched/pool_select.h"
#include "fedsched/scheduler.h"
#include "json.hpp"

namespace fedsched {

struct ArmResult {
  SelectionPolicy policy = SelectionPolicy::kScheduled;
  MetricsTimeline timeline;
  double final_accuracy = 0.0;
  std::optional<int> rounds_to_threshold;
  int periods = 0;
  // Over all periods of the arm.
  int min_selections = 0;
  int max_selections = 0;
  double mean_subset_nid = 0.0;
  int undersized_subsets = 0;
};

struct ExperimentOptions {
  bool train = true;
  std::optional<int> max_periods;
  bool run_random_arm = true;
};

struct ExperimentResult {
  std::vector<PoolClient> generated;
  std::optional<PoolSelectionResult> selection;
  std::vector<PoolClient> pool;  // after stage 1
  ArmResult scheduled;
  std::optional<ArmResult> random;
  bool trained = true;
};

// Generates the pool and data, optionally runs stage-1 selection, then runs
// the scheduled arm and the random arm with the same root seed.
ExperimentResult RunExperiment(const RunConfig& config, const ExperimentOptions& options = {});

nlohmann::json SummaryToJson(const ExperimentResult& result, const RunConfig& config);

}  // namespace fedsched

#endif  // FEDSCHED_EXPERIMENT_H_
