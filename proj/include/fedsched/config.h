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

#ifndef FEDSCHED_CONFIG_H_
#define FEDSCHED_CONFIG_H_

#include <cstdint>
#include <string>

#include "fedsched/fl_sim.h"
#include "fedsched/scheduler.h"
#include "fedsched/scoring.h"

namespace fedsched {

// Stage-1 settings for a simulation. When disabled the whole generated pool
// goes to the scheduler.
struct PoolSelectionConfig {
  bool enabled = false;
  std::int64_t budget = 0;
  int min_clients = 0;  // n*
  ScoreVector thresholds{};
  double cost_a = 2.0;
  double cost_b = 5.0;
  Weights weights = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
};

struct RunConfig {
  std::uint64_t seed = 0;
  sim::NonIidSpec pool;
  PoolSelectionConfig selection;
  SchedulerConfig scheduler;
  sim::DataOptions data;
  sim::TrainerOptions training;
  // Accuracy used for the rounds-to-threshold statistic.
  double accuracy_threshold = 0.8;

  // Throws kConfig.
  void Validate() const;
};

// Parses a YAML run configuration. Missing keys keep their defaults; unknown
// keys and ill-typed values raise kConfig with "<source>:<line>:<col>:".
RunConfig ParseRunConfig(const std::string& text, const std::string& source = "<config>");
RunConfig LoadRunConfig(const std::string& path);

// The configuration with every key spelled out, as YAML.
std::string RunConfigToYaml(const RunConfig& config);

}  // namespace fedsched

#endif  // FEDSCHED_CONFIG_H_
