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

#ifndef FEDSCHED_POOL_SELECT_H_
#define FEDSCHED_POOL_SELECT_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedsched/client.h"
#include "fedsched/scoring.h"

namespace fedsched {

// A client willing to take part in a task, with its overall score and the
// price it asks for the task.
struct Candidate {
  ClientId id = 0;
  double score = 0.0;
  std::int64_t cost = 1;
  ScoreVector scores{};
};

enum class SelectionMethod { kDp, kGreedy, kRandom };

std::string_view SelectionMethodName(SelectionMethod method);

// What the greedy and random selectors do when the next candidate no longer
// fits the remaining budget.
enum class OverflowRule {
  kStop,              // end the selection
  kSkipAndContinue,   // try the following candidates
};

struct PoolSelectionResult {
  std::vector<ClientId> selected;  // in the order the method picked them
  double total_score = 0.0;
  std::int64_t total_cost = 0;
  SelectionMethod method = SelectionMethod::kDp;
  double approx_ratio = 0.0;
};

// Scores are handled as fixed-point hundredths so totals are exact.
std::int64_t ToCentiScore(double score);

// Keeps candidates whose every criterion meets the threshold (inclusive).
std::vector<Candidate> FilterCandidates(std::span<const Candidate> candidates,
                                        const ScoreVector& thresholds);

// Smallest budget that can always afford n_star clients: the sum of the
// n_star largest costs.
std::int64_t MinBudget(std::span<const Candidate> candidates, int n_star);

// Exact 0-1 knapsack by dynamic programming over the budget, O(n * budget).
PoolSelectionResult SelectDp(std::span<const Candidate> candidates,
                             std::int64_t budget);

// Non-increasing score/cost order; ties prefer the higher score, then the
// lower id. O(n log n).
PoolSelectionResult SelectGreedy(std::span<const Candidate> candidates,
                                 std::int64_t budget,
                                 OverflowRule rule = OverflowRule::kStop);

// Accumulates candidates in the given id order until the budget runs short.
// Used by SelectRandom and to replay a recorded random draw.
PoolSelectionResult SelectInOrder(std::span<const Candidate> candidates,
                                  std::int64_t budget,
                                  std::span<const ClientId> order,
                                  OverflowRule rule = OverflowRule::kStop);

PoolSelectionResult SelectRandom(std::span<const Candidate> candidates,
                                 std::int64_t budget, std::uint64_t seed,
                                 OverflowRule rule = OverflowRule::kStop);

// (optimal - achieved) / optimal.
double ApproximationRatio(double optimal, double achieved);

}  // namespace fedsched

#endif  // FEDSCHED_POOL_SELECT_H_
