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

#include "fedsched/pool_select.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>

#include "fedsched/error.h"
#include "fedsched/random.h"

namespace fedsched {

namespace {

void CheckBudget(std::int64_t budget) {
  if (budget < 0) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be non-negative");
  }
}

void CheckCosts(std::span<const Candidate> candidates) {
  for (const Candidate& c : candidates) {
    if (c.cost < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "candidate " + std::to_string(c.id) + " has cost < 1");
    }
  }
}

PoolSelectionResult Accumulate(std::span<const Candidate> candidates,
                               std::span<const std::size_t> order,
                               std::int64_t budget, OverflowRule rule,
                               SelectionMethod method) {
  PoolSelectionResult result;
  result.method = method;
  std::int64_t centi = 0;
  for (std::size_t idx : order) {
    const Candidate& c = candidates[idx];
    if (result.total_cost + c.cost > budget) {
      if (rule == OverflowRule::kStop) break;
      continue;
    }
    result.selected.push_back(c.id);
    result.total_cost += c.cost;
    centi += ToCentiScore(c.score);
  }
  result.total_score = static_cast<double>(centi) / 100.0;
  return result;
}

}  // namespace

std::string_view SelectionMethodName(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::kDp: return "dp";
    case SelectionMethod::kGreedy: return "greedy";
    case SelectionMethod::kRandom: return "random";
  }
  return "unknown";
}

std::int64_t ToCentiScore(double score) {
  return static_cast<std::int64_t>(std::llround(score * 100.0));
}

std::vector<Candidate> FilterCandidates(std::span<const Candidate> candidates,
                                        const ScoreVector& thresholds) {
  std::vector<Candidate> out;
  for (const Candidate& c : candidates) {
    bool passes = true;
    for (std::size_t i = 0; i < kNumCriteria; ++i) {
      if (c.scores[i] < thresholds[i]) {
        passes = false;
        break;
      }
    }
    if (passes) out.push_back(c);
  }
  return out;
}

std::int64_t MinBudget(std::span<const Candidate> candidates, int n_star) {
  if (n_star < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n* must be at least 1");
  }
  if (candidates.size() < static_cast<std::size_t>(n_star)) {
    throw Error(ErrorCode::kInfeasibleInstance,
                "only " + std::to_string(candidates.size()) +
                    " candidates pass the thresholds, " + std::to_string(n_star) +
                    " required");
  }
  std::vector<std::int64_t> costs;
  costs.reserve(candidates.size());
  for (const Candidate& c : candidates) costs.push_back(c.cost);
  std::partial_sort(costs.begin(), costs.begin() + n_star, costs.end(),
                    std::greater<>());
  return std::accumulate(costs.begin(), costs.begin() + n_star, std::int64_t{0});
}

PoolSelectionResult SelectDp(std::span<const Candidate> candidates,
                             std::int64_t budget) {
  CheckBudget(budget);
  CheckCosts(candidates);
  const std::size_t n = candidates.size();
  const auto width = static_cast<std::size_t>(budget) + 1;

  // best[b]: best centi-score with total cost <= b over the items seen so far.
  // take[i * width + b]: item i improves best[b] when it is considered.
  std::vector<std::int64_t> best(width, 0);
  std::vector<bool> take(n * width, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cost = static_cast<std::size_t>(candidates[i].cost);
    const std::int64_t value = ToCentiScore(candidates[i].score);
    if (cost >= width) continue;
    for (std::size_t b = width - 1; b + 1 > cost; --b) {
      const std::int64_t with = best[b - cost] + value;
      if (with >= best[b]) {
        best[b] = with;
        take[i * width + b] = true;
      }
    }
  }

  PoolSelectionResult result;
  result.method = SelectionMethod::kDp;
  std::size_t b = width - 1;
  std::int64_t centi = 0;
  for (std::size_t i = n; i-- > 0;) {
    if (take[i * width + b]) {
      result.selected.push_back(candidates[i].id);
      result.total_cost += candidates[i].cost;
      centi += ToCentiScore(candidates[i].score);
      b -= static_cast<std::size_t>(candidates[i].cost);
    }
  }
  result.total_score = static_cast<double>(centi) / 100.0;
  return result;
}

PoolSelectionResult SelectGreedy(std::span<const Candidate> candidates,
                                 std::int64_t budget, OverflowRule rule) {
  CheckBudget(budget);
  CheckCosts(candidates);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Exact ratio comparison by cross multiplication on fixed-point scores.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Candidate& ca = candidates[a];
    const Candidate& cb = candidates[b];
    const std::int64_t sa = ToCentiScore(ca.score);
    const std::int64_t sb = ToCentiScore(cb.score);
    const __int128 lhs = static_cast<__int128>(sa) * cb.cost;
    const __int128 rhs = static_cast<__int128>(sb) * ca.cost;
    if (lhs != rhs) return lhs > rhs;
    if (sa != sb) return sa > sb;
    return ca.id < cb.id;
  });
  return Accumulate(candidates, order, budget, rule, SelectionMethod::kGreedy);
}

PoolSelectionResult SelectInOrder(std::span<const Candidate> candidates,
                                  std::int64_t budget,
                                  std::span<const ClientId> order,
                                  OverflowRule rule) {
  CheckBudget(budget);
  CheckCosts(candidates);
  std::unordered_map<ClientId, std::size_t> index;
  for (std::size_t i = 0; i < candidates.size(); ++i) index[candidates[i].id] = i;
  std::vector<std::size_t> positions;
  positions.reserve(order.size());
  for (ClientId id : order) {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw Error(ErrorCode::kUnknownItem,
                  "order names unknown candidate " + std::to_string(id));
    }
    positions.push_back(it->second);
  }
  return Accumulate(candidates, positions, budget, rule, SelectionMethod::kRandom);
}

PoolSelectionResult SelectRandom(std::span<const Candidate> candidates,
                                 std::int64_t budget, std::uint64_t seed,
                                 OverflowRule rule) {
  CheckBudget(budget);
  CheckCosts(candidates);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return Accumulate(candidates, order, budget, rule, SelectionMethod::kRandom);
}

double ApproximationRatio(double optimal, double achieved) {
  if (!(optimal > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "optimal score must be positive");
  }
  return (optimal - achieved) / optimal;
}

}  // namespace fedsched
