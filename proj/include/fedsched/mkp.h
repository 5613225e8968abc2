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

#ifndef FEDSCHED_MKP_H_
#define FEDSCHED_MKP_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedsched/client.h"
#include "json.hpp"

namespace fedsched::mkp {

// 0-1 multidimensional knapsack in <= form:
//
//   maximize  sum_k profit_k x_k
//   s.t.      rows * x <= capacities,  x binary
//
// Instances built by BuildInstance have one row per class label (the
// clients' histograms), then a row of +1 bounding the subset size from above
// and a row of -1 bounding it from below.
struct MkpInstance {
  std::vector<std::int64_t> profits;
  std::vector<std::vector<std::int64_t>> rows;
  std::vector<std::int64_t> capacities;
  std::vector<ClientId> item_ids;
  std::size_t num_class_rows = 0;

  std::size_t num_items() const { return profits.size(); }
  std::size_t num_rows() const { return rows.size(); }
  bool has_size_rows() const { return rows.size() == num_class_rows + 2; }
  std::size_t size_max_row() const { return num_class_rows; }
  std::size_t size_min_row() const { return num_class_rows + 1; }
};

struct MkpSolution {
  std::vector<char> selected;
  std::int64_t objective = 0;
  bool feasible = false;
  bool proven_optimal = false;
  // (bound - objective) / bound, zero when proven optimal.
  double gap = 0.0;

  std::vector<ClientId> SelectedIds(const MkpInstance& instance) const;
  std::size_t num_selected() const;
};

struct SolveOptions {
  // Instances up to this many items go to branch and bound.
  std::size_t exact_threshold = 40;
  // Branch-and-bound node budget; when exhausted the incumbent is returned
  // without an optimality proof.
  std::int64_t node_limit = 500'000;
  // Improvement passes of the local search on large instances.
  int local_search_passes = 50;
  // Scan order of the local search.
  std::uint64_t seed = 0;
};

MkpInstance BuildInstance(std::span<const PoolClient> clients,
                          std::int64_t capacity, int size_min, int size_max);

// Same knapsacks with the mandatory items taken out and their weights
// subtracted from the capacities. Class and size-max rows are clamped at 0,
// the size-min requirement at 0 as well.
MkpInstance BuildComplementary(const MkpInstance& instance,
                               std::span<const ClientId> mandatory);

void Validate(const MkpInstance& instance);

// Independent row-by-row check of rows * x <= capacities.
bool IsFeasible(const MkpInstance& instance, std::span<const char> selected);

std::int64_t Objective(const MkpInstance& instance, std::span<const char> selected);

// Upper bound of the linear relaxation: the tightest of the per-row
// fractional knapsack bounds, the surrogate bound over the summed class rows
// and the cardinality bound. Items that cannot fit on their own are dropped
// first.
double RelaxationBound(const MkpInstance& instance);

MkpSolution Solve(const MkpInstance& instance, const SolveOptions& options = {});

inline constexpr std::size_t kBruteForceMaxItems = 20;

// Exhaustive enumeration; test oracle.
MkpSolution BruteForce(const MkpInstance& instance);

nlohmann::json ToDebugJson(const MkpInstance& instance);

}  // namespace fedsched::mkp

#endif  // FEDSCHED_MKP_H_
