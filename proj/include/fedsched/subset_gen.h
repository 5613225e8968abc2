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

#ifndef FEDSCHED_SUBSET_GEN_H_
#define FEDSCHED_SUBSET_GEN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fedsched/client.h"
#include "fedsched/mkp.h"

namespace fedsched {

struct SubsetGenConfig {
  int n = 10;      // target subset size
  int delta = 3;   // size tolerance
  int x_star = 3;  // max selections per client per period
  // Subsets whose Nid exceeds this go through compensation.
  double nid_threshold = 0.2;
  // A class knapsack filled below this fraction of capacity is deficient.
  double fill_threshold = 0.8;
  std::optional<std::int64_t> capacity_override;
  mkp::SolveOptions solver;

  int min_size() const { return n - delta; }
  int max_size() const { return n + delta; }
  void Validate() const;
};

// One scheduling period worth of subsets, in round order.
struct SubsetSchedule {
  std::vector<std::vector<ClientId>> subsets;
  std::map<ClientId, int> selection_counts;
  std::vector<double> per_subset_nid;
  // Subset was built in the too-few-clients-left branch.
  std::vector<char> final_branch;
  std::int64_t capacity = 0;

  std::size_t size() const { return subsets.size(); }
  // Subsets below n - delta. Reported, not enforced.
  int CountUndersized(int min_size) const;
};

// ceil(max class total / T) with T = ceil(|pool| / n), or the override.
std::int64_t KnapsackCapacity(std::span<const PoolClient> pool, int n,
                              std::optional<std::int64_t> capacity_override = {});

// Partitions a pool into per-round subsets of near-uniform label mix by
// solving one multidimensional knapsack per subset. Every client lands in
// at least one subset and in at most x* of them.
class SubsetGenerator {
 public:
  SubsetGenerator(std::span<const PoolClient> pool, SubsetGenConfig config,
                  std::uint64_t seed);

  bool done() const { return remaining_count_ == 0; }

  // One iteration of the generation loop. Returns the subset it saved.
  std::vector<ClientId> Next();

  SubsetSchedule Run();

  // Knapsack over the clients never selected so far.
  std::vector<ClientId> SolveRemaining();

  // Re-solves with compensation clients (already selected, below x*, modal
  // class in an under-filled knapsack) added to the remaining clients. The
  // result replaces `subset` only if its Nid is strictly lower.
  std::vector<ClientId> ImproveNid(const std::vector<ClientId>& subset);

  // Keeps `mandatory` and fills the residual knapsack space with eligible
  // clients until the subset reaches n - delta (or eligible clients run out).
  std::vector<ClientId> EnforceMinSize(const std::vector<ClientId>& mandatory);

  // Increments selection counts and removes the members from the remaining set.
  void RecordSelection(std::span<const ClientId> subset);

  int selection_count(ClientId id) const;
  void set_selection_count(ClientId id, int count);
  bool is_remaining(ClientId id) const;
  std::int64_t capacity() const { return capacity_; }
  double NidOf(std::span<const ClientId> subset) const;

 private:
  std::size_t IndexOf(ClientId id) const;
  std::vector<ClientId> SolveOver(const std::vector<std::size_t>& items,
                                  int size_max);

  std::vector<PoolClient> pool_;
  SubsetGenConfig config_;
  std::uint64_t seed_;
  std::uint64_t solves_ = 0;
  std::int64_t capacity_ = 0;
  std::unordered_map<ClientId, std::size_t> index_;
  std::vector<int> counts_;
  std::vector<char> remaining_;
  std::size_t remaining_count_ = 0;
  SubsetSchedule schedule_;
};

SubsetSchedule GenerateSubsets(std::span<const PoolClient> pool,
                               const SubsetGenConfig& config, std::uint64_t seed);

// Uniformly random subsets of the given sizes, each drawn independently from
// the whole pool. Baseline for the Nid comparison.
std::vector<std::vector<ClientId>> RandomSubsets(std::span<const PoolClient> pool,
                                                 std::span<const std::size_t> sizes,
                                                 std::uint64_t seed);

double MeanSubsetNid(std::span<const PoolClient> pool,
                     std::span<const std::vector<ClientId>> subsets);

}  // namespace fedsched

#endif  // FEDSCHED_SUBSET_GEN_H_
