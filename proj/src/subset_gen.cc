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

#include "fedsched/subset_gen.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedsched/error.h"
#include "fedsched/random.h"

namespace fedsched {

void SubsetGenConfig::Validate() const {
  if (n < 1) throw Error(ErrorCode::kConfig, "subset size n must be positive");
  if (delta < 0) throw Error(ErrorCode::kConfig, "delta must be non-negative");
  if (min_size() < 1) throw Error(ErrorCode::kConfig, "n - delta must be at least 1");
  if (x_star < 1) throw Error(ErrorCode::kConfig, "x* must be at least 1");
  if (nid_threshold < 0.0 || nid_threshold > 1.0) {
    throw Error(ErrorCode::kConfig, "nid_threshold must lie in [0, 1]");
  }
  if (!(fill_threshold > 0.0) || fill_threshold > 1.0) {
    throw Error(ErrorCode::kConfig, "fill_threshold must lie in (0, 1]");
  }
  if (capacity_override && *capacity_override < 1) {
    throw Error(ErrorCode::kConfig, "capacity override must be positive");
  }
}

int SubsetSchedule::CountUndersized(int min_size) const {
  return static_cast<int>(std::count_if(subsets.begin(), subsets.end(), [&](const auto& s) {
    return static_cast<int>(s.size()) < min_size;
  }));
}

std::int64_t KnapsackCapacity(std::span<const PoolClient> pool, int n,
                              std::optional<std::int64_t> capacity_override) {
  if (capacity_override) return *capacity_override;
  if (pool.empty()) throw Error(ErrorCode::kEmptyPool, "empty client pool");
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "subset size must be positive");
  Histogram totals;
  for (const PoolClient& c : pool) totals += c.histogram;
  const std::int64_t max_class = *std::max_element(totals.counts.begin(), totals.counts.end());
  if (totals.Total() <= 0) {
    throw Error(ErrorCode::kInvalidHistogram, "client pool holds no data");
  }
  const auto k = static_cast<std::int64_t>(pool.size());
  const std::int64_t rounds = (k + n - 1) / n;
  return std::max<std::int64_t>(1, (max_class + rounds - 1) / rounds);
}

SubsetGenerator::SubsetGenerator(std::span<const PoolClient> pool,
                                 SubsetGenConfig config, std::uint64_t seed)
    : pool_(pool.begin(), pool.end()), config_(std::move(config)), seed_(seed) {
  config_.Validate();
  if (pool_.empty()) throw Error(ErrorCode::kEmptyPool, "empty client pool");
  const std::size_t c = pool_.front().histogram.num_classes();
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (pool_[i].histogram.num_classes() != c) {
      throw Error(ErrorCode::kDimensionMismatch, "clients disagree on the number of classes");
    }
    if (!index_.emplace(pool_[i].id, i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate client id " + std::to_string(pool_[i].id));
    }
  }
  capacity_ = KnapsackCapacity(pool_, config_.n, config_.capacity_override);
  counts_.assign(pool_.size(), 0);
  remaining_.assign(pool_.size(), 1);
  remaining_count_ = pool_.size();
  schedule_.capacity = capacity_;
}

std::size_t SubsetGenerator::IndexOf(ClientId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownItem, "client " + std::to_string(id) + " is not in the pool");
  }
  return it->second;
}

int SubsetGenerator::selection_count(ClientId id) const { return counts_[IndexOf(id)]; }

void SubsetGenerator::set_selection_count(ClientId id, int count) {
  const std::size_t i = IndexOf(id);
  counts_[i] = count;
  const bool was_remaining = remaining_[i] != 0;
  remaining_[i] = count == 0 ? 1 : 0;
  if (was_remaining && !remaining_[i]) --remaining_count_;
  if (!was_remaining && remaining_[i]) ++remaining_count_;
}

bool SubsetGenerator::is_remaining(ClientId id) const { return remaining_[IndexOf(id)] != 0; }

double SubsetGenerator::NidOf(std::span<const ClientId> subset) const {
  Histogram sum;
  for (ClientId id : subset) sum += pool_[IndexOf(id)].histogram;
  return Nid(sum);
}

// Profits are scaled so the solver first maximizes the sample count and,
// among equal counts, prefers clients that have not been selected yet.
std::vector<ClientId> SubsetGenerator::SolveOver(const std::vector<std::size_t>& items,
                                                 int size_max) {
  if (items.empty()) return {};
  std::vector<PoolClient> clients;
  clients.reserve(items.size());
  for (std::size_t i : items) clients.push_back(pool_[i]);
  const int max_size = std::min<int>(size_max, static_cast<int>(clients.size()));
  if (max_size < 1) return {};
  mkp::MkpInstance inst = mkp::BuildInstance(clients, capacity_, 1, max_size);
  const auto scale = static_cast<std::int64_t>(items.size()) + 1;
  for (std::size_t k = 0; k < items.size(); ++k) {
    inst.profits[k] = inst.profits[k] * scale + (remaining_[items[k]] ? 1 : 0);
  }
  mkp::SolveOptions options = config_.solver;
  options.seed = DeriveSeed(seed_, solves_++);
  const mkp::MkpSolution sol = mkp::Solve(inst, options);
  if (!sol.feasible) return {};
  auto ids = sol.SelectedIds(inst);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<ClientId> SubsetGenerator::SolveRemaining() {
  std::vector<std::size_t> items;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (remaining_[i]) items.push_back(i);
  }
  return SolveOver(items, config_.max_size());
}

std::vector<ClientId> SubsetGenerator::ImproveNid(const std::vector<ClientId>& subset) {
  if (subset.empty()) return subset;
  Histogram fill;
  std::vector<char> in_subset(pool_.size(), 0);
  for (ClientId id : subset) {
    const std::size_t i = IndexOf(id);
    in_subset[i] = 1;
    fill += pool_[i].histogram;
  }
  const double limit = config_.fill_threshold * static_cast<double>(capacity_);
  std::vector<char> deficient(fill.num_classes(), 0);
  bool any_deficient = false;
  for (std::size_t j = 0; j < fill.num_classes(); ++j) {
    if (static_cast<double>(fill.counts[j]) < limit) {
      deficient[j] = 1;
      any_deficient = true;
    }
  }
  if (!any_deficient) return subset;

  std::vector<std::size_t> items;
  bool has_compensation = false;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (remaining_[i]) {
      items.push_back(i);
    } else if (!in_subset[i] && counts_[i] >= 1 && counts_[i] < config_.x_star &&
               pool_[i].histogram.Total() > 0 &&
               deficient[pool_[i].histogram.ModalClass()]) {
      items.push_back(i);
      has_compensation = true;
    }
  }
  if (!has_compensation) return subset;

  std::vector<ClientId> candidate = SolveOver(items, config_.max_size());
  const bool makes_progress = std::any_of(candidate.begin(), candidate.end(),
                                          [&](ClientId id) { return is_remaining(id); });
  if (!makes_progress || NidOf(candidate) >= NidOf(subset)) return subset;
  return candidate;
}

std::vector<ClientId> SubsetGenerator::EnforceMinSize(const std::vector<ClientId>& mandatory) {
  const int target = config_.min_size();
  if (static_cast<int>(mandatory.size()) >= target) return mandatory;

  std::vector<char> fixed(pool_.size(), 0);
  for (ClientId id : mandatory) fixed[IndexOf(id)] = 1;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (!fixed[i] && counts_[i] < config_.x_star) eligible.push_back(i);
  }
  if (eligible.empty()) return mandatory;

  // Complementary knapsacks: the mandatory clients pre-fill the class
  // knapsacks and the size rows, the eligible clients fill what is left.
  std::vector<PoolClient> clients;
  for (ClientId id : mandatory) clients.push_back(pool_[IndexOf(id)]);
  for (std::size_t i : eligible) clients.push_back(pool_[i]);
  const int total = static_cast<int>(clients.size());
  const int size_min = std::min(target, total);
  const int size_max = std::min(config_.max_size(), total);
  const mkp::MkpInstance full = mkp::BuildInstance(clients, capacity_, size_min, size_max);
  mkp::MkpInstance comp = mkp::BuildComplementary(full, mandatory);
  const auto scale = static_cast<std::int64_t>(comp.num_items()) + 1;
  for (std::size_t k = 0; k < comp.num_items(); ++k) {
    comp.profits[k] = comp.profits[k] * scale + (is_remaining(comp.item_ids[k]) ? 1 : 0);
  }

  mkp::SolveOptions options = config_.solver;
  options.seed = DeriveSeed(seed_, solves_++);
  mkp::MkpSolution sol = mkp::Solve(comp, options);
  if (!sol.feasible) {
    // The residual space cannot hold enough clients; take what fits and pad.
    comp.capacities[comp.size_min_row()] = 0;
    sol = mkp::Solve(comp, options);
  }

  std::vector<ClientId> subset = mandatory;
  if (sol.feasible) {
    for (ClientId id : sol.SelectedIds(comp)) subset.push_back(id);
  }

  // Padding beyond the knapsack capacity: add the eligible client that keeps
  // the subset Nid lowest; unselected clients first, then lower pool index.
  if (static_cast<int>(subset.size()) < size_min) {
    std::vector<char> taken(pool_.size(), 0);
    Histogram sum;
    for (ClientId id : subset) {
      taken[IndexOf(id)] = 1;
      sum += pool_[IndexOf(id)].histogram;
    }
    while (static_cast<int>(subset.size()) < size_min) {
      std::size_t best = pool_.size();
      double best_nid = 2.0;
      for (std::size_t i : eligible) {
        if (taken[i]) continue;
        Histogram trial = sum;
        trial += pool_[i].histogram;
        if (trial.Total() <= 0) continue;
        const double nid = Nid(trial);
        const bool better = best == pool_.size() || nid < best_nid ||
                            (nid == best_nid && remaining_[i] && !remaining_[best]);
        if (better) {
          best = i;
          best_nid = nid;
        }
      }
      if (best == pool_.size()) break;
      taken[best] = 1;
      sum += pool_[best].histogram;
      subset.push_back(pool_[best].id);
    }
  }
  std::sort(subset.begin(), subset.end());
  return subset;
}

void SubsetGenerator::RecordSelection(std::span<const ClientId> subset) {
  for (ClientId id : subset) {
    const std::size_t i = IndexOf(id);
    ++counts_[i];
    if (remaining_[i]) {
      remaining_[i] = 0;
      --remaining_count_;
    }
  }
}

std::vector<ClientId> SubsetGenerator::Next() {
  if (done()) return {};
  std::vector<ClientId> subset;
  bool final_branch = false;
  if (static_cast<int>(remaining_count_) >= config_.min_size()) {
    subset = SolveRemaining();
    if (subset.empty()) {
      // No remaining client fits the knapsacks on its own; force progress.
      for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (remaining_[i]) {
          subset.push_back(pool_[i].id);
          break;
        }
      }
    }
    if (NidOf(subset) > config_.nid_threshold) subset = ImproveNid(subset);
    if (static_cast<int>(subset.size()) < config_.min_size()) {
      subset = EnforceMinSize(subset);
    }
  } else {
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (remaining_[i]) subset.push_back(pool_[i].id);
    }
    subset = EnforceMinSize(subset);
    final_branch = true;
  }
  RecordSelection(subset);
  schedule_.subsets.push_back(subset);
  schedule_.per_subset_nid.push_back(NidOf(subset));
  schedule_.final_branch.push_back(final_branch ? 1 : 0);
  return subset;
}

SubsetSchedule SubsetGenerator::Run() {
  while (!done()) Next();
  schedule_.selection_counts.clear();
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    schedule_.selection_counts[pool_[i].id] = counts_[i];
  }
  return schedule_;
}

SubsetSchedule GenerateSubsets(std::span<const PoolClient> pool,
                               const SubsetGenConfig& config, std::uint64_t seed) {
  return SubsetGenerator(pool, config, seed).Run();
}

std::vector<std::vector<ClientId>> RandomSubsets(std::span<const PoolClient> pool,
                                                 std::span<const std::size_t> sizes,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ClientId> ids;
  for (const PoolClient& c : pool) ids.push_back(c.id);
  std::vector<std::vector<ClientId>> out;
  for (std::size_t size : sizes) {
    const std::size_t k = std::min(size, ids.size());
    std::vector<ClientId> subset;
    std::sample(ids.begin(), ids.end(), std::back_inserter(subset), k, rng);
    out.push_back(std::move(subset));
  }
  return out;
}

double MeanSubsetNid(std::span<const PoolClient> pool,
                     std::span<const std::vector<ClientId>> subsets) {
  if (subsets.empty()) return 0.0;
  std::unordered_map<ClientId, const Histogram*> by_id;
  for (const PoolClient& c : pool) by_id[c.id] = &c.histogram;
  double total = 0.0;
  for (const auto& subset : subsets) {
    Histogram sum;
    for (ClientId id : subset) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kUnknownItem, "client " + std::to_string(id) + " not in pool");
      }
      sum += *it->second;
    }
    total += Nid(sum);
  }
  return total / static_cast<double>(subsets.size());
}

}  // namespace fedsched
