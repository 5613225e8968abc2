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

#include "fedsched/mkp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <bit>
#include <string>
#include <unordered_map>

#include "fedsched/error.h"
#include "fedsched/random.h"

namespace fedsched::mkp {

namespace {

using Lhs = std::vector<std::int64_t>;

bool IsPackingRow(const std::vector<std::int64_t>& row) {
  return std::all_of(row.begin(), row.end(), [](std::int64_t a) { return a >= 0; });
}

// Shared read-only view of an instance plus the per-row orderings used by
// the bound.
class Model {
 public:
  explicit Model(const MkpInstance& instance) : inst_(instance) {
    const std::size_t m = inst_.num_rows();
    const std::size_t n = inst_.num_items();
    for (std::size_t r = 0; r < m; ++r) {
      if (IsPackingRow(inst_.rows[r])) {
        packing_.push_back(r);
      } else {
        other_.push_back(r);
      }
    }
    // Rows in the surrogate: the class rows, when they are all packing rows.
    surrogate_weight_.assign(n, 0);
    bool surrogate_ok = inst_.num_class_rows > 0;
    for (std::size_t r = 0; r < inst_.num_class_rows && r < m; ++r) {
      if (!IsPackingRow(inst_.rows[r])) surrogate_ok = false;
    }
    if (surrogate_ok) {
      for (std::size_t r = 0; r < inst_.num_class_rows; ++r) {
        for (std::size_t i = 0; i < n; ++i) surrogate_weight_[i] += inst_.rows[r][i];
      }
      has_surrogate_ = true;
    }
    auto ratio_order = [&](const std::vector<std::int64_t>& w) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      // Decreasing profit / weight, zero weights first.
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const __int128 lhs = static_cast<__int128>(inst_.profits[a]) * w[b];
        const __int128 rhs = static_cast<__int128>(inst_.profits[b]) * w[a];
        return lhs > rhs;
      });
      return order;
    };
    for (std::size_t r : packing_) row_order_.push_back(ratio_order(inst_.rows[r]));
    if (has_surrogate_) surrogate_order_ = ratio_order(surrogate_weight_);

    // Greedy density: profit over the capacity share it consumes.
    density_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double share = 0.0;
      bool blocked = false;
      for (std::size_t r : packing_) {
        const std::int64_t a = inst_.rows[r][i];
        if (a == 0) continue;
        if (inst_.capacities[r] <= 0) {
          blocked = true;
          break;
        }
        share += static_cast<double>(a) / static_cast<double>(inst_.capacities[r]);
      }
      if (blocked) {
        density_[i] = -1.0;
      } else if (share == 0.0) {
        density_[i] = std::numeric_limits<double>::infinity();
      } else {
        density_[i] = static_cast<double>(inst_.profits[i]) / share;
      }
    }
    density_order_.resize(n);
    std::iota(density_order_.begin(), density_order_.end(), std::size_t{0});
    std::stable_sort(density_order_.begin(), density_order_.end(),
                     [&](std::size_t a, std::size_t b) { return density_[a] > density_[b]; });
  }

  const MkpInstance& inst() const { return inst_; }
  std::size_t n() const { return inst_.num_items(); }

  Lhs Residual(std::span<const char> x) const {
    Lhs res = inst_.capacities;
    for (std::size_t i = 0; i < n(); ++i) {
      if (x[i]) Take(res, i);
    }
    return res;
  }

  void Take(Lhs& res, std::size_t i) const {
    for (std::size_t r = 0; r < res.size(); ++r) res[r] -= inst_.rows[r][i];
  }
  void Give(Lhs& res, std::size_t i) const {
    for (std::size_t r = 0; r < res.size(); ++r) res[r] += inst_.rows[r][i];
  }

  // Item i can be added without breaking a packing row.
  bool Fits(const Lhs& res, std::size_t i) const {
    for (std::size_t r : packing_) {
      if (inst_.rows[r][i] > res[r]) return false;
    }
    return true;
  }

  bool AllRowsSatisfied(const Lhs& res) const {
    return std::all_of(res.begin(), res.end(), [](std::int64_t v) { return v >= 0; });
  }

  // Upper bound on the profit obtainable from items with usable[i] set, given
  // residual capacities.
  double Bound(const Lhs& res, const std::vector<char>& usable) const {
    double best = std::numeric_limits<double>::infinity();
    auto dantzig = [&](const std::vector<std::size_t>& order,
                       const std::vector<std::int64_t>& weight, double capacity) {
      double value = 0.0;
      double room = capacity;
      for (std::size_t i : order) {
        if (!usable[i]) continue;
        const std::int64_t w = weight[i];
        if (w == 0) {
          value += static_cast<double>(inst_.profits[i]);
        } else if (static_cast<double>(w) <= room) {
          room -= static_cast<double>(w);
          value += static_cast<double>(inst_.profits[i]);
        } else {
          value += static_cast<double>(inst_.profits[i]) * room / static_cast<double>(w);
          break;
        }
        if (value >= best) return value;
      }
      return value;
    };
    for (std::size_t k = 0; k < packing_.size(); ++k) {
      const std::size_t r = packing_[k];
      best = std::min(best, dantzig(row_order_[k], inst_.rows[r],
                                    static_cast<double>(std::max<std::int64_t>(res[r], 0))));
    }
    if (has_surrogate_) {
      double cap = 0.0;
      for (std::size_t r = 0; r < inst_.num_class_rows; ++r) {
        cap += static_cast<double>(std::max<std::int64_t>(res[r], 0));
      }
      best = std::min(best, dantzig(surrogate_order_, surrogate_weight_, cap));
    }
    if (!std::isfinite(best)) {
      best = 0.0;
      for (std::size_t i = 0; i < n(); ++i) {
        if (usable[i]) best += static_cast<double>(inst_.profits[i]);
      }
    }
    return best;
  }

  // The non-packing rows can still be met by adding usable items.
  bool CoverableRows(const Lhs& res, const std::vector<char>& usable) const {
    for (std::size_t r : other_) {
      std::int64_t reachable = res[r];
      for (std::size_t i = 0; i < n(); ++i) {
        if (usable[i] && inst_.rows[r][i] < 0) reachable -= inst_.rows[r][i];
      }
      if (reachable < 0) return false;
    }
    return true;
  }

  const std::vector<std::size_t>& density_order() const { return density_order_; }
  double density(std::size_t i) const { return density_[i]; }
  const std::vector<std::size_t>& other_rows() const { return other_; }

 private:
  const MkpInstance& inst_;
  std::vector<std::size_t> packing_;
  std::vector<std::size_t> other_;
  std::vector<std::vector<std::size_t>> row_order_;
  std::vector<std::int64_t> surrogate_weight_;
  std::vector<std::size_t> surrogate_order_;
  bool has_surrogate_ = false;
  std::vector<double> density_;
  std::vector<std::size_t> density_order_;
};

struct Incumbent {
  std::vector<char> x;
  std::int64_t objective = std::numeric_limits<std::int64_t>::min();
  bool found() const { return objective != std::numeric_limits<std::int64_t>::min(); }
};

// Greedy by density, then add / 1-1 swap / 1-2 swap improvement, then a
// repair step for covering rows (minimum subset size).
Incumbent Heuristic(const Model& model, const SolveOptions& options) {
  const MkpInstance& inst = model.inst();
  const std::size_t n = model.n();
  std::vector<char> x(n, 0);
  Lhs res = inst.capacities;
  std::int64_t objective = 0;
  for (std::size_t i : model.density_order()) {
    if (model.density(i) < 0.0) continue;
    if (model.Fits(res, i)) {
      x[i] = 1;
      model.Take(res, i);
      objective += inst.profits[i];
    }
  }

  std::vector<std::size_t> scan(n);
  std::iota(scan.begin(), scan.end(), std::size_t{0});
  Rng rng(options.seed);
  for (int pass = 0; pass < options.local_search_passes; ++pass) {
    std::shuffle(scan.begin(), scan.end(), rng);
    bool improved = false;
    for (std::size_t j : scan) {
      if (!x[j] && model.Fits(res, j)) {
        x[j] = 1;
        model.Take(res, j);
        objective += inst.profits[j];
        improved = true;
      }
    }
    for (std::size_t i : scan) {
      if (!x[i]) continue;
      model.Give(res, i);
      // Best single replacement, then best pair replacement.
      std::int64_t best_gain = 0;
      std::size_t best_j = n;
      std::size_t best_k = n;
      for (std::size_t j : scan) {
        if (x[j] || j == i || !model.Fits(res, j)) continue;
        const std::int64_t gain = inst.profits[j] - inst.profits[i];
        if (gain > best_gain) {
          best_gain = gain;
          best_j = j;
          best_k = n;
        }
        model.Take(res, j);
        for (std::size_t k : scan) {
          if (k <= j || x[k] || k == i || !model.Fits(res, k)) continue;
          const std::int64_t gain2 = inst.profits[j] + inst.profits[k] - inst.profits[i];
          if (gain2 > best_gain) {
            best_gain = gain2;
            best_j = j;
            best_k = k;
          }
        }
        model.Give(res, j);
      }
      if (best_j < n) {
        x[i] = 0;
        x[best_j] = 1;
        model.Take(res, best_j);
        objective += best_gain;
        if (best_k < n) {
          x[best_k] = 1;
          model.Take(res, best_k);
        }
        improved = true;
      } else {
        model.Take(res, i);
      }
    }
    if (!improved) break;
  }

  // Covering rows: add the lightest fitting items until they hold.
  if (!model.AllRowsSatisfied(res)) {
    std::vector<std::size_t> light(n);
    std::iota(light.begin(), light.end(), std::size_t{0});
    auto weight = [&](std::size_t i) {
      std::int64_t w = 0;
      for (std::size_t r = 0; r < inst.num_class_rows; ++r) w += inst.rows[r][i];
      return w;
    };
    std::stable_sort(light.begin(), light.end(),
                     [&](std::size_t a, std::size_t b) { return weight(a) < weight(b); });
    for (std::size_t i : light) {
      if (model.AllRowsSatisfied(res)) break;
      if (x[i] || !model.Fits(res, i)) continue;
      x[i] = 1;
      model.Take(res, i);
      objective += inst.profits[i];
    }
  }

  Incumbent inc;
  if (model.AllRowsSatisfied(res)) {
    inc.x = std::move(x);
    inc.objective = objective;
  }
  return inc;
}

class BranchAndBound {
 public:
  BranchAndBound(const Model& model, Incumbent incumbent, std::int64_t node_limit)
      : model_(model), best_(std::move(incumbent)), node_limit_(node_limit) {
    order_ = model_.density_order();
  }

  // Returns true when the search completed within the node budget.
  bool Run() {
    const std::size_t n = model_.n();
    x_.assign(n, 0);
    Lhs res = model_.inst().capacities;
    Dfs(0, res, 0);
    return !aborted_;
  }

  Incumbent TakeBest() { return std::move(best_); }
  std::int64_t nodes() const { return nodes_; }

 private:
  void Dfs(std::size_t depth, Lhs& res, std::int64_t profit) {
    if (aborted_) return;
    if (++nodes_ > node_limit_) {
      aborted_ = true;
      return;
    }
    const std::size_t n = model_.n();
    // Free items that still fit on their own.
    std::vector<char> usable(n, 0);
    for (std::size_t d = depth; d < n; ++d) {
      const std::size_t i = order_[d];
      usable[i] = model_.Fits(res, i) ? 1 : 0;
    }
    if (!model_.CoverableRows(res, usable)) return;
    if (model_.AllRowsSatisfied(res) && profit > best_.objective) {
      best_.objective = profit;
      best_.x = x_;
    }
    if (depth == n) return;
    const double bound = static_cast<double>(profit) + model_.Bound(res, usable);
    if (best_.found() &&
        std::floor(bound + 1e-9) <= static_cast<double>(best_.objective)) {
      return;
    }

    // Next usable item in branching order; unusable ones are fixed to 0.
    std::size_t d = depth;
    while (d < n && !usable[order_[d]]) ++d;
    if (d == n) return;
    const std::size_t i = order_[d];

    x_[i] = 1;
    model_.Take(res, i);
    Dfs(d + 1, res, profit + model_.inst().profits[i]);
    model_.Give(res, i);
    x_[i] = 0;

    Dfs(d + 1, res, profit);
  }

  const Model& model_;
  Incumbent best_;
  std::int64_t node_limit_;
  std::vector<std::size_t> order_;
  std::vector<char> x_;
  std::int64_t nodes_ = 0;
  bool aborted_ = false;
};

MkpSolution Finish(const MkpInstance& instance, Incumbent inc, bool proven,
                   double root_bound) {
  MkpSolution sol;
  sol.selected.assign(instance.num_items(), 0);
  if (!inc.found()) {
    sol.feasible = false;
    sol.proven_optimal = proven;
    return sol;
  }
  sol.selected = std::move(inc.x);
  sol.objective = inc.objective;
  sol.feasible = true;
  const double bound = std::floor(root_bound + 1e-9);
  if (proven || static_cast<double>(sol.objective) >= bound) {
    sol.proven_optimal = true;
    sol.gap = 0.0;
  } else {
    sol.gap = bound > 0.0 ? (bound - static_cast<double>(sol.objective)) / bound : 0.0;
  }
  return sol;
}

}  // namespace

std::vector<ClientId> MkpSolution::SelectedIds(const MkpInstance& instance) const {
  std::vector<ClientId> ids;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i]) ids.push_back(instance.item_ids[i]);
  }
  return ids;
}

std::size_t MkpSolution::num_selected() const {
  return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), 1));
}

MkpInstance BuildInstance(std::span<const PoolClient> clients,
                          std::int64_t capacity, int size_min, int size_max) {
  if (clients.empty()) {
    throw Error(ErrorCode::kEmptyPool, "cannot build a knapsack instance without clients");
  }
  if (capacity < 1) {
    throw Error(ErrorCode::kInvalidArgument, "knapsack capacity must be at least 1");
  }
  const int k = static_cast<int>(clients.size());
  if (size_min < 1 || size_min > size_max || size_max > k) {
    throw Error(ErrorCode::kInvalidArgument,
                "subset size bounds must satisfy 1 <= min <= max <= #clients, got [" +
                    std::to_string(size_min) + ", " + std::to_string(size_max) +
                    "] for " + std::to_string(k) + " clients");
  }
  const std::size_t c = clients.front().histogram.num_classes();
  MkpInstance inst;
  inst.num_class_rows = c;
  inst.rows.assign(c + 2, std::vector<std::int64_t>(clients.size(), 0));
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const Histogram& h = clients[i].histogram;
    if (h.num_classes() != c) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "client " + std::to_string(clients[i].id) + " has " +
                      std::to_string(h.num_classes()) + " classes, expected " +
                      std::to_string(c));
    }
    for (std::size_t r = 0; r < c; ++r) {
      if (h.counts[r] < 0) {
        throw Error(ErrorCode::kInvalidHistogram, "negative histogram count");
      }
      inst.rows[r][i] = h.counts[r];
    }
    inst.rows[c][i] = 1;
    inst.rows[c + 1][i] = -1;
    inst.profits.push_back(h.Total());
    inst.item_ids.push_back(clients[i].id);
  }
  inst.capacities.assign(c, capacity);
  inst.capacities.push_back(size_max);
  inst.capacities.push_back(-static_cast<std::int64_t>(size_min));
  return inst;
}

MkpInstance BuildComplementary(const MkpInstance& instance,
                               std::span<const ClientId> mandatory) {
  Validate(instance);
  std::unordered_map<ClientId, std::size_t> column;
  for (std::size_t i = 0; i < instance.num_items(); ++i) column[instance.item_ids[i]] = i;
  std::vector<char> fixed(instance.num_items(), 0);
  for (ClientId id : mandatory) {
    const auto it = column.find(id);
    if (it == column.end()) {
      throw Error(ErrorCode::kUnknownItem,
                  "mandatory item " + std::to_string(id) + " is not in the instance");
    }
    fixed[it->second] = 1;
  }

  MkpInstance out;
  out.num_class_rows = instance.num_class_rows;
  out.rows.assign(instance.num_rows(), {});
  out.capacities = instance.capacities;
  for (std::size_t i = 0; i < instance.num_items(); ++i) {
    if (fixed[i]) {
      for (std::size_t r = 0; r < instance.num_rows(); ++r) {
        out.capacities[r] -= instance.rows[r][i];
      }
      continue;
    }
    out.profits.push_back(instance.profits[i]);
    out.item_ids.push_back(instance.item_ids[i]);
    for (std::size_t r = 0; r < instance.num_rows(); ++r) {
      out.rows[r].push_back(instance.rows[r][i]);
    }
  }
  for (std::size_t r = 0; r < out.num_rows(); ++r) {
    if (instance.has_size_rows() && r == instance.size_min_row()) {
      out.capacities[r] = std::min<std::int64_t>(out.capacities[r], 0);
    } else {
      out.capacities[r] = std::max<std::int64_t>(out.capacities[r], 0);
    }
  }
  return out;
}

void Validate(const MkpInstance& instance) {
  const std::size_t n = instance.num_items();
  if (instance.item_ids.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "item ids do not match profits");
  }
  if (instance.capacities.size() != instance.num_rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "one capacity per row required");
  }
  if (instance.num_class_rows > instance.num_rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "more class rows than rows");
  }
  for (std::size_t r = 0; r < instance.num_rows(); ++r) {
    if (instance.rows[r].size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "row " + std::to_string(r) + " has the wrong number of columns");
    }
    if (r < instance.num_class_rows && !IsPackingRow(instance.rows[r])) {
      throw Error(ErrorCode::kInvalidHistogram, "class rows must be non-negative");
    }
  }
}

bool IsFeasible(const MkpInstance& instance, std::span<const char> selected) {
  if (selected.size() != instance.num_items()) return false;
  for (std::size_t r = 0; r < instance.num_rows(); ++r) {
    std::int64_t lhs = 0;
    for (std::size_t i = 0; i < instance.num_items(); ++i) {
      if (selected[i]) lhs += instance.rows[r][i];
    }
    if (lhs > instance.capacities[r]) return false;
  }
  return true;
}

std::int64_t Objective(const MkpInstance& instance, std::span<const char> selected) {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < instance.num_items(); ++i) {
    if (selected[i]) total += instance.profits[i];
  }
  return total;
}

double RelaxationBound(const MkpInstance& instance) {
  Validate(instance);
  const Model model(instance);
  const Lhs res = instance.capacities;
  std::vector<char> usable(instance.num_items(), 0);
  for (std::size_t i = 0; i < instance.num_items(); ++i) usable[i] = model.Fits(res, i);
  return model.Bound(res, usable);
}

MkpSolution Solve(const MkpInstance& instance, const SolveOptions& options) {
  Validate(instance);
  const Model model(instance);
  const double root_bound = RelaxationBound(instance);
  Incumbent inc = Heuristic(model, options);
  if (instance.num_items() > options.exact_threshold) {
    return Finish(instance, std::move(inc), false, root_bound);
  }
  BranchAndBound bnb(model, std::move(inc), options.node_limit);
  const bool complete = bnb.Run();
  return Finish(instance, bnb.TakeBest(), complete, root_bound);
}

MkpSolution BruteForce(const MkpInstance& instance) {
  Validate(instance);
  const std::size_t n = instance.num_items();
  if (n > kBruteForceMaxItems) {
    throw Error(ErrorCode::kTooManyItems,
                "brute force is limited to " + std::to_string(kBruteForceMaxItems) +
                    " items, got " + std::to_string(n));
  }
  const Model model(instance);
  // Gray-code walk: one item flips per step.
  std::vector<char> x(n, 0);
  Lhs res = instance.capacities;
  std::int64_t profit = 0;
  Incumbent best;
  if (model.AllRowsSatisfied(res)) {
    best.x = x;
    best.objective = 0;
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto i = static_cast<std::size_t>(std::countr_zero(step));
    if (x[i]) {
      x[i] = 0;
      model.Give(res, i);
      profit -= instance.profits[i];
    } else {
      x[i] = 1;
      model.Take(res, i);
      profit += instance.profits[i];
    }
    if (profit > best.objective && model.AllRowsSatisfied(res)) {
      best.x = x;
      best.objective = profit;
    }
  }
  return Finish(instance, std::move(best), true, 0.0);
}

nlohmann::json ToDebugJson(const MkpInstance& instance) {
  return nlohmann::json{
      {"profits", instance.profits},
      {"rows", instance.rows},
      {"capacities", instance.capacities},
      {"item_ids", instance.item_ids},
      {"num_class_rows", instance.num_class_rows},
  };
}

}  // namespace fedsched::mkp
