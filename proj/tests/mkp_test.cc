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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fedsched/error.h"
#include "test_util.h"

namespace fedsched::mkp {
namespace {

std::vector<PoolClient> Pool(std::initializer_list<Histogram> hs) {
  std::vector<PoolClient> out;
  ClientId id = 0;
  for (const Histogram& h : hs) out.push_back(PoolClient{id++, h});
  return out;
}

// Random instance in the shape subset generation produces: class rows from
// histograms, then the two size rows.
MkpInstance RandomInstance(std::mt19937_64& rng, int n, int c) {
  auto pool = testing::RandomPool(rng, n, c, 12);
  std::uniform_int_distribution<int> cap(1, 30);
  std::uniform_int_distribution<int> lo(1, std::max(1, n / 2));
  const int size_min = lo(rng);
  std::uniform_int_distribution<int> hi(size_min, n);
  return BuildInstance(pool, cap(rng), size_min, hi(rng));
}

// Plain enumeration with its own feasibility arithmetic.
std::int64_t EnumerateOptimum(const MkpInstance& inst, bool* feasible) {
  const std::size_t n = inst.num_items();
  std::int64_t best = -1;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    bool ok = true;
    for (std::size_t r = 0; r < inst.num_rows() && ok; ++r) {
      std::int64_t lhs = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1) lhs += inst.rows[r][i];
      }
      ok = lhs <= inst.capacities[r];
    }
    if (!ok) continue;
    std::int64_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) p += inst.profits[i];
    }
    best = std::max(best, p);
  }
  *feasible = best >= 0;
  return best;
}

TEST(BuildInstanceTest, Shape) {
  const auto pool = Pool({{3, 1}, {0, 5}, {2, 2}});
  const MkpInstance inst = BuildInstance(pool, 10, 1, 3);
  ASSERT_EQ(inst.num_rows(), 4u);
  EXPECT_EQ(inst.num_items(), 3u);
  EXPECT_EQ(inst.capacities, (std::vector<std::int64_t>{10, 10, 3, -1}));
  EXPECT_EQ(inst.rows[0], (std::vector<std::int64_t>{3, 0, 2}));
  EXPECT_EQ(inst.rows[1], (std::vector<std::int64_t>{1, 5, 2}));
  EXPECT_EQ(inst.rows[2], (std::vector<std::int64_t>{1, 1, 1}));
  EXPECT_EQ(inst.rows[3], (std::vector<std::int64_t>{-1, -1, -1}));
  EXPECT_EQ(inst.profits, (std::vector<std::int64_t>{4, 5, 4}));
}

TEST(BuildInstanceTest, Errors) {
  EXPECT_THROW(BuildInstance({}, 10, 1, 1), Error);
  const auto mixed = Pool({{1, 2}, {1, 2, 3}});
  try {
    BuildInstance(mixed, 10, 1, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  const auto pool = Pool({{1, 2}});
  EXPECT_THROW(BuildInstance(pool, 10, 2, 1), Error);
  EXPECT_THROW(BuildInstance(pool, 0, 1, 1), Error);
}

TEST(BuildComplementaryTest, SubtractsMandatoryWeights) {
  const auto pool = Pool({{4, 6}, {1, 1}, {5, 0}});
  const MkpInstance inst = BuildInstance(pool, 10, 1, 3);
  const std::vector<ClientId> mandatory = {0};
  const MkpInstance comp = BuildComplementary(inst, mandatory);
  EXPECT_EQ(comp.capacities[0], 6);
  EXPECT_EQ(comp.capacities[1], 4);
  EXPECT_EQ(comp.capacities[2], 2);
  EXPECT_EQ(comp.capacities[3], 0);
  EXPECT_EQ(comp.item_ids, (std::vector<ClientId>{1, 2}));
}

TEST(BuildComplementaryTest, FullRowLeavesZero) {
  const auto pool = Pool({{10, 0}, {12, 0}, {0, 3}});
  const MkpInstance inst = BuildInstance(pool, 10, 1, 3);
  const std::vector<ClientId> mandatory = {1};
  const MkpInstance comp = BuildComplementary(inst, mandatory);
  EXPECT_EQ(comp.capacities[0], 0);
  const MkpSolution s = Solve(comp);
  ASSERT_TRUE(s.feasible);
  EXPECT_EQ(s.SelectedIds(comp), (std::vector<ClientId>{2}));
}

TEST(BuildComplementaryTest, EmptyMandatoryIsCopy) {
  std::mt19937_64 rng(1);
  const MkpInstance inst = RandomInstance(rng, 8, 3);
  const MkpInstance comp = BuildComplementary(inst, {});
  EXPECT_EQ(comp.profits, inst.profits);
  EXPECT_EQ(comp.rows, inst.rows);
  EXPECT_EQ(comp.capacities, inst.capacities);
  EXPECT_EQ(comp.item_ids, inst.item_ids);
}

TEST(BuildComplementaryTest, UnknownItem) {
  const auto pool = Pool({{1, 1}});
  const MkpInstance inst = BuildInstance(pool, 10, 1, 1);
  const std::vector<ClientId> bad = {7};
  try {
    BuildComplementary(inst, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownItem);
  }
}

TEST(BuildComplementaryTest, UnionWithMandatoryIsFeasibleInOriginal) {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const MkpInstance inst = RandomInstance(rng, 10, 3);
    std::vector<ClientId> mandatory;
    std::vector<char> base(inst.num_items(), 0);
    std::bernoulli_distribution coin(0.2);
    for (std::size_t i = 0; i < inst.num_items(); ++i) {
      if (coin(rng)) {
        mandatory.push_back(inst.item_ids[i]);
        base[i] = 1;
      }
    }
    // Only meaningful when the mandatory set fits by itself.
    MkpInstance relaxed = inst;
    relaxed.capacities[inst.size_min_row()] = 0;
    if (!IsFeasible(relaxed, base)) continue;
    const MkpInstance comp = BuildComplementary(inst, mandatory);
    const MkpSolution s = Solve(comp);
    if (!s.feasible) continue;
    std::vector<char> full = base;
    for (ClientId id : s.SelectedIds(comp)) {
      full[static_cast<std::size_t>(id)] = 1;
    }
    EXPECT_TRUE(IsFeasible(inst, full)) << trial;
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(SolveTest, SingleItem) {
  const auto pool = Pool({{2, 3}});
  const MkpInstance inst = BuildInstance(pool, 5, 1, 1);
  const MkpSolution s = Solve(inst);
  EXPECT_TRUE(s.feasible);
  EXPECT_EQ(s.objective, 5);
  EXPECT_EQ(s.num_selected(), 1u);
}

TEST(SolveTest, ZeroCapacityWithMinimumIsInfeasible) {
  const auto pool = Pool({{2, 3}, {1, 1}});
  MkpInstance inst = BuildInstance(pool, 1, 1, 2);
  inst.capacities[0] = 0;
  inst.capacities[1] = 0;
  const MkpSolution s = Solve(inst);
  EXPECT_FALSE(s.feasible);
  EXPECT_EQ(s.num_selected(), 0u);
  EXPECT_FALSE(BruteForce(inst).feasible);
}

TEST(SolveTest, TenItemFixtureMatchesEnumeration) {
  std::mt19937_64 rng(10);
  const MkpInstance inst = RandomInstance(rng, 10, 4);
  bool feasible = false;
  const std::int64_t opt = EnumerateOptimum(inst, &feasible);
  const MkpSolution s = Solve(inst);
  ASSERT_EQ(s.feasible, feasible);
  if (feasible) EXPECT_EQ(s.objective, opt);
}

TEST(BruteForceTest, EmptyAndErrors) {
  MkpInstance empty;
  const MkpSolution s = BruteForce(empty);
  EXPECT_TRUE(s.feasible);
  EXPECT_EQ(s.objective, 0);

  const auto pool = Pool({{5, 5}});
  MkpInstance inst = BuildInstance(pool, 1, 1, 1);
  EXPECT_FALSE(BruteForce(inst).feasible);

  std::mt19937_64 rng(2);
  const auto big = testing::RandomPool(rng, 21, 2, 3);
  try {
    BruteForce(BuildInstance(big, 10, 1, 21));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooManyItems);
  }
}

TEST(BruteForceTest, AgreesWithPlainEnumeration) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const MkpInstance inst = RandomInstance(rng, 1 + trial % 11, 2 + trial % 4);
    bool feasible = false;
    const std::int64_t opt = EnumerateOptimum(inst, &feasible);
    const MkpSolution s = BruteForce(inst);
    ASSERT_EQ(s.feasible, feasible) << trial;
    if (feasible) EXPECT_EQ(s.objective, opt) << trial;
  }
}

TEST(SolveTest, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(12345);
  int mismatches = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const int n = 1 + trial % 15;
    const int c = 2 + trial % 9;
    const MkpInstance inst = RandomInstance(rng, n, c);
    const MkpSolution want = BruteForce(inst);
    const MkpSolution got = Solve(inst);
    if (got.feasible != want.feasible || got.objective != want.objective) ++mismatches;
    if (got.feasible) {
      EXPECT_TRUE(IsFeasible(inst, got.selected));
      EXPECT_EQ(Objective(inst, got.selected), got.objective);
      EXPECT_TRUE(got.proven_optimal);
    }
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(SolveTest, MonotoneInCapacity) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 80; ++trial) {
    MkpInstance inst = RandomInstance(rng, 2 + trial % 12, 2 + trial % 5);
    const MkpSolution before = BruteForce(inst);
    for (std::size_t r = 0; r < inst.num_class_rows; ++r) inst.capacities[r] += 3;
    inst.capacities[inst.size_max_row()] += 1;
    const MkpSolution after = Solve(inst);
    if (before.feasible) {
      ASSERT_TRUE(after.feasible);
      EXPECT_GE(after.objective, before.objective);
    }
  }
}

TEST(SolveTest, HeuristicPathStaysFeasibleAndBounded) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pool = testing::RandomPool(rng, 80, 10, 20);
    const MkpInstance inst = BuildInstance(pool, 60, 1, 13);
    const MkpSolution s = Solve(inst);
    ASSERT_TRUE(s.feasible);
    EXPECT_TRUE(IsFeasible(inst, s.selected));
    EXPECT_LE(static_cast<double>(s.objective), RelaxationBound(inst) + 1e-9);
    EXPECT_GE(s.gap, 0.0);
  }
}

TEST(SolveTest, Deterministic) {
  std::mt19937_64 rng(21);
  const auto pool = testing::RandomPool(rng, 60, 6, 20);
  const MkpInstance inst = BuildInstance(pool, 50, 2, 12);
  const MkpSolution a = Solve(inst);
  const MkpSolution b = Solve(inst);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(RelaxationBoundTest, BoundsTheOptimum) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const MkpInstance inst = RandomInstance(rng, 1 + trial % 14, 2 + trial % 6);
    const MkpSolution s = BruteForce(inst);
    if (s.feasible) EXPECT_GE(RelaxationBound(inst) + 1e-9, static_cast<double>(s.objective));
  }
}

TEST(DebugJsonTest, CarriesTheMatrix) {
  const auto pool = Pool({{3, 1}, {0, 5}});
  const MkpInstance inst = BuildInstance(pool, 10, 1, 2);
  const auto j = ToDebugJson(inst);
  EXPECT_EQ(j["capacities"], nlohmann::json({10, 10, 2, -1}));
  EXPECT_EQ(j["profits"], nlohmann::json({4, 5}));
  EXPECT_EQ(j["rows"].size(), 4u);
}

}  // namespace
}  // namespace fedsched::mkp
