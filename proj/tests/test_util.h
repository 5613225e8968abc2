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

#ifndef FEDSCHED_TESTS_TEST_UTIL_H_
#define FEDSCHED_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fedsched/client.h"
#include "fedsched/pool_select.h"

namespace fedsched::testing {

#ifndef FEDSCHED_TEST_DATA_DIR
#define FEDSCHED_TEST_DATA_DIR "tests/data"
#endif

inline std::string DataPath(const std::string& name) {
  return std::string(FEDSCHED_TEST_DATA_DIR) + "/" + name;
}

// The ten candidates of the worked pool-selection example.
inline std::vector<Candidate> TenClientCandidates() {
  const double scores[] = {6.92, 4.89, 6.80, 6.08, 6.90, 6.08, 3.74, 3.36, 5.26, 3.39};
  const std::int64_t costs[] = {18, 14, 18, 17, 18, 17, 12, 11, 15, 11};
  std::vector<Candidate> out;
  for (int i = 0; i < 10; ++i) {
    Candidate c;
    c.id = i;
    c.score = scores[i];
    c.cost = costs[i];
    c.scores.fill(0.5);
    out.push_back(c);
  }
  return out;
}

// Best achievable centi-score by enumerating every subset.
inline std::int64_t ExhaustiveKnapsack(const std::vector<Candidate>& cands,
                                       std::int64_t budget) {
  const std::size_t n = cands.size();
  std::int64_t best = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::int64_t cost = 0;
    std::int64_t score = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        cost += cands[i].cost;
        score += ToCentiScore(cands[i].score);
      }
    }
    if (cost <= budget && score > best) best = score;
  }
  return best;
}

inline std::vector<Candidate> RandomCandidates(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> score(0.5, 10.0);
  std::vector<Candidate> out;
  for (int i = 0; i < n; ++i) {
    Candidate c;
    c.id = i;
    c.score = std::round(score(rng) * 100.0) / 100.0;
    c.cost = static_cast<std::int64_t>(std::floor(2.0 * c.score + 5.0 + 1e-9));
    c.scores.fill(0.5);
    out.push_back(c);
  }
  return out;
}

inline std::vector<PoolClient> RandomPool(std::mt19937_64& rng, int n, int c, int max_count) {
  std::uniform_int_distribution<int> count(0, max_count);
  std::vector<PoolClient> pool;
  for (int i = 0; i < n; ++i) {
    std::vector<std::int64_t> h(c);
    std::int64_t total = 0;
    for (auto& v : h) total += v = count(rng);
    if (total == 0) h[static_cast<std::size_t>(i % c)] = 1;
    pool.push_back(PoolClient{i, Histogram(h)});
  }
  return pool;
}

}  // namespace fedsched::testing

#endif  // FEDSCHED_TESTS_TEST_UTIL_H_
