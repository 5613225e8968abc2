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

#include "fedsched/scoring.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsched/error.h"

namespace fedsched {

namespace {

double Mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

std::int64_t Histogram::Total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::size_t Histogram::ModalClass() const {
  if (counts.empty()) {
    throw Error(ErrorCode::kInvalidHistogram, "empty histogram has no modal class");
  }
  return static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Histogram& Histogram::operator+=(const Histogram& other) {
  if (counts.empty()) {
    counts.assign(other.counts.size(), 0);
  }
  if (other.counts.size() != counts.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "histogram lengths differ: " + std::to_string(counts.size()) +
                    " vs " + std::to_string(other.counts.size()));
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

void ReputationRecord::Push(double q_task, double b_task) {
  per_task_quality.push_back(q_task);
  per_task_behavior.push_back(b_task);
  while (per_task_quality.size() > window) {
    per_task_quality.erase(per_task_quality.begin());
    per_task_behavior.erase(per_task_behavior.begin());
  }
}

double ResourceRatio(double raw, double minimum) {
  if (!(minimum > 0.0)) {
    throw Error(ErrorCode::kInvalidRequirement,
                "minimum requirement must be positive, got " + std::to_string(minimum));
  }
  if (raw < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "resource value must be non-negative");
  }
  return raw / minimum;
}

std::vector<double> NormalizeRatios(std::span<const double> ratios) {
  const auto max_it = std::max_element(ratios.begin(), ratios.end());
  if (max_it == ratios.end() || !(*max_it > 0.0)) {
    throw Error(ErrorCode::kDegenerateNormalization,
                "cannot normalize: no positive ratio");
  }
  const double max_ratio = *max_it;
  std::vector<double> out(ratios.size());
  std::transform(ratios.begin(), ratios.end(), out.begin(),
                 [max_ratio](double r) { return r / max_ratio; });
  return out;
}

double Nid(const Histogram& h) {
  if (h.counts.empty()) {
    throw Error(ErrorCode::kInvalidHistogram, "empty histogram");
  }
  const std::int64_t total = h.Total();
  if (total <= 0) {
    throw Error(ErrorCode::kInvalidHistogram, "histogram has no samples");
  }
  const auto [lo, hi] = std::minmax_element(h.counts.begin(), h.counts.end());
  return static_cast<double>(*hi - *lo) / static_cast<double>(total);
}

Histogram SumHistograms(std::span<const Histogram> histograms) {
  Histogram sum;
  for (const Histogram& h : histograms) sum += h;
  return sum;
}

double SubsetNid(std::span<const Histogram> histograms) {
  return Nid(SumHistograms(histograms));
}

double ModelQualityRound(std::span<const double> local,
                         std::span<const double> global) {
  if (local.size() != global.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vectors differ in length");
  }
  double dot = 0.0;
  double norm_local = 0.0;
  double norm_global = 0.0;
  for (std::size_t i = 0; i < local.size(); ++i) {
    dot += local[i] * global[i];
    norm_local += local[i] * local[i];
    norm_global += global[i] * global[i];
  }
  if (norm_local == 0.0 || norm_global == 0.0) {
    throw Error(ErrorCode::kUndefinedSimilarity, "cosine similarity of a zero vector");
  }
  const double sim = dot / (std::sqrt(norm_local) * std::sqrt(norm_global));
  return std::clamp(sim, -1.0, 1.0);
}

double PerTaskQuality(std::span<const double> round_values) {
  if (round_values.empty()) {
    throw Error(ErrorCode::kNoParticipation, "no participated rounds");
  }
  return Mean(round_values);
}

int BehaviorRound(bool returned) { return returned ? 1 : 0; }

double PerTaskBehavior(std::span<const int> round_values) {
  if (round_values.empty()) {
    throw Error(ErrorCode::kNoParticipation, "no participated rounds");
  }
  const int sum = std::accumulate(round_values.begin(), round_values.end(), 0);
  return static_cast<double>(sum) / static_cast<double>(round_values.size());
}

HistoricalScores ComputeHistoricalScores(const ReputationRecord& record,
                                         double prior) {
  HistoricalScores scores{prior, prior};
  if (!record.per_task_quality.empty()) {
    scores.model_quality = Mean(record.per_task_quality);
  }
  if (!record.per_task_behavior.empty()) {
    scores.behavior = Mean(record.per_task_behavior);
  }
  return scores;
}

double OverallScore(std::span<const double> weights,
                    std::span<const double> scores) {
  if (weights.size() != kNumCriteria || scores.size() != kNumCriteria) {
    throw Error(ErrorCode::kDimensionMismatch,
                "weights and scores must both have 11 entries");
  }
  return std::inner_product(weights.begin(), weights.end(), scores.begin(), 0.0);
}

std::int64_t Cost(double score, double a, double b) {
  if (!(a > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cost slope must be positive");
  }
  // The epsilon keeps values such as 2 * 6.5 + 4 from landing just below an
  // integer.
  return static_cast<std::int64_t>(std::floor(a * score + b + 1e-9));
}

double Reputation(double q_task, double b_task) { return q_task + b_task; }

std::vector<ScoreVector> BuildScoreVectors(std::span<const ClientProfile> clients,
                                           const ResourceProfile& minimum) {
  const std::size_t n = clients.size();
  std::vector<ScoreVector> out(n);
  if (n == 0) return out;

  // Columns whose ratios are all zero (e.g. nobody has a GPU) stay at zero.
  auto fill = [&](Criterion criterion, auto raw_of, double min_value) {
    std::vector<double> ratios(n);
    for (std::size_t i = 0; i < n; ++i) {
      ratios[i] = ResourceRatio(raw_of(clients[i].resources), min_value);
    }
    if (std::none_of(ratios.begin(), ratios.end(), [](double r) { return r > 0.0; })) {
      for (auto& s : out) s[criterion] = 0.0;
      return;
    }
    const auto normalized = NormalizeRatios(ratios);
    for (std::size_t i = 0; i < n; ++i) out[i][criterion] = normalized[i];
  };
  fill(kCpu, [](const ResourceProfile& r) { return r.cpu; }, minimum.cpu);
  fill(kGpu, [](const ResourceProfile& r) { return r.gpu; }, minimum.gpu);
  fill(kMemory, [](const ResourceProfile& r) { return r.memory; }, minimum.memory);
  fill(kStorage, [](const ResourceProfile& r) { return r.storage; }, minimum.storage);
  fill(kPower, [](const ResourceProfile& r) { return r.power; }, minimum.power);
  fill(kBandwidth, [](const ResourceProfile& r) { return r.bandwidth; },
       minimum.bandwidth);
  fill(kConnection, [](const ResourceProfile& r) { return r.connection; },
       minimum.connection);
  fill(kDataSize,
       [](const ResourceProfile& r) { return static_cast<double>(r.data_size); },
       static_cast<double>(minimum.data_size));

  for (std::size_t i = 0; i < n; ++i) {
    out[i][kDataDistribution] = 1.0 - Nid(clients[i].histogram);
    const HistoricalScores hist = ComputeHistoricalScores(clients[i].history);
    out[i][kModelQuality] = hist.model_quality;
    out[i][kBehavior] = hist.behavior;
  }
  return out;
}

}  // namespace fedsched
