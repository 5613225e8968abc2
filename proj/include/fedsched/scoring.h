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

#ifndef FEDSCHED_SCORING_H_
#define FEDSCHED_SCORING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fedsched {

// Client selection criteria, in score-vector order.
enum Criterion : std::size_t {
  kCpu = 0,
  kGpu,
  kMemory,
  kStorage,
  kPower,
  kBandwidth,
  kConnection,
  kDataSize,
  kDataDistribution,
  kModelQuality,
  kBehavior,
};

inline constexpr std::size_t kNumCriteria = 11;

using ScoreVector = std::array<double, kNumCriteria>;
using Weights = std::array<double, kNumCriteria>;

// Raw resources a client reports, in the task requester's units. The same
// struct holds the requester's minimum requirement.
struct ResourceProfile {
  double cpu = 0.0;
  double gpu = 0.0;
  double memory = 0.0;
  double storage = 0.0;
  double power = 0.0;
  double bandwidth = 0.0;
  double connection = 0.0;
  std::int64_t data_size = 0;
};

// Per-class sample counts of one client (or of a union of clients).
struct Histogram {
  std::vector<std::int64_t> counts;

  Histogram() = default;
  explicit Histogram(std::vector<std::int64_t> c) : counts(std::move(c)) {}
  Histogram(std::initializer_list<std::int64_t> c) : counts(c) {}

  std::size_t num_classes() const { return counts.size(); }
  std::int64_t Total() const;
  // Index of the largest class; ties resolve to the lowest index.
  std::size_t ModalClass() const;

  Histogram& operator+=(const Histogram& other);
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

// Rolling window of per-task model quality and behavior scores.
struct ReputationRecord {
  std::vector<double> per_task_quality;
  std::vector<double> per_task_behavior;
  std::size_t window = 10;

  // Appends one finished task, dropping the oldest beyond the window.
  void Push(double q_task, double b_task);
  bool empty() const { return per_task_quality.empty(); }
};

struct HistoricalScores {
  double model_quality = 0.0;
  double behavior = 0.0;
};

// Score given to clients without any task history.
inline constexpr double kDefaultReputationPrior = 0.5;

// raw / minimum. Throws kInvalidRequirement for a non-positive minimum.
double ResourceRatio(double raw, double minimum);

// Divide-by-max normalization across a candidate set.
std::vector<double> NormalizeRatios(std::span<const double> ratios);

// Non-iid degree (max - min) / sum of a label histogram.
double Nid(const Histogram& h);

// Element-wise sum; all histograms must have the same number of classes.
Histogram SumHistograms(std::span<const Histogram> histograms);

// Nid of the union of a group of clients.
double SubsetNid(std::span<const Histogram> histograms);

// Cosine similarity between a local and a global parameter vector.
double ModelQualityRound(std::span<const double> local,
                         std::span<const double> global);

double PerTaskQuality(std::span<const double> round_values);
int BehaviorRound(bool returned);
double PerTaskBehavior(std::span<const int> round_values);

HistoricalScores ComputeHistoricalScores(
    const ReputationRecord& record, double prior = kDefaultReputationPrior);

double OverallScore(std::span<const double> weights,
                    std::span<const double> scores);

// floor(a * score + b), a > 0.
std::int64_t Cost(double score, double a, double b);

double Reputation(double q_task, double b_task);

// Everything known about a candidate before pool selection.
struct ClientProfile {
  ResourceProfile resources;
  Histogram histogram;
  ReputationRecord history;
};

// Builds the eleven-entry score vector of every candidate: resource and data
// size ratios against the requirement, normalized across the candidate set;
// 1 - Nid for the data distribution; historical quality and behavior.
std::vector<ScoreVector> BuildScoreVectors(std::span<const ClientProfile> clients,
                                           const ResourceProfile& minimum);

}  // namespace fedsched

#endif  // FEDSCHED_SCORING_H_
