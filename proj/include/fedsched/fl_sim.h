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

#ifndef FEDSCHED_FL_SIM_H_
#define FEDSCHED_FL_SIM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fedsched/client.h"
#include "fedsched/pool_select.h"
#include "fedsched/scheduler.h"

namespace fedsched::sim {

// Label-skew settings of the simulated pools.
enum class NonIidType {
  kOneLabel,          // every client holds a single class
  kTwoLabels91,       // two classes at 9:1
  kThreeLabels541,    // three classes at 5:4:1, a minority at 5:1 or 4:1
};

std::string_view NonIidTypeName(NonIidType type);
std::optional<NonIidType> ParseNonIidType(std::string_view name);

struct NonIidSpec {
  NonIidType type = NonIidType::kOneLabel;
  int n_clients = 100;
  int samples_per_client = 60;
  int n_classes = 10;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Client histograms with balanced class totals. Classes are dealt round
// robin in blocks of n_classes clients; within a block every class is the
// major label exactly once and every secondary position is a cyclic shift,
// so each full block adds the same count to every class.
std::vector<PoolClient> MakeNonIidPool(const NonIidSpec& spec);

// Splits `total` by integer ratios with largest-remainder rounding.
std::vector<std::int64_t> SplitByRatio(std::int64_t total, std::span<const int> ratios);

// Row-major feature matrix with labels.
struct Samples {
  int dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  const double* row(std::size_t i) const { return features.data() + i * dim; }
};

Histogram LabelHistogram(const Samples& samples, int n_classes);

struct DataOptions {
  int dim = 16;
  // Class means are drawn from N(0, mean_scale^2 I); samples add unit noise.
  double mean_scale = 0.6;
  int test_per_class = 200;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  int dim = 0;
  int n_classes = 0;
  std::vector<std::vector<double>> class_means;
  std::unordered_map<ClientId, Samples> clients;
  Samples test;

  const Samples& client(ClientId id) const;
};

// Draws every client's samples so that its labels match its histogram
// exactly, plus an iid test set.
SyntheticDataset MakeSyntheticDataset(std::span<const PoolClient> pool, int n_classes,
                                      const DataOptions& options);

// Random resource profiles and the resulting candidates (scores, costs) for
// a generated pool, so the pool-selection stage has something to work on.
struct CandidateOptions {
  double cost_a = 2.0;
  double cost_b = 5.0;
  Weights weights = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  std::uint64_t seed = 0;
};

std::vector<ClientProfile> MakeClientProfiles(std::span<const PoolClient> pool,
                                              std::uint64_t seed);
ResourceProfile DefaultRequirement();
std::vector<Candidate> MakeCandidates(std::span<const PoolClient> pool,
                                      const CandidateOptions& options);

enum class ModelKind { kSoftmax, kMlp };

std::string_view ModelKindName(ModelKind kind);
std::optional<ModelKind> ParseModelKind(std::string_view name);

// Multinomial logistic regression or a one-hidden-layer tanh network over
// a flat parameter vector.
class Classifier {
 public:
  Classifier(ModelKind kind, int dim, int n_classes, int hidden = 32);

  ModelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int n_classes() const { return n_classes_; }
  std::size_t num_params() const;

  std::vector<double> InitialWeights(std::uint64_t seed) const;

  // Mean cross-entropy over `rows`; writes the gradient into `grad`.
  double LossAndGradient(std::span<const double> weights, const Samples& data,
                         std::span<const std::size_t> rows, std::span<double> grad) const;
  double Loss(std::span<const double> weights, const Samples& data,
              std::span<const std::size_t> rows) const;
  int Predict(std::span<const double> weights, const double* x) const;

 private:
  // Logits for one sample; `hidden` receives the activations of the MLP.
  void Forward(std::span<const double> w, const double* x, std::vector<double>& hidden,
               std::vector<double>& logits) const;

  ModelKind kind_;
  int dim_;
  int n_classes_;
  int hidden_;
};

struct LocalTrainOptions {
  int epochs = 2;
  int batch_size = 16;
  double learning_rate = 0.05;
};

struct LocalUpdate {
  std::vector<double> weights;
  std::vector<double> delta;  // global - local
  bool ok = true;             // false when the loss became non-finite
};

// Mini-batch SGD on the client's cross-entropy, starting from the global
// weights.
LocalUpdate LocalTrain(const Classifier& model, std::span<const double> global,
                       const Samples& data, const LocalTrainOptions& options,
                       std::uint64_t seed);

struct GlobalModel {
  std::vector<double> weights;
  int round_index = 0;
};

struct ClientUpdate {
  std::vector<double> delta;
  std::int64_t n_samples = 0;
};

// p_k = n_k / sum n.
std::vector<double> AggregationWeights(std::span<const std::int64_t> sample_counts);

// sum_k p_k delta_k, accumulated in the order given.
std::vector<double> WeightedMeanDelta(std::span<const ClientUpdate> updates);

// w_{t+1} = w_t - server_lr * sum_k p_k delta_k. An empty update list leaves
// the model unchanged.
GlobalModel Aggregate(std::span<const ClientUpdate> updates, const GlobalModel& global,
                      double server_lr);

// Fraction of correct argmax predictions.
double Evaluate(const Classifier& model, std::span<const double> weights,
                const Samples& test);

enum class SimilarityMode {
  kWeights,  // cosine(local weights, new global weights)
  kDelta,    // cosine(local update, aggregated update)
};

struct TrainerOptions {
  ModelKind model = ModelKind::kSoftmax;
  int hidden = 32;
  LocalTrainOptions local;
  double server_lr = 1.0;
  SimilarityMode similarity = SimilarityMode::kWeights;
};

// FedAvg over a synthetic dataset; plugs into the scheduler as its trainer.
class FedAvgTrainer : public Trainer {
 public:
  FedAvgTrainer(const SyntheticDataset& data, const TrainerOptions& options,
                std::uint64_t seed);

  TrainerRoundResult TrainRound(int round_index,
                                std::span<const ClientId> participants) override;

  const GlobalModel& global() const { return global_; }
  const Classifier& model() const { return model_; }
  double Accuracy() const;

 private:
  const SyntheticDataset& data_;
  TrainerOptions options_;
  Classifier model_;
  std::uint64_t seed_;
  GlobalModel global_;
};

}  // namespace fedsched::sim

#endif  // FEDSCHED_FL_SIM_H_
