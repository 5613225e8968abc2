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

#include "fedsched/fl_sim.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsched/error.h"
#include "fedsched/random.h"

namespace fedsched::sim {

namespace {

struct LabelShare {
  int offset;  // class offset from the block's major class
  int ratio;
};

int MaxLabels(NonIidType type) {
  switch (type) {
    case NonIidType::kOneLabel: return 1;
    case NonIidType::kTwoLabels91: return 2;
    case NonIidType::kThreeLabels541: return 3;
  }
  return 1;
}

void Softmax(std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    sum += z;
  }
  for (double& z : logits) z /= sum;
}

}  // namespace

std::string_view NonIidTypeName(NonIidType type) {
  switch (type) {
    case NonIidType::kOneLabel: return "one-label";
    case NonIidType::kTwoLabels91: return "two-labels";
    case NonIidType::kThreeLabels541: return "three-labels";
  }
  return "unknown";
}

std::optional<NonIidType> ParseNonIidType(std::string_view name) {
  if (name == "one-label" || name == "1") return NonIidType::kOneLabel;
  if (name == "two-labels" || name == "2") return NonIidType::kTwoLabels91;
  if (name == "three-labels" || name == "3") return NonIidType::kThreeLabels541;
  return std::nullopt;
}

void NonIidSpec::Validate() const {
  if (n_clients < 1) throw Error(ErrorCode::kConfig, "n_clients must be positive");
  if (samples_per_client < 1) {
    throw Error(ErrorCode::kConfig, "samples_per_client must be positive");
  }
  if (n_classes < MaxLabels(type)) {
    throw Error(ErrorCode::kConfig,
                std::string(NonIidTypeName(type)) + " pools need at least " +
                    std::to_string(MaxLabels(type)) + " classes");
  }
}

std::vector<std::int64_t> SplitByRatio(std::int64_t total, std::span<const int> ratios) {
  const std::int64_t denom = std::accumulate(ratios.begin(), ratios.end(), std::int64_t{0});
  if (denom <= 0) throw Error(ErrorCode::kInvalidArgument, "ratios must sum to a positive value");
  std::vector<std::int64_t> parts(ratios.size());
  std::vector<std::int64_t> remainders(ratios.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    parts[i] = total * ratios[i] / denom;
    remainders[i] = total * ratios[i] % denom;
    assigned += parts[i];
  }
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++parts[order[k % order.size()]];
  return parts;
}

std::vector<PoolClient> MakeNonIidPool(const NonIidSpec& spec) {
  spec.Validate();
  Rng rng(DeriveSeed(spec.seed, "pool"));
  const int c = spec.n_classes;
  const int blocks = (spec.n_clients + c - 1) / c;

  std::vector<int> minority_blocks(blocks, 0);
  if (spec.type == NonIidType::kThreeLabels541 && blocks >= 2) {
    const int n_minority = std::max(1, static_cast<int>(std::lround(0.2 * blocks)));
    std::vector<int> ids(blocks);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int k = 0; k < n_minority; ++k) minority_blocks[ids[k]] = 1 + coin(rng);
  }

  std::vector<std::vector<LabelShare>> block_shares(blocks);
  std::uniform_int_distribution<int> offset(1, c - 1);
  for (int b = 0; b < blocks; ++b) {
    switch (spec.type) {
      case NonIidType::kOneLabel:
        block_shares[b] = {{0, 1}};
        break;
      case NonIidType::kTwoLabels91:
        block_shares[b] = {{0, 9}, {offset(rng), 1}};
        break;
      case NonIidType::kThreeLabels541: {
        const int second = offset(rng);
        int third = offset(rng);
        while (third == second) third = offset(rng);
        if (minority_blocks[b] == 1) {
          block_shares[b] = {{0, 5}, {second, 1}};
        } else if (minority_blocks[b] == 2) {
          block_shares[b] = {{0, 4}, {second, 1}};
        } else {
          block_shares[b] = {{0, 5}, {second, 4}, {third, 1}};
        }
        break;
      }
    }
  }

  std::vector<PoolClient> pool(spec.n_clients);
  for (int i = 0; i < spec.n_clients; ++i) {
    const int block = i / c;
    const int major = i % c;
    const auto& shares = block_shares[block];
    std::vector<int> ratios;
    for (const LabelShare& s : shares) ratios.push_back(s.ratio);
    const auto parts = SplitByRatio(spec.samples_per_client, ratios);
    Histogram h(std::vector<std::int64_t>(c, 0));
    for (std::size_t k = 0; k < shares.size(); ++k) {
      h.counts[(major + shares[k].offset) % c] += parts[k];
    }
    pool[i] = PoolClient{i, std::move(h)};
  }
  return pool;
}

Histogram LabelHistogram(const Samples& samples, int n_classes) {
  Histogram h(std::vector<std::int64_t>(n_classes, 0));
  for (int y : samples.labels) {
    if (y < 0 || y >= n_classes) {
      throw Error(ErrorCode::kInvalidHistogram, "label out of range");
    }
    ++h.counts[y];
  }
  return h;
}

const Samples& SyntheticDataset::client(ClientId id) const {
  const auto it = clients.find(id);
  if (it == clients.end()) {
    throw Error(ErrorCode::kUnknownItem, "no data for client " + std::to_string(id));
  }
  return it->second;
}

SyntheticDataset MakeSyntheticDataset(std::span<const PoolClient> pool, int n_classes,
                                      const DataOptions& options) {
  if (options.dim < 1 || n_classes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "dimension and class count must be positive");
  }
  SyntheticDataset data;
  data.dim = options.dim;
  data.n_classes = n_classes;
  Rng mean_rng(DeriveSeed(options.seed, "class-means"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  data.class_means.assign(n_classes, std::vector<double>(options.dim));
  for (auto& mean : data.class_means) {
    for (double& v : mean) v = options.mean_scale * gauss(mean_rng);
  }

  auto draw = [&](Rng& rng, int label, Samples& out) {
    for (int j = 0; j < options.dim; ++j) {
      out.features.push_back(data.class_means[label][j] + gauss(rng));
    }
    out.labels.push_back(label);
  };

  for (const PoolClient& c : pool) {
    if (static_cast<int>(c.histogram.num_classes()) != n_classes) {
      throw Error(ErrorCode::kDimensionMismatch, "histogram length differs from class count");
    }
    Rng rng(DeriveSeed(DeriveSeed(options.seed, "client-data"),
                       static_cast<std::uint64_t>(c.id)));
    Samples s;
    s.dim = options.dim;
    std::vector<int> labels;
    for (int y = 0; y < n_classes; ++y) {
      labels.insert(labels.end(), static_cast<std::size_t>(c.histogram.counts[y]), y);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    for (int y : labels) draw(rng, y, s);
    data.clients.emplace(c.id, std::move(s));
  }

  Rng test_rng(DeriveSeed(options.seed, "test"));
  data.test.dim = options.dim;
  std::vector<int> labels;
  for (int y = 0; y < n_classes; ++y) labels.insert(labels.end(), options.test_per_class, y);
  std::shuffle(labels.begin(), labels.end(), test_rng);
  for (int y : labels) draw(test_rng, y, data.test);
  return data;
}

ResourceProfile DefaultRequirement() {
  ResourceProfile min;
  min.cpu = 2.0;
  min.gpu = 1.0;
  min.memory = 4.0;
  min.storage = 16.0;
  min.power = 0.5;
  min.bandwidth = 10.0;
  min.connection = 0.5;
  min.data_size = 20;
  return min;
}

std::vector<ClientProfile> MakeClientProfiles(std::span<const PoolClient> pool,
                                              std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "profiles"));
  std::uniform_real_distribution<double> factor(1.0, 4.0);
  const ResourceProfile min = DefaultRequirement();
  std::vector<ClientProfile> out;
  for (const PoolClient& c : pool) {
    ClientProfile p;
    p.resources.cpu = min.cpu * factor(rng);
    p.resources.gpu = min.gpu * factor(rng);
    p.resources.memory = min.memory * factor(rng);
    p.resources.storage = min.storage * factor(rng);
    p.resources.power = min.power * factor(rng);
    p.resources.bandwidth = min.bandwidth * factor(rng);
    p.resources.connection = min.connection * factor(rng);
    p.resources.data_size = c.histogram.Total();
    p.histogram = c.histogram;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Candidate> MakeCandidates(std::span<const PoolClient> pool,
                                      const CandidateOptions& options) {
  const auto profiles = MakeClientProfiles(pool, options.seed);
  const auto vectors = BuildScoreVectors(profiles, DefaultRequirement());
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Candidate c;
    c.id = pool[i].id;
    c.scores = vectors[i];
    // Two decimals, like every score handled by the selectors.
    c.score = static_cast<double>(ToCentiScore(OverallScore(options.weights, c.scores))) / 100.0;
    c.cost = std::max<std::int64_t>(1, Cost(c.score, options.cost_a, options.cost_b));
    out.push_back(c);
  }
  return out;
}

std::string_view ModelKindName(ModelKind kind) {
  return kind == ModelKind::kSoftmax ? "softmax" : "mlp";
}

std::optional<ModelKind> ParseModelKind(std::string_view name) {
  if (name == "softmax") return ModelKind::kSoftmax;
  if (name == "mlp") return ModelKind::kMlp;
  return std::nullopt;
}

Classifier::Classifier(ModelKind kind, int dim, int n_classes, int hidden)
    : kind_(kind), dim_(dim), n_classes_(n_classes), hidden_(hidden) {
  if (dim < 0 || n_classes < 1 || (kind == ModelKind::kMlp && hidden < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "bad classifier dimensions");
  }
}

std::size_t Classifier::num_params() const {
  const auto d = static_cast<std::size_t>(dim_);
  const auto c = static_cast<std::size_t>(n_classes_);
  const auto h = static_cast<std::size_t>(hidden_);
  if (kind_ == ModelKind::kSoftmax) return c * d + c;
  return h * d + h + c * h + c;
}

std::vector<double> Classifier::InitialWeights(std::uint64_t seed) const {
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> w(num_params());
  if (kind_ == ModelKind::kSoftmax) {
    for (double& v : w) v = 0.01 * gauss(rng);
    return w;
  }
  const auto d = static_cast<std::size_t>(dim_);
  const auto h = static_cast<std::size_t>(hidden_);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(std::max(dim_, 1)));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool first_layer = i < h * d + h;
    w[i] = (first_layer ? s1 : s2) * gauss(rng);
  }
  return w;
}

// Layouts: softmax [W (c x d) | b (c)]; mlp [W1 (h x d) | b1 (h) | W2 (c x h) | b2 (c)].
void Classifier::Forward(std::span<const double> w, const double* x,
                         std::vector<double>& hidden, std::vector<double>& logits) const {
  const int c = n_classes_;
  const int d = dim_;
  logits.assign(c, 0.0);
  if (kind_ == ModelKind::kSoftmax) {
    const double* bias = w.data() + static_cast<std::size_t>(c) * d;
    for (int k = 0; k < c; ++k) {
      const double* row = w.data() + static_cast<std::size_t>(k) * d;
      double z = bias[k];
      for (int j = 0; j < d; ++j) z += row[j] * x[j];
      logits[k] = z;
    }
    return;
  }
  const int h = hidden_;
  const double* w1 = w.data();
  const double* b1 = w1 + static_cast<std::size_t>(h) * d;
  const double* w2 = b1 + h;
  const double* b2 = w2 + static_cast<std::size_t>(c) * h;
  hidden.assign(h, 0.0);
  for (int u = 0; u < h; ++u) {
    double a = b1[u];
    const double* row = w1 + static_cast<std::size_t>(u) * d;
    for (int j = 0; j < d; ++j) a += row[j] * x[j];
    hidden[u] = std::tanh(a);
  }
  for (int k = 0; k < c; ++k) {
    double z = b2[k];
    const double* row = w2 + static_cast<std::size_t>(k) * h;
    for (int u = 0; u < h; ++u) z += row[u] * hidden[u];
    logits[k] = z;
  }
}

double Classifier::LossAndGradient(std::span<const double> w, const Samples& data,
                                   std::span<const std::size_t> rows,
                                   std::span<double> grad) const {
  if (w.size() != num_params() || grad.size() != num_params()) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector has the wrong size");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  if (rows.empty()) return 0.0;
  const int c = n_classes_;
  const int d = dim_;
  const int h = hidden_;
  std::vector<double> hidden;
  std::vector<double> p;
  std::vector<double> dhidden;
  double loss = 0.0;
  for (std::size_t r : rows) {
    const double* x = data.row(r);
    const int y = data.labels[r];
    Forward(w, x, hidden, p);
    Softmax(p);
    loss -= std::log(std::max(p[y], 1e-300));
    p[y] -= 1.0;  // dL/dz
    if (kind_ == ModelKind::kSoftmax) {
      double* gb = grad.data() + static_cast<std::size_t>(c) * d;
      for (int k = 0; k < c; ++k) {
        double* grow = grad.data() + static_cast<std::size_t>(k) * d;
        for (int j = 0; j < d; ++j) grow[j] += p[k] * x[j];
        gb[k] += p[k];
      }
      continue;
    }
    const std::size_t o_b1 = static_cast<std::size_t>(h) * d;
    const std::size_t o_w2 = o_b1 + h;
    const std::size_t o_b2 = o_w2 + static_cast<std::size_t>(c) * h;
    dhidden.assign(h, 0.0);
    for (int k = 0; k < c; ++k) {
      const double* w2row = w.data() + o_w2 + static_cast<std::size_t>(k) * h;
      double* g2row = grad.data() + o_w2 + static_cast<std::size_t>(k) * h;
      for (int u = 0; u < h; ++u) {
        g2row[u] += p[k] * hidden[u];
        dhidden[u] += p[k] * w2row[u];
      }
      grad[o_b2 + k] += p[k];
    }
    for (int u = 0; u < h; ++u) {
      const double dpre = dhidden[u] * (1.0 - hidden[u] * hidden[u]);
      double* g1row = grad.data() + static_cast<std::size_t>(u) * d;
      for (int j = 0; j < d; ++j) g1row[j] += dpre * x[j];
      grad[o_b1 + u] += dpre;
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad) g *= inv;
  return loss * inv;
}

double Classifier::Loss(std::span<const double> w, const Samples& data,
                        std::span<const std::size_t> rows) const {
  std::vector<double> hidden;
  std::vector<double> p;
  double loss = 0.0;
  for (std::size_t r : rows) {
    Forward(w, data.row(r), hidden, p);
    Softmax(p);
    loss -= std::log(std::max(p[data.labels[r]], 1e-300));
  }
  return rows.empty() ? 0.0 : loss / static_cast<double>(rows.size());
}

int Classifier::Predict(std::span<const double> w, const double* x) const {
  std::vector<double> hidden;
  std::vector<double> logits;
  Forward(w, x, hidden, logits);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

LocalUpdate LocalTrain(const Classifier& model, std::span<const double> global,
                       const Samples& data, const LocalTrainOptions& options,
                       std::uint64_t seed) {
  if (global.size() != model.num_params()) {
    throw Error(ErrorCode::kDimensionMismatch, "global weights have the wrong size");
  }
  if (options.epochs < 0 || options.batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad local training options");
  }
  LocalUpdate update;
  std::vector<double> w(global.begin(), global.end());
  std::vector<double> grad(w.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  const auto batch = static_cast<std::size_t>(options.batch_size);
  for (int epoch = 0; epoch < options.epochs && update.ok; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const double loss = model.LossAndGradient(w, data, rows, grad);
      if (!std::isfinite(loss)) {
        update.ok = false;
        break;
      }
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= options.learning_rate * grad[i];
    }
  }
  if (std::any_of(w.begin(), w.end(), [](double v) { return !std::isfinite(v); })) {
    update.ok = false;
  }
  update.delta.resize(w.size());
  update.weights.resize(w.size());
  // The local weights are re-derived from the delta so that w_t - delta
  // reproduces them exactly on the server.
  for (std::size_t i = 0; i < w.size(); ++i) {
    update.delta[i] = global[i] - w[i];
    update.weights[i] = global[i] - update.delta[i];
  }
  return update;
}

std::vector<double> AggregationWeights(std::span<const std::int64_t> sample_counts) {
  const std::int64_t total =
      std::accumulate(sample_counts.begin(), sample_counts.end(), std::int64_t{0});
  if (total <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "aggregation needs a positive sample count");
  }
  std::vector<double> p;
  p.reserve(sample_counts.size());
  for (std::int64_t n : sample_counts) {
    if (n < 0) throw Error(ErrorCode::kInvalidArgument, "negative sample count");
    p.push_back(static_cast<double>(n) / static_cast<double>(total));
  }
  return p;
}

std::vector<double> WeightedMeanDelta(std::span<const ClientUpdate> updates) {
  if (updates.empty()) return {};
  std::vector<std::int64_t> counts;
  for (const ClientUpdate& u : updates) counts.push_back(u.n_samples);
  const auto p = AggregationWeights(counts);
  const std::size_t dim = updates.front().delta.size();
  std::vector<double> mean(dim, 0.0);
  for (std::size_t k = 0; k < updates.size(); ++k) {
    if (updates[k].delta.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "client updates differ in size");
    }
    for (std::size_t i = 0; i < dim; ++i) mean[i] += p[k] * updates[k].delta[i];
  }
  return mean;
}

GlobalModel Aggregate(std::span<const ClientUpdate> updates, const GlobalModel& global,
                      double server_lr) {
  GlobalModel next = global;
  next.round_index = global.round_index + 1;
  if (updates.empty()) return next;
  const auto mean = WeightedMeanDelta(updates);
  if (mean.size() != global.weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "update and model sizes differ");
  }
  for (std::size_t i = 0; i < mean.size(); ++i) next.weights[i] -= server_lr * mean[i];
  return next;
}

double Evaluate(const Classifier& model, std::span<const double> weights,
                const Samples& test) {
  if (test.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (model.Predict(weights, test.row(i)) == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

FedAvgTrainer::FedAvgTrainer(const SyntheticDataset& data, const TrainerOptions& options,
                             std::uint64_t seed)
    : data_(data),
      options_(options),
      model_(options.model, data.dim, data.n_classes, options.hidden),
      seed_(seed) {
  global_.weights = model_.InitialWeights(DeriveSeed(seed_, "init"));
}

double FedAvgTrainer::Accuracy() const { return Evaluate(model_, global_.weights, data_.test); }

TrainerRoundResult FedAvgTrainer::TrainRound(int round_index,
                                             std::span<const ClientId> participants) {
  std::vector<ClientId> ids(participants.begin(), participants.end());
  std::sort(ids.begin(), ids.end());
  const std::uint64_t round_seed =
      DeriveSeed(DeriveSeed(seed_, "local"), static_cast<std::uint64_t>(round_index));

  TrainerRoundResult result;
  std::vector<ClientUpdate> updates;
  std::vector<ClientId> contributors;
  std::vector<std::vector<double>> local_weights;
  for (ClientId id : ids) {
    const Samples& samples = data_.client(id);
    LocalUpdate local = LocalTrain(model_, global_.weights, samples, options_.local,
                                   DeriveSeed(round_seed, static_cast<std::uint64_t>(id)));
    if (!local.ok) {
      result.clients[id] = ClientRoundResult{false, 0.0};
      continue;
    }
    updates.push_back(ClientUpdate{local.delta, static_cast<std::int64_t>(samples.size())});
    contributors.push_back(id);
    local_weights.push_back(std::move(local.weights));
  }
  const std::vector<double> mean_delta = WeightedMeanDelta(updates);
  global_ = Aggregate(updates, global_, options_.server_lr);

  for (std::size_t k = 0; k < contributors.size(); ++k) {
    double quality = 0.0;
    try {
      quality = options_.similarity == SimilarityMode::kWeights
                    ? ModelQualityRound(local_weights[k], global_.weights)
                    : ModelQualityRound(updates[k].delta, mean_delta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUndefinedSimilarity) throw;
    }
    result.clients[contributors[k]] = ClientRoundResult{true, quality};
  }
  result.global_metric = Accuracy();
  return result;
}

}  // namespace fedsched::sim
