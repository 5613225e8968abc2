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

#include "fedsched/config.h"

#include <functional>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fedsched/error.h"
#include "fedsched/io.h"

namespace fedsched {

namespace {

class Section {
 public:
  Section(const YAML::Node& node, const std::string& source, std::string name)
      : node_(node), source_(source), name_(std::move(name)) {
    if (node_.IsDefined() && !node_.IsMap() && !node_.IsNull()) Fail(node_, "expected a mapping");
  }

  [[noreturn]] void Fail(const YAML::Node& at, const std::string& message) const {
    const YAML::Mark mark = at.Mark();
    std::ostringstream out;
    out << source_ << ':' << mark.line + 1 << ':' << mark.column + 1 << ": ";
    if (!name_.empty()) out << name_ << ": ";
    out << message;
    throw Error(ErrorCode::kConfig, out.str());
  }

  void Allow(std::initializer_list<const char*> keys) const {
    if (!node_.IsDefined() || !node_.IsMap()) return;
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!known.contains(key)) Fail(kv.first, "unknown key \"" + key + "\"");
    }
  }

  YAML::Node Child(const char* key) const {
    if (!node_.IsDefined() || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& map = node_;
    return map[key];
  }

  template <typename T>
  void Read(const char* key, T& out,
            const std::function<bool(const T&)>& ok = nullptr,
            const char* requirement = "") const {
    const YAML::Node value = Child(key);
    if (!value.IsDefined()) return;
    T parsed;
    try {
      parsed = value.as<T>();
    } catch (const YAML::Exception&) {
      Fail(value, std::string("bad value for \"") + key + "\"");
    }
    if (ok && !ok(parsed)) Fail(value, std::string("\"") + key + "\" " + requirement);
    out = parsed;
  }

  void ReadVector(const char* key, std::array<double, kNumCriteria>& out) const {
    const YAML::Node value = Child(key);
    if (!value.IsDefined()) return;
    std::vector<double> v;
    try {
      v = value.as<std::vector<double>>();
    } catch (const YAML::Exception&) {
      Fail(value, std::string("bad value for \"") + key + "\"");
    }
    if (v.size() != kNumCriteria) {
      Fail(value, std::string("\"") + key + "\" needs " + std::to_string(kNumCriteria) +
                      " entries");
    }
    std::copy(v.begin(), v.end(), out.begin());
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  const std::string& source_;
  std::string name_;
};

template <typename T>
std::function<bool(const T&)> AtLeast(T lo) {
  return [lo](const T& v) { return v >= lo; };
}

std::function<bool(const double&)> Within(double lo, double hi) {
  return [lo, hi](const double& v) { return v >= lo && v <= hi; };
}

}  // namespace

void RunConfig::Validate() const {
  pool.Validate();
  scheduler.Validate();
  if (selection.enabled && selection.min_clients < 0) {
    throw Error(ErrorCode::kConfig, "selection.min_clients must be non-negative");
  }
  if (data.dim < 1) throw Error(ErrorCode::kConfig, "data.dim must be positive");
  if (data.test_per_class < 1) {
    throw Error(ErrorCode::kConfig, "data.test_per_class must be positive");
  }
  if (training.local.batch_size < 1 || training.local.epochs < 0) {
    throw Error(ErrorCode::kConfig, "bad local training settings");
  }
}

RunConfig ParseRunConfig(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream out;
    out << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw Error(ErrorCode::kConfig, out.str());
  }
  RunConfig cfg;
  const Section top(root, source, "");
  top.Allow({"seed", "accuracy_threshold", "pool", "selection", "subsets", "scheduler", "data",
             "training"});
  top.Read<std::uint64_t>("seed", cfg.seed);
  top.Read<double>("accuracy_threshold", cfg.accuracy_threshold, Within(0.0, 1.0),
                   "must lie in [0, 1]");

  {
    const Section s(top.Child("pool"), source, "pool");
    s.Allow({"type", "clients", "classes", "samples_per_client"});
    std::string type(sim::NonIidTypeName(cfg.pool.type));
    s.Read<std::string>("type", type);
    const auto parsed = sim::ParseNonIidType(type);
    if (!parsed) s.Fail(s.Child("type"), "unknown pool type \"" + type + "\"");
    cfg.pool.type = *parsed;
    s.Read<int>("clients", cfg.pool.n_clients, AtLeast(1), "must be positive");
    s.Read<int>("classes", cfg.pool.n_classes, AtLeast(1), "must be positive");
    s.Read<int>("samples_per_client", cfg.pool.samples_per_client, AtLeast(1),
                "must be positive");
  }
  {
    const Section s(top.Child("selection"), source, "selection");
    s.Allow({"enabled", "budget", "min_clients", "thresholds", "cost_a", "cost_b", "weights"});
    s.Read<bool>("enabled", cfg.selection.enabled);
    s.Read<std::int64_t>("budget", cfg.selection.budget, AtLeast<std::int64_t>(0),
                         "must be non-negative");
    s.Read<int>("min_clients", cfg.selection.min_clients, AtLeast(0), "must be non-negative");
    s.ReadVector("thresholds", cfg.selection.thresholds);
    s.ReadVector("weights", cfg.selection.weights);
    s.Read<double>("cost_a", cfg.selection.cost_a);
    s.Read<double>("cost_b", cfg.selection.cost_b);
  }
  {
    SubsetGenConfig& sub = cfg.scheduler.subsets;
    const Section s(top.Child("subsets"), source, "subsets");
    s.Allow({"n", "delta", "x_star", "nid_threshold", "fill_threshold", "capacity",
             "exact_threshold", "node_limit"});
    s.Read<int>("n", sub.n, AtLeast(1), "must be positive");
    s.Read<int>("delta", sub.delta, AtLeast(0), "must be non-negative");
    s.Read<int>("x_star", sub.x_star, AtLeast(1), "must be at least 1");
    s.Read<double>("nid_threshold", sub.nid_threshold, Within(0.0, 1.0), "must lie in [0, 1]");
    s.Read<double>("fill_threshold", sub.fill_threshold,
                   [](const double& v) { return v > 0.0 && v <= 1.0; }, "must lie in (0, 1]");
    std::int64_t capacity = 0;
    s.Read<std::int64_t>("capacity", capacity, AtLeast<std::int64_t>(1), "must be positive");
    if (capacity > 0) sub.capacity_override = capacity;
    s.Read<std::size_t>("exact_threshold", sub.solver.exact_threshold);
    s.Read<std::int64_t>("node_limit", sub.solver.node_limit, AtLeast<std::int64_t>(1),
                         "must be positive");
    if (sub.min_size() < 1) s.Fail(s.Child("delta"), "n - delta must be at least 1");
  }
  {
    SchedulerConfig& sch = cfg.scheduler;
    const Section s(top.Child("scheduler"), source, "scheduler");
    s.Allow({"reputation_threshold", "suspension_periods", "dropout_rate", "max_periods",
             "max_rounds", "min_delta", "patience"});
    s.Read<double>("reputation_threshold", sch.reputation_threshold);
    s.Read<int>("suspension_periods", sch.suspension_periods, AtLeast(1), "must be at least 1");
    s.Read<double>("dropout_rate", sch.dropout_rate, Within(0.0, 1.0), "must lie in [0, 1]");
    s.Read<int>("max_periods", sch.max_periods, AtLeast(1), "must be at least 1");
    s.Read<int>("max_rounds", sch.max_rounds, AtLeast(0), "must be non-negative");
    s.Read<double>("min_delta", sch.convergence.min_delta);
    s.Read<int>("patience", sch.convergence.patience, AtLeast(0), "must be non-negative");
  }
  {
    const Section s(top.Child("data"), source, "data");
    s.Allow({"dim", "mean_scale", "test_per_class"});
    s.Read<int>("dim", cfg.data.dim, AtLeast(1), "must be positive");
    s.Read<double>("mean_scale", cfg.data.mean_scale, AtLeast(0.0), "must be non-negative");
    s.Read<int>("test_per_class", cfg.data.test_per_class, AtLeast(1), "must be positive");
  }
  {
    sim::TrainerOptions& tr = cfg.training;
    const Section s(top.Child("training"), source, "training");
    s.Allow({"model", "hidden", "epochs", "batch_size", "learning_rate", "server_lr",
             "similarity"});
    std::string model(sim::ModelKindName(tr.model));
    s.Read<std::string>("model", model);
    const auto kind = sim::ParseModelKind(model);
    if (!kind) s.Fail(s.Child("model"), "unknown model \"" + model + "\"");
    tr.model = *kind;
    s.Read<int>("hidden", tr.hidden, AtLeast(1), "must be positive");
    s.Read<int>("epochs", tr.local.epochs, AtLeast(0), "must be non-negative");
    s.Read<int>("batch_size", tr.local.batch_size, AtLeast(1), "must be positive");
    s.Read<double>("learning_rate", tr.local.learning_rate,
                   [](const double& v) { return v > 0.0; }, "must be positive");
    s.Read<double>("server_lr", tr.server_lr, [](const double& v) { return v > 0.0; },
                   "must be positive");
    std::string similarity = tr.similarity == sim::SimilarityMode::kWeights ? "weights" : "delta";
    s.Read<std::string>("similarity", similarity);
    if (similarity == "weights") {
      tr.similarity = sim::SimilarityMode::kWeights;
    } else if (similarity == "delta") {
      tr.similarity = sim::SimilarityMode::kDelta;
    } else {
      s.Fail(s.Child("similarity"), "similarity must be \"weights\" or \"delta\"");
    }
  }
  try {
    cfg.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, source + ": " + e.what());
  }
  return cfg;
}

RunConfig LoadRunConfig(const std::string& path) {
  return ParseRunConfig(io::ReadFile(path), path);
}

std::string RunConfigToYaml(const RunConfig& c) {
  YAML::Emitter out;
  auto seq = [&](const std::array<double, kNumCriteria>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << x;
    out << YAML::EndSeq;
  };
  const SubsetGenConfig& sub = c.scheduler.subsets;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "accuracy_threshold" << YAML::Value << c.accuracy_threshold;
  out << YAML::Key << "pool" << YAML::Value << YAML::BeginMap
      << YAML::Key << "type" << YAML::Value << std::string(sim::NonIidTypeName(c.pool.type))
      << YAML::Key << "clients" << YAML::Value << c.pool.n_clients
      << YAML::Key << "classes" << YAML::Value << c.pool.n_classes
      << YAML::Key << "samples_per_client" << YAML::Value << c.pool.samples_per_client
      << YAML::EndMap;
  out << YAML::Key << "selection" << YAML::Value << YAML::BeginMap
      << YAML::Key << "enabled" << YAML::Value << c.selection.enabled
      << YAML::Key << "budget" << YAML::Value << c.selection.budget
      << YAML::Key << "min_clients" << YAML::Value << c.selection.min_clients
      << YAML::Key << "thresholds" << YAML::Value;
  seq(c.selection.thresholds);
  out << YAML::Key << "weights" << YAML::Value;
  seq(c.selection.weights);
  out << YAML::Key << "cost_a" << YAML::Value << c.selection.cost_a
      << YAML::Key << "cost_b" << YAML::Value << c.selection.cost_b << YAML::EndMap;
  out << YAML::Key << "subsets" << YAML::Value << YAML::BeginMap
      << YAML::Key << "n" << YAML::Value << sub.n
      << YAML::Key << "delta" << YAML::Value << sub.delta
      << YAML::Key << "x_star" << YAML::Value << sub.x_star
      << YAML::Key << "nid_threshold" << YAML::Value << sub.nid_threshold
      << YAML::Key << "fill_threshold" << YAML::Value << sub.fill_threshold;
  if (sub.capacity_override) {
    out << YAML::Key << "capacity" << YAML::Value << *sub.capacity_override;
  }
  out << YAML::Key << "exact_threshold" << YAML::Value << sub.solver.exact_threshold
      << YAML::Key << "node_limit" << YAML::Value << sub.solver.node_limit << YAML::EndMap;
  out << YAML::Key << "scheduler" << YAML::Value << YAML::BeginMap
      << YAML::Key << "reputation_threshold" << YAML::Value << c.scheduler.reputation_threshold
      << YAML::Key << "suspension_periods" << YAML::Value << c.scheduler.suspension_periods
      << YAML::Key << "dropout_rate" << YAML::Value << c.scheduler.dropout_rate
      << YAML::Key << "max_periods" << YAML::Value << c.scheduler.max_periods
      << YAML::Key << "max_rounds" << YAML::Value << c.scheduler.max_rounds
      << YAML::Key << "min_delta" << YAML::Value << c.scheduler.convergence.min_delta
      << YAML::Key << "patience" << YAML::Value << c.scheduler.convergence.patience
      << YAML::EndMap;
  out << YAML::Key << "data" << YAML::Value << YAML::BeginMap
      << YAML::Key << "dim" << YAML::Value << c.data.dim
      << YAML::Key << "mean_scale" << YAML::Value << c.data.mean_scale
      << YAML::Key << "test_per_class" << YAML::Value << c.data.test_per_class << YAML::EndMap;
  out << YAML::Key << "training" << YAML::Value << YAML::BeginMap
      << YAML::Key << "model" << YAML::Value << std::string(sim::ModelKindName(c.training.model))
      << YAML::Key << "hidden" << YAML::Value << c.training.hidden
      << YAML::Key << "epochs" << YAML::Value << c.training.local.epochs
      << YAML::Key << "batch_size" << YAML::Value << c.training.local.batch_size
      << YAML::Key << "learning_rate" << YAML::Value << c.training.local.learning_rate
      << YAML::Key << "server_lr" << YAML::Value << c.training.server_lr
      << YAML::Key << "similarity" << YAML::Value
      << (c.training.similarity == sim::SimilarityMode::kWeights ? "weights" : "delta")
      << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace fedsched
