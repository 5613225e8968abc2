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

#include <functional>
#include <string>

#include <gtest/gtest.h>
#include "json.hpp"

#include "fedsched/config.h"
#include "fedsched/error.h"
#include "fedsched/io.h"
#include "test_util.h"

namespace fedsched {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

std::string MessageOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ClientFileTest, LoadsFixture) {
  const io::ClientFile file = io::LoadClientFile(testing::DataPath("ten_clients.json"));
  EXPECT_EQ(file.n_classes, 2);
  ASSERT_EQ(file.clients.size(), 10u);
  EXPECT_EQ(file.Find("7"), ClientId{7});
  EXPECT_FALSE(file.Find("x").has_value());
  const auto cands = io::ToCandidates(file, Weights{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  const auto expected = testing::TenClientCandidates();
  ASSERT_EQ(cands.size(), expected.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    EXPECT_EQ(cands[i].cost, expected[i].cost);
    EXPECT_DOUBLE_EQ(cands[i].score, expected[i].score);
  }
}

TEST(ClientFileTest, RoundTrip) {
  io::ClientFile file = io::LoadClientFile(testing::DataPath("ten_clients.json"));
  file.clients[3].available = false;
  const io::ClientFile back = io::ClientFileFromJson(io::ClientFileToJson(file));
  EXPECT_EQ(io::ClientFileToJson(back), io::ClientFileToJson(file));
  const auto pool = io::ToPool(back);
  EXPECT_EQ(pool.size(), 9u);
}

TEST(ClientFileTest, RejectsBadInput) {
  nlohmann::json doc = io::ClientFileToJson(
      io::LoadClientFile(testing::DataPath("ten_clients.json")));
  nlohmann::json dup = doc;
  dup["clients"][1]["id"] = "0";
  EXPECT_EQ(CodeOf([&] { io::ClientFileFromJson(dup); }), ErrorCode::kConfig);
  nlohmann::json short_scores = doc;
  short_scores["clients"][0]["scores"].erase(0);
  EXPECT_EQ(CodeOf([&] { io::ClientFileFromJson(short_scores); }), ErrorCode::kConfig);
  nlohmann::json bad_hist = doc;
  bad_hist["clients"][0]["histogram"] = {1, 2, 3};
  EXPECT_EQ(CodeOf([&] { io::ClientFileFromJson(bad_hist); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { io::LoadClientFile("/nonexistent/clients.json"); }), ErrorCode::kIo);
}

TEST(CsvTest, MetricsHeader) {
  const std::string csv = io::MetricsCsv(MetricsTimeline{});
  EXPECT_EQ(csv, "round,period,subset_index,n_participants,n_returned,accuracy,subset_nid\n");
  EXPECT_EQ(io::FormatFixed(0.123456), "0.1235");
}

TEST(RunConfigTest, EmptyDocumentGivesDefaults) {
  const RunConfig cfg = ParseRunConfig("{}\n");
  const RunConfig def;
  EXPECT_EQ(cfg.seed, def.seed);
  EXPECT_EQ(cfg.scheduler.subsets.n, def.scheduler.subsets.n);
  EXPECT_DOUBLE_EQ(cfg.accuracy_threshold, 0.8);
  EXPECT_FALSE(cfg.selection.enabled);
}

TEST(RunConfigTest, ParsesSections) {
  const RunConfig cfg = ParseRunConfig(
      "seed: 42\n"
      "pool:\n  type: two-labels\n  clients: 50\n"
      "scheduler:\n  dropout_rate: 0.05\n  max_rounds: 150\n"
      "subsets:\n  n: 8\n"
      "training:\n  model: mlp\n  learning_rate: 0.3\n");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.pool.type, sim::NonIidType::kTwoLabels91);
  EXPECT_EQ(cfg.pool.n_clients, 50);
  EXPECT_DOUBLE_EQ(cfg.scheduler.dropout_rate, 0.05);
  EXPECT_EQ(cfg.scheduler.max_rounds, 150);
  EXPECT_EQ(cfg.scheduler.subsets.n, 8);
  EXPECT_EQ(cfg.training.model, sim::ModelKind::kMlp);
  EXPECT_DOUBLE_EQ(cfg.training.local.learning_rate, 0.3);
}

TEST(RunConfigTest, UnknownKeyNamesLine) {
  const std::string msg = MessageOf([] {
    ParseRunConfig("seed: 1\nscheduler:\n  dropout: 0.1\n", "run.yaml");
  });
  EXPECT_NE(msg.find("run.yaml:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("dropout"), std::string::npos) << msg;
}

TEST(RunConfigTest, RejectsOutOfRange) {
  EXPECT_EQ(CodeOf([] { ParseRunConfig("scheduler:\n  dropout_rate: 1.5\n"); }),
            ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { ParseRunConfig("subsets:\n  n: 0\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { ParseRunConfig("pool:\n  type: five\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { ParseRunConfig("seed: [1, 2\n"); }), ErrorCode::kConfig);
}

TEST(RunConfigTest, YamlRoundTrip) {
  RunConfig cfg;
  cfg.seed = 9;
  cfg.pool.type = sim::NonIidType::kThreeLabels541;
  cfg.scheduler.dropout_rate = 0.1;
  cfg.selection.enabled = true;
  cfg.selection.budget = 300;
  cfg.training.model = sim::ModelKind::kMlp;
  const std::string yaml = RunConfigToYaml(cfg);
  const RunConfig back = ParseRunConfig(yaml);
  EXPECT_EQ(RunConfigToYaml(back), yaml);
  EXPECT_EQ(back.selection.budget, 300);
}

}  // namespace
}  // namespace fedsched
