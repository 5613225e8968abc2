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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_util.h"

namespace fedsched {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun Exec(const std::string& args) {
  const std::string cmd = std::string(FEDSCHED_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fedsched_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string TenClients() { return testing::DataPath("ten_clients.json"); }

TEST_F(CliTest, MissingRequiredOptionExitsTwo) {
  EXPECT_EQ(Exec("pool generate").status, 2);
  EXPECT_EQ(Exec("pool select --clients " + TenClients()).status, 2);
  EXPECT_EQ(Exec("bogus").status, 2);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  const CliRun a = Exec("--seed 5 pool generate --type three-labels --clients 30");
  const CliRun b = Exec("--seed 5 pool generate --type three-labels --clients 30");
  const CliRun c = Exec("--seed 6 pool generate --type three-labels --clients 30");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  const auto doc = nlohmann::json::parse(a.out);
  EXPECT_EQ(doc["clients"].size(), 30u);
}

TEST_F(CliTest, SelectAllMethodsOnTenClients) {
  const CliRun r = Exec("pool select --clients " + TenClients() +
                     " --budget 100 --method all --random-order 8,9,5,1,0,3,2,4,6,7");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["dp"]["total_score"].get<double>(), 36.85, 1e-9);
  EXPECT_EQ(doc["dp"]["total_cost"].get<int>(), 100);
  EXPECT_NEAR(doc["greedy"]["total_score"].get<double>(), 32.78, 1e-9);
  EXPECT_EQ(doc["greedy"]["total_cost"].get<int>(), 88);
}

TEST_F(CliTest, BudgetEdges) {
  const CliRun zero = Exec("pool select --clients " + TenClients() + " --budget 0 --method all");
  ASSERT_EQ(zero.status, 0);
  const auto z = nlohmann::json::parse(zero.out);
  for (const char* m : {"dp", "greedy", "random"}) EXPECT_TRUE(z[m]["selected_ids"].empty()) << m;
  const CliRun full = Exec("pool select --clients " + TenClients() + " --budget 151 --method dp");
  ASSERT_EQ(full.status, 0);
  EXPECT_EQ(nlohmann::json::parse(full.out)["selected_ids"].size(), 10u);
  EXPECT_EQ(Exec("pool select --clients " + TenClients() + " --budget 60 --min-clients 9").status,
            2);
}

TEST_F(CliTest, SubsetsForSmallPool) {
  ASSERT_EQ(Exec("pool generate --type one-label --clients 5 --out " + Path("p.json")).status, 0);
  const CliRun r = Exec("subsets --clients " + Path("p.json") + " --csv " + Path("h.csv"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc["subsets"].size(), 1u);
  EXPECT_EQ(doc["subsets"][0]["clients"].size(), 5u);
  std::ifstream csv(Path("h.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "subset_index,class,client_id,count");
}

TEST_F(CliTest, SimulateWithoutTraining) {
  {
    std::ofstream cfg(Path("run.yaml"));
    cfg << "seed: 3\npool:\n  type: two-labels\n  clients: 40\n";
  }
  const CliRun r = Exec("simulate --config " + Path("run.yaml") + " --periods 1 --no-train --out-dir " +
                     Path("out"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(fs::exists(Path("out/summary.json")));
  EXPECT_FALSE(fs::exists(Path("out/scheduled_metrics.csv")));
  EXPECT_EQ(Exec("report " + Path("out/summary.json")).status, 0);

  {
    std::ofstream cfg(Path("bad.yaml"));
    cfg << "scheduler:\n  dropout_rate: 1.5\n";
  }
  EXPECT_EQ(Exec("simulate --config " + Path("bad.yaml") + " --no-train").status, 2);
  EXPECT_EQ(Exec("simulate --config " + Path("missing.yaml")).status, 1);
}

}  // namespace
}  // namespace fedsched
