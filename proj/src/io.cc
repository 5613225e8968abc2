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

#include "fedsched/io.h"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fedsched/error.h"

namespace fedsched::io {

namespace {

using nlohmann::json;

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kConfig, "client file: " + what);
}

const json& Field(const json& obj, const char* key, std::size_t index) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    Malformed("clients[" + std::to_string(index) + "] has no \"" + key + "\"");
  }
  return *it;
}

}  // namespace

void ClientFile::Validate() const {
  if (n_classes < 1) Malformed("n_classes must be positive");
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const ClientRecord& c = clients[i];
    if (!seen.insert(c.id).second) Malformed("duplicate id \"" + c.id + "\"");
    if (static_cast<int>(c.histogram.num_classes()) != n_classes) {
      Malformed("histogram of \"" + c.id + "\" has " +
                std::to_string(c.histogram.num_classes()) + " entries, expected " +
                std::to_string(n_classes));
    }
    for (std::int64_t v : c.histogram.counts) {
      if (v < 0) Malformed("negative count in histogram of \"" + c.id + "\"");
    }
    if (c.cost < 0) Malformed("negative cost for \"" + c.id + "\"");
  }
}

std::optional<ClientId> ClientFile::Find(std::string_view id) const {
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].id == id) return static_cast<ClientId>(i);
  }
  return std::nullopt;
}

ClientFile ClientFileFromJson(const json& doc) {
  if (!doc.is_object()) Malformed("top level must be an object");
  ClientFile file;
  try {
    file.n_classes = doc.at("n_classes").get<int>();
    const json& list = doc.at("clients");
    if (!list.is_array()) Malformed("\"clients\" must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& entry = list[i];
      ClientRecord rec;
      const json& id = Field(entry, "id", i);
      rec.id = id.is_string() ? id.get<std::string>() : id.dump();
      const auto scores = Field(entry, "scores", i).get<std::vector<double>>();
      if (scores.size() != kNumCriteria) {
        Malformed("clients[" + std::to_string(i) + "] needs " +
                  std::to_string(kNumCriteria) + " scores, got " +
                  std::to_string(scores.size()));
      }
      std::copy(scores.begin(), scores.end(), rec.scores.begin());
      rec.cost = Field(entry, "cost", i).get<std::int64_t>();
      rec.histogram = Histogram(Field(entry, "histogram", i).get<std::vector<std::int64_t>>());
      rec.available = entry.value("available", true);
      if (entry.contains("score")) rec.score = entry.at("score").get<double>();
      file.clients.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    Malformed(e.what());
  }
  file.Validate();
  return file;
}

json ClientFileToJson(const ClientFile& file) {
  json list = json::array();
  for (const ClientRecord& c : file.clients) {
    json entry = {{"id", c.id},
                  {"scores", c.scores},
                  {"cost", c.cost},
                  {"histogram", c.histogram.counts},
                  {"available", c.available}};
    if (c.score) entry["score"] = *c.score;
    list.push_back(std::move(entry));
  }
  return json{{"clients", std::move(list)}, {"n_classes", file.n_classes}};
}

ClientFile LoadClientFile(const std::string& path) {
  const std::string text = ReadFile(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  return ClientFileFromJson(doc);
}

void SaveClientFile(const std::string& path, const ClientFile& file) {
  WriteFileAtomic(path, ClientFileToJson(file).dump(2) + "\n");
}

std::vector<PoolClient> ToPool(const ClientFile& file) {
  std::vector<PoolClient> pool;
  for (std::size_t i = 0; i < file.clients.size(); ++i) {
    if (!file.clients[i].available) continue;
    pool.push_back(PoolClient{static_cast<ClientId>(i), file.clients[i].histogram});
  }
  return pool;
}

std::vector<Candidate> ToCandidates(const ClientFile& file, const Weights& weights) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < file.clients.size(); ++i) {
    const ClientRecord& c = file.clients[i];
    if (!c.available) continue;
    Candidate cand;
    cand.id = static_cast<ClientId>(i);
    cand.scores = c.scores;
    cand.score = c.score ? *c.score : OverallScore(weights, c.scores);
    cand.cost = c.cost;
    out.push_back(cand);
  }
  return out;
}

ClientFile MakeClientFile(std::span<const PoolClient> pool,
                          std::span<const Candidate> candidates, int n_classes) {
  if (pool.size() != candidates.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "pool and candidate lists differ in length");
  }
  ClientFile file;
  file.n_classes = n_classes;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].id != candidates[i].id || pool[i].id != static_cast<ClientId>(i)) {
      throw Error(ErrorCode::kInvalidArgument, "pool ids must be 0..n-1 in order");
    }
    ClientRecord rec;
    rec.id = "c" + std::to_string(i);
    rec.scores = candidates[i].scores;
    rec.cost = candidates[i].cost;
    rec.histogram = pool[i].histogram;
    file.clients.push_back(std::move(rec));
  }
  file.Validate();
  return file;
}

json SelectionToJson(const PoolSelectionResult& result, const ClientFile& file) {
  json ids = json::array();
  for (ClientId id : result.selected) ids.push_back(file.Name(id));
  return json{{"method", SelectionMethodName(result.method)},
              {"selected_ids", std::move(ids)},
              {"total_score", result.total_score},
              {"total_cost", result.total_cost},
              {"approx_ratio", result.approx_ratio}};
}

json SubsetsToJson(const std::vector<std::vector<ClientId>>& subsets,
                   std::span<const double> nids, const ClientFile& file) {
  json out = json::array();
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    json ids = json::array();
    for (ClientId id : subsets[k]) ids.push_back(file.Name(id));
    json entry = {{"clients", std::move(ids)}};
    if (k < nids.size()) entry["nid"] = nids[k];
    out.push_back(std::move(entry));
  }
  return out;
}

json ScheduleToJson(const SubsetSchedule& schedule, const ClientFile& file) {
  json counts = json::object();
  for (const auto& [id, n] : schedule.selection_counts) counts[file.Name(id)] = n;
  json final_branch = json::array();
  for (char f : schedule.final_branch) final_branch.push_back(f != 0);
  return json{{"capacity", schedule.capacity},
              {"subsets", SubsetsToJson(schedule.subsets, schedule.per_subset_nid, file)},
              {"final_branch", std::move(final_branch)},
              {"selection_counts", std::move(counts)}};
}

std::string StackedHistogramCsv(const std::vector<std::vector<ClientId>>& subsets,
                                const ClientFile& file) {
  std::ostringstream out;
  out << "subset_index,class,client_id,count\n";
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    for (ClientId id : subsets[k]) {
      const Histogram& h = file.clients.at(id).histogram;
      for (std::size_t y = 0; y < h.num_classes(); ++y) {
        if (h.counts[y] == 0) continue;
        out << k << ',' << y << ',' << file.Name(id) << ',' << h.counts[y] << '\n';
      }
    }
  }
  return out.str();
}

std::string FormatFixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string MetricsCsv(const MetricsTimeline& timeline) {
  std::ostringstream out;
  out << "round,period,subset_index,n_participants,n_returned,accuracy,subset_nid\n";
  for (const RoundOutcome& r : timeline.rounds) {
    out << r.round_index << ',' << r.period << ',' << r.subset_index << ','
        << r.participants.size() << ',' << r.num_returned() << ','
        << FormatFixed(r.global_metric) << ',' << FormatFixed(r.subset_nid) << '\n';
  }
  return out.str();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path);
  }
}

}  // namespace fedsched::io
