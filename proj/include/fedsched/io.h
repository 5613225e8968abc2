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

#ifndef FEDSCHED_IO_H_
#define FEDSCHED_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedsched/client.h"
#include "fedsched/pool_select.h"
#include "fedsched/scheduler.h"
#include "fedsched/subset_gen.h"
#include "json.hpp"

namespace fedsched::io {

// One entry of a client file. Internally clients are numbered by their
// position in the file; `id` is the external name.
struct ClientRecord {
  std::string id;
  ScoreVector scores{};
  std::int64_t cost = 1;
  Histogram histogram;
  bool available = true;
  // Overrides w . scores as the overall score when present.
  std::optional<double> score;
};

struct ClientFile {
  int n_classes = 0;
  std::vector<ClientRecord> clients;

  // Throws kConfig on duplicate ids, wrong vector lengths or negative counts.
  void Validate() const;
  // Position of the client named `id`, or nullopt.
  std::optional<ClientId> Find(std::string_view id) const;
  const std::string& Name(ClientId index) const { return clients.at(index).id; }
};

ClientFile ClientFileFromJson(const nlohmann::json& doc);
nlohmann::json ClientFileToJson(const ClientFile& file);
ClientFile LoadClientFile(const std::string& path);
void SaveClientFile(const std::string& path, const ClientFile& file);

// Available clients only, numbered by file position.
std::vector<PoolClient> ToPool(const ClientFile& file);
std::vector<Candidate> ToCandidates(const ClientFile& file, const Weights& weights);

// A generated pool with its candidate scores; ids become "c<index>".
ClientFile MakeClientFile(std::span<const PoolClient> pool,
                          std::span<const Candidate> candidates, int n_classes);

nlohmann::json SelectionToJson(const PoolSelectionResult& result, const ClientFile& file);
nlohmann::json ScheduleToJson(const SubsetSchedule& schedule, const ClientFile& file);
nlohmann::json SubsetsToJson(const std::vector<std::vector<ClientId>>& subsets,
                             std::span<const double> nids, const ClientFile& file);

// subset_index,class,client_id,count; zero counts are left out.
std::string StackedHistogramCsv(const std::vector<std::vector<ClientId>>& subsets,
                                const ClientFile& file);

// round,period,subset_index,n_participants,n_returned,accuracy,subset_nid
std::string MetricsCsv(const MetricsTimeline& timeline);

// Writes through a temporary file in the same directory and renames it into
// place. Throws kIo.
void WriteFileAtomic(const std::string& path, std::string_view content);
std::string ReadFile(const std::string& path);

// Four decimals, trailing zeros kept, so the output is byte-stable.
std::string FormatFixed(double value, int decimals = 4);

}  // namespace fedsched::io

#endif  // FEDSCHED_IO_H_
