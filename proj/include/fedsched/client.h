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

#ifndef FEDSCHED_CLIENT_H_
#define FEDSCHED_CLIENT_H_

#include <cstdint>
#include <vector>

#include "fedsched/scoring.h"

namespace fedsched {

// Clients are addressed by a dense integer id inside the library. The CLI
// keeps the mapping to the external string ids of the client file.
using ClientId = std::int32_t;

// A client as seen by the per-round scheduler: an id plus its label
// histogram.
struct PoolClient {
  ClientId id = 0;
  Histogram histogram;
};

}  // namespace fedsched

#endif  // FEDSCHED_CLIENT_H_
