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

#include "fedsched/error.h"

namespace fedsched {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidRequirement: return "invalid-requirement";
    case ErrorCode::kDegenerateNormalization: return "degenerate-normalization";
    case ErrorCode::kInvalidHistogram: return "invalid-histogram";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kUndefinedSimilarity: return "undefined-similarity";
    case ErrorCode::kNoParticipation: return "no-participation";
    case ErrorCode::kInfeasibleInstance: return "infeasible-instance";
    case ErrorCode::kTooManyItems: return "too-many-items";
    case ErrorCode::kUnknownItem: return "unknown-item";
    case ErrorCode::kEmptyPool: return "empty-pool";
    case ErrorCode::kTrainerFailure: return "trainer-failure";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace fedsched
