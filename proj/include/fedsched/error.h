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

#ifndef FEDSCHED_ERROR_H_
#define FEDSCHED_ERROR_H_

#include <stdexcept>
#include <string>

namespace fedsched {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidRequirement,
  kDegenerateNormalization,
  kInvalidHistogram,
  kDimensionMismatch,
  kUndefinedSimilarity,
  kNoParticipation,
  kInfeasibleInstance,
  kTooManyItems,
  kUnknownItem,
  kEmptyPool,
  kTrainerFailure,
  kIo,
  kConfig,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported as fedsched::Error carrying a code so
// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fedsched

#endif  // FEDSCHED_ERROR_H_
