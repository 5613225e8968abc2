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

#ifndef FEDSCHED_RANDOM_H_
#define FEDSCHED_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace fedsched {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent seed and a stable label. All randomness
// in a run hangs off one root seed through this function, so two runs that
// share the root (e.g. the scheduled and random arms of a simulation) see the
// same data, dropouts and initial weights.
constexpr std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return MixSeed(parent ^ MixSeed(h));
}

constexpr std::uint64_t DeriveSeed(std::uint64_t parent, std::uint64_t index) {
  return MixSeed(parent ^ MixSeed(index + 0x632be59bd9b4e019ULL));
}

}  // namespace fedsched

#endif  // FEDSCHED_RANDOM_H_
