// Copyright 2026 The occaug Authors
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

#pragma once

#include <cstdint>
#include <random>

namespace occaug {

/// Seeded generator with platform-independent draws.
///
/// std::mt19937_64 has a fully specified output sequence, but the standard
/// distributions do not; every draw here is derived from raw engine output so
/// that a seed reproduces the same sequence on any conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [lo, hi] (inclusive). Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [lo, hi). Returns lo when lo == hi.
  double uniform_real(double lo, double hi);

  /// True with probability p (p clamped to [0,1]).
  bool bernoulli(double p);

  /// Mixes a base seed with a stream id (e.g. an image id) into an
  /// independent seed; splitmix64 finaliser.
  static std::uint64_t derive_seed(std::uint64_t seed, std::int64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace occaug
