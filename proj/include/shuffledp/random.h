//
// Copyright 2026 The ShuffleDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef SHUFFLEDP_RANDOM_H_
#define SHUFFLEDP_RANDOM_H_

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace shuffledp {

// SplitMix64 finalizer; used to derive independent sub-seeds.
uint64_t MixSeed(uint64_t x);

// Seed for the `stream`-th independent stream derived from `seed`.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

// Explicitly seeded generator. Bounded integers use rejection sampling so
// permutations do not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(MixSeed(seed)) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  uint64_t UniformBelow(uint64_t n);

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};  // ziggurat
};

// Independent purpose-specific streams for a training run, so that toggling
// one feature (e.g. shuffling) never shifts another stream.
enum class Stream : uint64_t {
  kInit = 1,
  kSampling = 2,
  kNoise = 3,
  kPermutation = 4,
  kData = 5,
};

inline Rng MakeStream(uint64_t seed, Stream s) {
  return Rng(DeriveSeed(seed, static_cast<uint64_t>(s)));
}

}  // namespace shuffledp

#endif  // SHUFFLEDP_RANDOM_H_
