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

#ifndef SHUFFLEDP_BENCH_H_
#define SHUFFLEDP_BENCH_H_

#include <cstdint>
#include <span>
#include <vector>

namespace shuffledp {

struct ShuffleBenchResult {
  size_t n = 0;
  int reps = 0;
  std::vector<double> times_ms;
  double median_ms = 0.0;
  double min_ms = 0.0;
  // The output is a row and column permutation of the input.
  bool permutation_ok = false;
};

// Times a fused row+column index gather of a random float32 n x n matrix.
// Throws DomainError for n == 0 or reps < 1, std::bad_alloc if the two
// buffers do not fit.
ShuffleBenchResult RunShuffleBench(size_t n, int reps, uint64_t seed);

// Whether `b` equals `a` up to a permutation of rows and of columns,
// compared through order-independent row and column signatures.
bool IsRowColumnPermutation(std::span<const float> a, std::span<const float> b,
                            size_t n);

}  // namespace shuffledp

#endif  // SHUFFLEDP_BENCH_H_
