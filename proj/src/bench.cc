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

#include "shuffledp/bench.h"

#include <algorithm>
#include <bit>
#include <chrono>

#include "shuffledp/errors.h"
#include "shuffledp/permute.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

// Sum of mixed bit patterns: invariant to element order.
void Signatures(std::span<const float> m, size_t n,
                std::vector<uint64_t>& rows, std::vector<uint64_t>& cols) {
  rows.assign(n, 0);
  cols.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const float* r = m.data() + i * n;
    uint64_t acc = 0;
    for (size_t j = 0; j < n; ++j) {
      const uint64_t h = MixSeed(std::bit_cast<uint32_t>(r[j]));
      acc += h;
      cols[j] += h;
    }
    rows[i] = acc;
  }
  std::sort(rows.begin(), rows.end());
  std::sort(cols.begin(), cols.end());
}

}  // namespace

bool IsRowColumnPermutation(std::span<const float> a, std::span<const float> b,
                            size_t n) {
  if (a.size() != n * n || b.size() != n * n) return false;
  std::vector<uint64_t> ra, ca, rb, cb;
  Signatures(a, n, ra, ca);
  Signatures(b, n, rb, cb);
  return ra == rb && ca == cb;
}

ShuffleBenchResult RunShuffleBench(size_t n, int reps, uint64_t seed) {
  if (n == 0 || reps < 1) throw DomainError("bench needs n >= 1 and reps >= 1");
  ShuffleBenchResult res;
  res.n = n;
  res.reps = reps;
  Rng rng(seed);
  std::vector<float> src(n * n);
  for (float& v : src) v = static_cast<float>(rng.Uniform());
  std::vector<float> dst(n * n);
  for (int r = 0; r < reps; ++r) {
    const Permutation rows = Permutation::Sample(n, rng);
    const Permutation cols = Permutation::Sample(n, rng);
    const auto t0 = std::chrono::steady_clock::now();
    PermuteRowsAndColumns(src, dst, n, rows, cols);
    const auto t1 = std::chrono::steady_clock::now();
    res.times_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::vector<double> sorted = res.times_ms;
  std::sort(sorted.begin(), sorted.end());
  const size_t m = sorted.size();
  res.median_ms = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  res.min_ms = sorted.front();
  res.permutation_ok = IsRowColumnPermutation(src, dst, n);
  return res;
}

}  // namespace shuffledp
