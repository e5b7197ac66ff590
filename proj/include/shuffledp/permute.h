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

#ifndef SHUFFLEDP_PERMUTE_H_
#define SHUFFLEDP_PERMUTE_H_

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "shuffledp/blocks.h"
#include "shuffledp/model.h"
#include "shuffledp/random.h"

namespace shuffledp {

// A bijection on {0, ..., n-1}, applied as a gather: Apply(v)[i] = v[p[i]].
class Permutation {
 public:
  Permutation() = default;
  // Throws DomainError unless `indices` is a bijection.
  explicit Permutation(std::vector<size_t> indices);

  static Permutation Identity(size_t n);
  // Uniform over all n! orderings (Fisher-Yates). Throws for n == 0.
  static Permutation Sample(size_t n, Rng& rng);

  size_t size() const { return indices_.size(); }
  size_t operator[](size_t i) const { return indices_[i]; }
  std::span<const size_t> indices() const { return indices_; }

  bool IsIdentity() const;
  Permutation Inverse() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<size_t> indices_;
};

// Applying `first` then `second` equals applying the result.
Permutation Compose(const Permutation& first, const Permutation& second);

template <class T>
std::vector<T> Apply(const Permutation& p, std::span<const T> v);

// Row gather, column gather.
Matrix PermuteRows(const Matrix& m, const Permutation& p);
Matrix PermuteColumns(const Matrix& m, const Permutation& p);
// Row and column gather fused into one pass.
void PermuteRowsAndColumns(std::span<const float> src, std::span<float> dst,
                           size_t n, const Permutation& rows,
                           const Permutation& cols);

// Hidden-unit permutation of an MLP: rows of W0, entries of b0, columns of
// W1. b1 is untouched. Throws ShapeError if |p| != hidden width.
void ApplyMlpPermutation(MlpParams& params, const Permutation& p);

// Per-head key permutations and one shared value permutation.
struct AttentionPermutation {
  std::vector<Permutation> key;  // one per head, size d_k
  Permutation value;             // size d_v
};

// Columns of Wq_i and Wk_i by key[i], columns of Wv_i by value, and each of
// the h row blocks of Wo (d_v rows each) by value.
void ApplyAttentionPermutation(AttentionParams& params,
                               const AttentionPermutation& p);

using BlockPermutation = std::variant<Permutation, AttentionPermutation>;

// One permutation template per block, in block order.
using ModelPermutation = std::vector<BlockPermutation>;

ModelPermutation SampleModelPermutation(const Model& model, Rng& rng);
ModelPermutation IdentityModelPermutation(const Model& model);
void ApplyModelPermutation(Model& model, const ModelPermutation& p);
ModelPermutation Compose(const ModelPermutation& first,
                         const ModelPermutation& second);
ModelPermutation Inverse(const ModelPermutation& p);

// log of the number of weight permutations the templates above can reach:
// log(hidden!) per MLP, h log(d_k!) + log(d_v!) per attention block.
double LogPermutationCount(const Model& model);

// SGD step followed by a fresh permutation of every block. Returns the
// permutation that was applied.
ModelPermutation ShuffleUpdate(Model& model, const Model& noisy_grad,
                               double lr, Rng& rng);

}  // namespace shuffledp

#endif  // SHUFFLEDP_PERMUTE_H_
