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

#ifndef SHUFFLEDP_BLOCKS_H_
#define SHUFFLEDP_BLOCKS_H_

#include <string_view>
#include <vector>

#include "shuffledp/tensor.h"

namespace shuffledp {

// Element-wise activations only; these are the ones under which the weight
// permutations below leave the block unchanged.
enum class Activation { kRelu, kTanh, kIdentity };

Activation ParseActivation(std::string_view name);
std::string_view ActivationName(Activation a);

// Two-layer perceptron
//   x1 = h(x0 W0^T + b0),  x2 = h(x1 W1^T + b1)
// with W0: hidden x in, b0: 1 x hidden, W1: out x hidden, b1: 1 x out.
struct MlpParams {
  Matrix w0;
  Matrix b0;
  Matrix w1;
  Matrix b1;
  Activation activation = Activation::kRelu;

  static MlpParams Random(size_t in, size_t hidden, size_t out,
                          Activation activation, Rng& rng);
  // Zero tensors of the same shapes.
  MlpParams ZerosLike() const;

  size_t in_dim() const { return w0.cols(); }
  size_t hidden_dim() const { return w0.rows(); }
  size_t out_dim() const { return w1.rows(); }
  size_t ParameterCount() const;

  // Throws ShapeError when the shape chain is inconsistent.
  void Validate() const;
};

struct MlpCache {
  Matrix x;
  Matrix z0;
  Matrix a0;
  Matrix z1;
};

struct MlpForwardResult {
  Matrix y;
  MlpCache cache;
};

// x: batch x in.
MlpForwardResult MlpForward(const MlpParams& params, const Matrix& x);

struct MlpBackwardResult {
  MlpParams grads;  // summed over the batch rows
  Matrix input_grad;
};

MlpBackwardResult MlpBackward(const MlpParams& params, const MlpCache& cache,
                              const Matrix& upstream);

// Multi-head self-attention block
//   A_i = softmax((X Wq_i)(X Wk_i)^T / sqrt(d_k)) X Wv_i,
//   Y = [A_1, ..., A_h] Wo
// with Wq_i, Wk_i: d_m x d_k, Wv_i: d_m x d_v and Wo: h d_v x d_m.
struct AttentionParams {
  std::vector<Matrix> wq;
  std::vector<Matrix> wk;
  std::vector<Matrix> wv;
  Matrix wo;

  static AttentionParams Random(size_t model_dim, size_t heads, size_t key_dim,
                                size_t value_dim, Rng& rng);
  AttentionParams ZerosLike() const;

  size_t heads() const { return wq.size(); }
  size_t model_dim() const { return wo.cols(); }
  size_t key_dim() const { return wq.empty() ? 0 : wq[0].cols(); }
  size_t value_dim() const { return wv.empty() ? 0 : wv[0].cols(); }
  size_t ParameterCount() const;

  void Validate() const;
};

struct AttentionHeadCache {
  Matrix q, k, v;
  Matrix attn;  // softmax weights, seq x seq
};

struct AttentionCache {
  Matrix x;
  std::vector<AttentionHeadCache> heads;
  Matrix concat;  // seq x (h d_v)
};

struct AttentionForwardResult {
  Matrix y;
  AttentionCache cache;
};

// x: seq x d_m.
AttentionForwardResult AttentionForward(const AttentionParams& params,
                                        const Matrix& x);

struct AttentionBackwardResult {
  AttentionParams grads;
  Matrix input_grad;
};

AttentionBackwardResult AttentionBackward(const AttentionParams& params,
                                          const AttentionCache& cache,
                                          const Matrix& upstream);

}  // namespace shuffledp

#endif  // SHUFFLEDP_BLOCKS_H_
