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

#ifndef SHUFFLEDP_MODEL_H_
#define SHUFFLEDP_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shuffledp/blocks.h"

namespace shuffledp {

using Block = std::variant<MlpParams, AttentionParams>;

// A chain of blocks applied to one flattened example. An attention block
// views its input as seq x d_m (row-major), an MLP block as 1 x n.
// Gradients share this type: a gradient is a Model with the same shapes.
struct Model {
  std::vector<Block> blocks;

  size_t ParameterCount() const;
  Model ZerosLike() const;

  // Visits every tensor in a fixed order (block order, then field order).
  void ForEachTensor(const std::function<void(Matrix&)>& fn);
  void ForEachTensor(const std::function<void(const Matrix&)>& fn) const;

  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> flat);
};

enum class LossKind { kCrossEntropy, kSquaredError };

LossKind ParseLoss(const std::string& name);

// Output of the full chain for one example.
std::vector<double> Forward(const Model& model, std::span<const double> x);

// Per-example loss (not averaged). Squared error uses a one-hot target.
double ExampleLoss(std::span<const double> output, int label, LossKind loss);

struct ExampleGradient {
  Model grads;
  double loss = 0.0;
};

ExampleGradient Backprop(const Model& model, std::span<const double> x,
                         int label, LossKind loss);

struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  int num_classes = 2;

  size_t size() const { return features.size(); }
  size_t dim() const { return features.empty() ? 0 : features[0].size(); }
};

// One flattened gradient per example plus its l2 norm.
struct PerSampleGrads {
  std::vector<std::vector<double>> grads;
  std::vector<double> norms;
  std::vector<double> losses;

  size_t size() const { return grads.size(); }
};

// Computes per-example gradients with a per-example backward loop. The
// optional thread count fans the loop out; results do not depend on it.
PerSampleGrads ComputePerSampleGradients(const Model& model,
                                         const Dataset& data,
                                         std::span<const size_t> indices,
                                         LossKind loss, int threads = 1);

// g / max(1, |g| / c). Returns the applied scale factor.
double ClipToNorm(std::span<double> g, double c);

// Clips every per-sample gradient to norm c; norms are updated.
void ClipPerSample(PerSampleGrads& grads, double c);

// Sum over examples in index order.
std::vector<double> SumGradients(const PerSampleGrads& grads);

double L2Norm(std::span<const double> v);

double Accuracy(const Model& model, const Dataset& data);
double MeanLoss(const Model& model, const Dataset& data, LossKind loss);

// Architecture description, parsed from JSON:
//   {"input_dim": 16, "loss": "cross_entropy",
//    "blocks": [{"type": "attention", "model_dim": 4, "heads": 2,
//                "key_dim": 2, "value_dim": 2},
//               {"type": "mlp", "in": 16, "hidden": 8, "out": 2,
//                "activation": "tanh"}]}
struct BlockConfig {
  enum class Kind { kMlp, kAttention } kind = Kind::kMlp;
  size_t in = 0, hidden = 0, out = 0;
  Activation activation = Activation::kTanh;
  size_t model_dim = 0, heads = 0, key_dim = 0, value_dim = 0;
};

struct ModelConfig {
  size_t input_dim = 0;
  LossKind loss = LossKind::kCrossEntropy;
  std::vector<BlockConfig> blocks;

  // Throws ConfigError if consecutive block widths do not chain.
  void Validate() const;
};

ModelConfig ParseModelConfig(const std::string& json_text);
std::string ModelConfigToJson(const ModelConfig& config);

Model BuildModel(const ModelConfig& config, uint64_t seed);

// Flat binary weights file, little-endian:
//   bytes 0-3   magic "SDPW"
//   uint32      format version (1)
//   uint32      tensor count
//   per tensor: uint32 rows, uint32 cols, rows*cols float64 (row-major)
// Tensors appear in Model::ForEachTensor order.
void SaveWeights(const std::string& path, const Model& model);
// Loads into a model of matching architecture; throws ConfigError on any
// mismatch.
void LoadWeights(const std::string& path, Model& model);

}  // namespace shuffledp

#endif  // SHUFFLEDP_MODEL_H_
