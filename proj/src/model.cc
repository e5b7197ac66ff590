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

#include "shuffledp/model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "shuffledp/errors.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

using json = nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

template <class M, class Fn>
void VisitTensors(M& block, Fn&& fn) {
  if constexpr (std::is_same_v<std::remove_const_t<M>, MlpParams>) {
    fn(block.w0);
    fn(block.b0);
    fn(block.w1);
    fn(block.b1);
  } else {
    for (size_t i = 0; i < block.wq.size(); ++i) {
      fn(block.wq[i]);
      fn(block.wk[i]);
      fn(block.wv[i]);
    }
    fn(block.wo);
  }
}

Matrix Reshape(std::span<const double> x, size_t rows, size_t cols) {
  if (rows * cols != x.size()) {
    throw ShapeError("cannot view " + std::to_string(x.size()) +
                     " values as " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  return Matrix(rows, cols, std::vector<double>(x.begin(), x.end()));
}

Matrix ViewForBlock(const Block& block, std::span<const double> x) {
  if (const auto* att = std::get_if<AttentionParams>(&block)) {
    const size_t dm = att->model_dim();
    if (dm == 0 || x.size() % dm != 0) {
      throw ShapeError("attention input of length " +
                       std::to_string(x.size()) + " is not a multiple of " +
                       std::to_string(dm));
    }
    return Reshape(x, x.size() / dm, dm);
  }
  return Reshape(x, 1, x.size());
}

std::vector<double> LossGradient(std::span<const double> out, int label,
                                 LossKind loss) {
  std::vector<double> g(out.size());
  if (loss == LossKind::kCrossEntropy) {
    const double m = *std::max_element(out.begin(), out.end());
    double z = 0.0;
    for (size_t i = 0; i < out.size(); ++i) z += std::exp(out[i] - m);
    for (size_t i = 0; i < out.size(); ++i) {
      g[i] = std::exp(out[i] - m) / z - (static_cast<int>(i) == label ? 1 : 0);
    }
  } else {
    for (size_t i = 0; i < out.size(); ++i) {
      g[i] = 2.0 * (out[i] - (static_cast<int>(i) == label ? 1.0 : 0.0));
    }
  }
  return g;
}

void CheckLabel(std::span<const double> out, int label) {
  if (label < 0 || static_cast<size_t>(label) >= out.size()) {
    throw ConfigError("label " + std::to_string(label) +
                      " out of range for output width " +
                      std::to_string(out.size()));
  }
}

size_t BlockOutputWidth(const BlockConfig& b, size_t in_width) {
  if (b.kind == BlockConfig::Kind::kMlp) return b.out;
  return in_width;
}

void WriteU32(std::ostream& os, uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 4);
}

uint32_t ReadU32(std::istream& is) {
  unsigned char buf[4];
  if (!is.read(reinterpret_cast<char*>(buf), 4)) {
    throw ConfigError("weights file truncated");
  }
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
  return v;
}

void WriteF64(std::ostream& os, double d) {
  uint64_t bits = std::bit_cast<uint64_t>(d);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

double ReadF64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) {
    throw ConfigError("weights file truncated");
  }
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

size_t Model::ParameterCount() const {
  size_t n = 0;
  ForEachTensor([&](const Matrix& m) { n += m.size(); });
  return n;
}

Model Model::ZerosLike() const {
  Model z;
  for (const Block& b : blocks) {
    std::visit([&](const auto& p) { z.blocks.emplace_back(p.ZerosLike()); }, b);
  }
  return z;
}

void Model::ForEachTensor(const std::function<void(Matrix&)>& fn) {
  for (Block& b : blocks) {
    std::visit([&](auto& p) { VisitTensors(p, fn); }, b);
  }
}

void Model::ForEachTensor(
    const std::function<void(const Matrix&)>& fn) const {
  for (const Block& b : blocks) {
    std::visit([&](const auto& p) { VisitTensors(p, fn); }, b);
  }
}

std::vector<double> Model::Flatten() const {
  std::vector<double> out;
  out.reserve(ParameterCount());
  ForEachTensor([&](const Matrix& m) {
    out.insert(out.end(), m.flat().begin(), m.flat().end());
  });
  return out;
}

void Model::Unflatten(std::span<const double> flat) {
  if (flat.size() != ParameterCount()) {
    throw ShapeError("unflatten: " + std::to_string(flat.size()) +
                     " values for " + std::to_string(ParameterCount()) +
                     " parameters");
  }
  size_t pos = 0;
  ForEachTensor([&](Matrix& m) {
    std::copy_n(flat.begin() + pos, m.size(), m.flat().begin());
    pos += m.size();
  });
}

LossKind ParseLoss(const std::string& name) {
  if (name == "cross_entropy" || name == "xent") return LossKind::kCrossEntropy;
  if (name == "squared_error" || name == "mse") return LossKind::kSquaredError;
  throw ConfigError("unknown loss '" + name + "'");
}

std::vector<double> Forward(const Model& model, std::span<const double> x) {
  std::vector<double> cur(x.begin(), x.end());
  for (const Block& b : model.blocks) {
    const Matrix in = ViewForBlock(b, cur);
    Matrix out = std::visit(
        Overloaded{
            [&](const MlpParams& p) { return MlpForward(p, in).y; },
            [&](const AttentionParams& p) { return AttentionForward(p, in).y; },
        },
        b);
    cur.assign(out.flat().begin(), out.flat().end());
  }
  return cur;
}

double ExampleLoss(std::span<const double> out, int label, LossKind loss) {
  CheckLabel(out, label);
  if (loss == LossKind::kCrossEntropy) {
    const double m = *std::max_element(out.begin(), out.end());
    double z = 0.0;
    for (double o : out) z += std::exp(o - m);
    return m + std::log(z) - out[static_cast<size_t>(label)];
  }
  double s = 0.0;
  for (size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<int>(i) == label ? 1.0 : 0.0;
    s += (out[i] - t) * (out[i] - t);
  }
  return s;
}

ExampleGradient Backprop(const Model& model, std::span<const double> x,
                         int label, LossKind loss) {
  using Cache = std::variant<MlpCache, AttentionCache>;
  std::vector<Cache> caches;
  caches.reserve(model.blocks.size());
  std::vector<size_t> in_rows;
  std::vector<double> cur(x.begin(), x.end());
  for (const Block& b : model.blocks) {
    const Matrix in = ViewForBlock(b, cur);
    in_rows.push_back(in.rows());
    Matrix out;
    if (const auto* mlp = std::get_if<MlpParams>(&b)) {
      auto r = MlpForward(*mlp, in);
      out = std::move(r.y);
      caches.emplace_back(std::move(r.cache));
    } else {
      auto r = AttentionForward(std::get<AttentionParams>(b), in);
      out = std::move(r.y);
      caches.emplace_back(std::move(r.cache));
    }
    cur.assign(out.flat().begin(), out.flat().end());
  }
  CheckLabel(cur, label);

  ExampleGradient result;
  result.loss = ExampleLoss(cur, label, loss);
  result.grads.blocks.resize(model.blocks.size());
  std::vector<double> upstream = LossGradient(cur, label, loss);
  for (size_t i = model.blocks.size(); i-- > 0;) {
    const Block& b = model.blocks[i];
    Matrix input_grad;
    if (const auto* mlp = std::get_if<MlpParams>(&b)) {
      const auto& cache = std::get<MlpCache>(caches[i]);
      auto r = MlpBackward(*mlp, cache,
                           Reshape(upstream, cache.z1.rows(), cache.z1.cols()));
      result.grads.blocks[i] = std::move(r.grads);
      input_grad = std::move(r.input_grad);
    } else {
      const auto& att = std::get<AttentionParams>(b);
      const auto& cache = std::get<AttentionCache>(caches[i]);
      auto r = AttentionBackward(
          att, cache, Reshape(upstream, cache.x.rows(), att.model_dim()));
      result.grads.blocks[i] = std::move(r.grads);
      input_grad = std::move(r.input_grad);
    }
    upstream.assign(input_grad.flat().begin(), input_grad.flat().end());
  }
  return result;
}

PerSampleGrads ComputePerSampleGradients(const Model& model,
                                         const Dataset& data,
                                         std::span<const size_t> indices,
                                         LossKind loss, int threads) {
  PerSampleGrads out;
  out.grads.resize(indices.size());
  out.norms.resize(indices.size());
  out.losses.resize(indices.size());
  auto work = [&](size_t k) {
    const size_t idx = indices[k];
    ExampleGradient g = Backprop(model, data.features[idx], data.labels[idx],
                                 loss);
    out.grads[k] = g.grads.Flatten();
    out.norms[k] = L2Norm(out.grads[k]);
    out.losses[k] = g.loss;
  };
  if (threads <= 1 || indices.size() < 2) {
    for (size_t k = 0; k < indices.size(); ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    const size_t n = static_cast<size_t>(threads);
    for (size_t t = 0; t < n; ++t) {
      pool.emplace_back([&, t] {
        for (size_t k = t; k < indices.size(); k += n) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

double L2Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double ClipToNorm(std::span<double> g, double c) {
  if (!(c > 0.0)) throw DomainError("clip norm must be > 0");
  const double norm = L2Norm(g);
  const double scale = 1.0 / std::max(1.0, norm / c);
  if (scale != 1.0) {
    for (double& v : g) v *= scale;
  }
  return scale;
}

void ClipPerSample(PerSampleGrads& grads, double c) {
  for (size_t k = 0; k < grads.size(); ++k) {
    const double scale = ClipToNorm(grads.grads[k], c);
    grads.norms[k] *= scale;
  }
}

std::vector<double> SumGradients(const PerSampleGrads& grads) {
  if (grads.grads.empty()) return {};
  std::vector<double> sum(grads.grads[0].size(), 0.0);
  for (const auto& g : grads.grads) {
    for (size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
  }
  return sum;
}

double Accuracy(const Model& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const auto out = Forward(model, data.features[i]);
    const auto best = std::max_element(out.begin(), out.end()) - out.begin();
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double MeanLoss(const Model& model, const Dataset& data, LossKind loss) {
  if (data.size() == 0) return 0.0;
  double s = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    s += ExampleLoss(Forward(model, data.features[i]), data.labels[i], loss);
  }
  return s / static_cast<double>(data.size());
}

void ModelConfig::Validate() const {
  if (input_dim == 0) throw ConfigError("model input_dim must be > 0");
  if (blocks.empty()) throw ConfigError("model needs at least one block");
  size_t width = input_dim;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const BlockConfig& b = blocks[i];
    const std::string where = "block " + std::to_string(i);
    if (b.kind == BlockConfig::Kind::kMlp) {
      if (b.in != width) {
        throw ConfigError(where + ": mlp in=" + std::to_string(b.in) +
                          " but incoming width is " + std::to_string(width));
      }
      if (b.hidden == 0 || b.out == 0) {
        throw ConfigError(where + ": mlp dims must be > 0");
      }
    } else {
      if (b.model_dim == 0 || b.heads == 0 || b.key_dim == 0 ||
          b.value_dim == 0) {
        throw ConfigError(where + ": attention dims must be > 0");
      }
      if (width % b.model_dim != 0) {
        throw ConfigError(where + ": width " + std::to_string(width) +
                          " not divisible by model_dim " +
                          std::to_string(b.model_dim));
      }
    }
    width = BlockOutputWidth(b, width);
  }
}

ModelConfig ParseModelConfig(const std::string& json_text) {
  ModelConfig cfg;
  try {
    const json j = json::parse(json_text);
    cfg.input_dim = j.at("input_dim").get<size_t>();
    if (j.contains("loss")) cfg.loss = ParseLoss(j["loss"].get<std::string>());
    for (const auto& jb : j.at("blocks")) {
      BlockConfig b;
      const std::string type = jb.at("type").get<std::string>();
      if (type == "mlp") {
        b.kind = BlockConfig::Kind::kMlp;
        b.in = jb.at("in").get<size_t>();
        b.hidden = jb.at("hidden").get<size_t>();
        b.out = jb.at("out").get<size_t>();
        b.activation =
            ParseActivation(jb.value("activation", std::string("tanh")));
      } else if (type == "attention" || type == "transformer") {
        b.kind = BlockConfig::Kind::kAttention;
        b.model_dim = jb.at("model_dim").get<size_t>();
        b.heads = jb.at("heads").get<size_t>();
        b.key_dim = jb.at("key_dim").get<size_t>();
        b.value_dim = jb.at("value_dim").get<size_t>();
      } else {
        throw ConfigError("unknown block type '" + type + "'");
      }
      cfg.blocks.push_back(b);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string ModelConfigToJson(const ModelConfig& config) {
  json j;
  j["input_dim"] = config.input_dim;
  j["loss"] = config.loss == LossKind::kCrossEntropy ? "cross_entropy"
                                                     : "squared_error";
  j["blocks"] = json::array();
  for (const BlockConfig& b : config.blocks) {
    if (b.kind == BlockConfig::Kind::kMlp) {
      j["blocks"].push_back({{"type", "mlp"},
                             {"in", b.in},
                             {"hidden", b.hidden},
                             {"out", b.out},
                             {"activation", ActivationName(b.activation)}});
    } else {
      j["blocks"].push_back({{"type", "attention"},
                             {"model_dim", b.model_dim},
                             {"heads", b.heads},
                             {"key_dim", b.key_dim},
                             {"value_dim", b.value_dim}});
    }
  }
  return j.dump();
}

Model BuildModel(const ModelConfig& config, uint64_t seed) {
  config.Validate();
  Rng rng = MakeStream(seed, Stream::kInit);
  Model m;
  for (const BlockConfig& b : config.blocks) {
    if (b.kind == BlockConfig::Kind::kMlp) {
      m.blocks.emplace_back(
          MlpParams::Random(b.in, b.hidden, b.out, b.activation, rng));
    } else {
      m.blocks.emplace_back(AttentionParams::Random(
          b.model_dim, b.heads, b.key_dim, b.value_dim, rng));
    }
  }
  return m;
}

void SaveWeights(const std::string& path, const Model& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os.write("SDPW", 4);
  WriteU32(os, 1);
  size_t count = 0;
  model.ForEachTensor([&](const Matrix&) { ++count; });
  WriteU32(os, static_cast<uint32_t>(count));
  model.ForEachTensor([&](const Matrix& m) {
    WriteU32(os, static_cast<uint32_t>(m.rows()));
    WriteU32(os, static_cast<uint32_t>(m.cols()));
    for (double v : m.flat()) WriteF64(os, v);
  });
  if (!os) throw ConfigError("write to '" + path + "' failed");
}

void LoadWeights(const std::string& path, Model& model) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "SDPW", 4) != 0) {
    throw ConfigError("'" + path + "' is not a weights file");
  }
  if (ReadU32(is) != 1) throw ConfigError("unsupported weights version");
  size_t count = 0;
  model.ForEachTensor([&](Matrix&) { ++count; });
  if (ReadU32(is) != count) throw ConfigError("weights tensor count mismatch");
  model.ForEachTensor([&](Matrix& m) {
    const uint32_t rows = ReadU32(is);
    const uint32_t cols = ReadU32(is);
    if (rows != m.rows() || cols != m.cols()) {
      throw ConfigError("weights tensor shape mismatch");
    }
    for (double& v : m.flat()) v = ReadF64(is);
  });
}

}  // namespace shuffledp
