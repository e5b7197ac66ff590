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

#include "shuffledp/permute.h"

#include <cmath>
#include <numeric>
#include <string>

#include "shuffledp/errors.h"

namespace shuffledp {
namespace {

void RequireSize(const Permutation& p, size_t n, const char* what) {
  if (p.size() != n) {
    throw ShapeError(std::string(what) + ": permutation of size " +
                     std::to_string(p.size()) + " for dimension " +
                     std::to_string(n));
  }
}

}  // namespace

Permutation::Permutation(std::vector<size_t> indices)
    : indices_(std::move(indices)) {
  std::vector<bool> seen(indices_.size(), false);
  for (size_t v : indices_) {
    if (v >= indices_.size() || seen[v]) {
      throw DomainError("indices do not form a permutation");
    }
    seen[v] = true;
  }
}

Permutation Permutation::Identity(size_t n) {
  Permutation p;
  p.indices_.resize(n);
  std::iota(p.indices_.begin(), p.indices_.end(), size_t{0});
  return p;
}

Permutation Permutation::Sample(size_t n, Rng& rng) {
  if (n == 0) throw DomainError("cannot sample a permutation of size 0");
  Permutation p = Identity(n);
  for (size_t i = n - 1; i > 0; --i) {
    const size_t j = static_cast<size_t>(rng.UniformBelow(i + 1));
    std::swap(p.indices_[i], p.indices_[j]);
  }
  return p;
}

bool Permutation::IsIdentity() const {
  for (size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] != i) return false;
  }
  return true;
}

Permutation Permutation::Inverse() const {
  Permutation inv;
  inv.indices_.resize(indices_.size());
  for (size_t i = 0; i < indices_.size(); ++i) inv.indices_[indices_[i]] = i;
  return inv;
}

Permutation Compose(const Permutation& first, const Permutation& second) {
  RequireSize(second, first.size(), "compose");
  std::vector<size_t> out(first.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = first[second[i]];
  return Permutation(std::move(out));
}

template <class T>
std::vector<T> Apply(const Permutation& p, std::span<const T> v) {
  RequireSize(p, v.size(), "apply");
  std::vector<T> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[p[i]];
  return out;
}

template std::vector<double> Apply(const Permutation&, std::span<const double>);
template std::vector<float> Apply(const Permutation&, std::span<const float>);

Matrix PermuteRows(const Matrix& m, const Permutation& p) {
  RequireSize(p, m.rows(), "row permutation");
  Matrix out(m.rows(), m.cols());
  for (size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(p[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix PermuteColumns(const Matrix& m, const Permutation& p) {
  RequireSize(p, m.cols(), "column permutation");
  Matrix out(m.rows(), m.cols());
  for (size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(i);
    auto dst = out.row(i);
    for (size_t j = 0; j < m.cols(); ++j) dst[j] = src[p[j]];
  }
  return out;
}

void PermuteRowsAndColumns(std::span<const float> src, std::span<float> dst,
                           size_t n, const Permutation& rows,
                           const Permutation& cols) {
  RequireSize(rows, n, "row permutation");
  RequireSize(cols, n, "column permutation");
  if (src.size() != n * n || dst.size() != n * n) {
    throw ShapeError("square buffer size mismatch");
  }
  const size_t* col_idx = cols.indices().data();
  for (size_t i = 0; i < n; ++i) {
    const float* s = src.data() + rows[i] * n;
    float* d = dst.data() + i * n;
    for (size_t j = 0; j < n; ++j) d[j] = s[col_idx[j]];
  }
}

void ApplyMlpPermutation(MlpParams& params, const Permutation& p) {
  RequireSize(p, params.hidden_dim(), "mlp hidden permutation");
  params.w0 = PermuteRows(params.w0, p);
  params.b0 = PermuteColumns(params.b0, p);
  params.w1 = PermuteColumns(params.w1, p);
}

void ApplyAttentionPermutation(AttentionParams& params,
                               const AttentionPermutation& p) {
  if (p.key.size() != params.heads()) {
    throw ShapeError("need one key permutation per head");
  }
  RequireSize(p.value, params.value_dim(), "value permutation");
  const size_t dv = params.value_dim();
  for (size_t i = 0; i < params.heads(); ++i) {
    RequireSize(p.key[i], params.key_dim(), "key permutation");
    params.wq[i] = PermuteColumns(params.wq[i], p.key[i]);
    params.wk[i] = PermuteColumns(params.wk[i], p.key[i]);
    params.wv[i] = PermuteColumns(params.wv[i], p.value);
  }
  Matrix wo(params.wo.rows(), params.wo.cols());
  for (size_t i = 0; i < params.heads(); ++i) {
    for (size_t j = 0; j < dv; ++j) {
      auto src = params.wo.row(i * dv + p.value[j]);
      std::copy(src.begin(), src.end(), wo.row(i * dv + j).begin());
    }
  }
  params.wo = std::move(wo);
}

ModelPermutation SampleModelPermutation(const Model& model, Rng& rng) {
  ModelPermutation out;
  for (const Block& b : model.blocks) {
    if (const auto* mlp = std::get_if<MlpParams>(&b)) {
      out.emplace_back(Permutation::Sample(mlp->hidden_dim(), rng));
    } else {
      const auto& att = std::get<AttentionParams>(b);
      AttentionPermutation ap;
      for (size_t i = 0; i < att.heads(); ++i) {
        ap.key.push_back(Permutation::Sample(att.key_dim(), rng));
      }
      ap.value = Permutation::Sample(att.value_dim(), rng);
      out.emplace_back(std::move(ap));
    }
  }
  return out;
}

ModelPermutation IdentityModelPermutation(const Model& model) {
  ModelPermutation out;
  for (const Block& b : model.blocks) {
    if (const auto* mlp = std::get_if<MlpParams>(&b)) {
      out.emplace_back(Permutation::Identity(mlp->hidden_dim()));
    } else {
      const auto& att = std::get<AttentionParams>(b);
      AttentionPermutation ap;
      for (size_t i = 0; i < att.heads(); ++i) {
        ap.key.push_back(Permutation::Identity(att.key_dim()));
      }
      ap.value = Permutation::Identity(att.value_dim());
      out.emplace_back(std::move(ap));
    }
  }
  return out;
}

void ApplyModelPermutation(Model& model, const ModelPermutation& p) {
  if (p.size() != model.blocks.size()) {
    throw ShapeError("model permutation has wrong block count");
  }
  for (size_t i = 0; i < p.size(); ++i) {
    if (auto* mlp = std::get_if<MlpParams>(&model.blocks[i])) {
      ApplyMlpPermutation(*mlp, std::get<Permutation>(p[i]));
    } else {
      ApplyAttentionPermutation(std::get<AttentionParams>(model.blocks[i]),
                                std::get<AttentionPermutation>(p[i]));
    }
  }
}

ModelPermutation Compose(const ModelPermutation& first,
                         const ModelPermutation& second) {
  if (first.size() != second.size()) {
    throw ShapeError("compose: block count mismatch");
  }
  ModelPermutation out;
  for (size_t i = 0; i < first.size(); ++i) {
    if (const auto* a = std::get_if<Permutation>(&first[i])) {
      out.emplace_back(Compose(*a, std::get<Permutation>(second[i])));
    } else {
      const auto& a2 = std::get<AttentionPermutation>(first[i]);
      const auto& b2 = std::get<AttentionPermutation>(second[i]);
      AttentionPermutation ap;
      for (size_t h = 0; h < a2.key.size(); ++h) {
        ap.key.push_back(Compose(a2.key[h], b2.key.at(h)));
      }
      ap.value = Compose(a2.value, b2.value);
      out.emplace_back(std::move(ap));
    }
  }
  return out;
}

ModelPermutation Inverse(const ModelPermutation& p) {
  ModelPermutation out;
  for (const auto& bp : p) {
    if (const auto* a = std::get_if<Permutation>(&bp)) {
      out.emplace_back(a->Inverse());
    } else {
      const auto& ap = std::get<AttentionPermutation>(bp);
      AttentionPermutation inv;
      for (const auto& k : ap.key) inv.key.push_back(k.Inverse());
      inv.value = ap.value.Inverse();
      out.emplace_back(std::move(inv));
    }
  }
  return out;
}

double LogPermutationCount(const Model& model) {
  double total = 0.0;
  for (const Block& b : model.blocks) {
    if (const auto* mlp = std::get_if<MlpParams>(&b)) {
      total += std::lgamma(double(mlp->hidden_dim()) + 1.0);
    } else {
      const auto& att = std::get<AttentionParams>(b);
      total += double(att.heads()) * std::lgamma(double(att.key_dim()) + 1.0) +
               std::lgamma(double(att.value_dim()) + 1.0);
    }
  }
  return total;
}

ModelPermutation ShuffleUpdate(Model& model, const Model& noisy_grad,
                               double lr, Rng& rng) {
  const std::vector<double> g = noisy_grad.Flatten();
  std::vector<double> w = model.Flatten();
  if (g.size() != w.size()) throw ShapeError("gradient/model size mismatch");
  for (size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  model.Unflatten(w);
  ModelPermutation p = SampleModelPermutation(model, rng);
  ApplyModelPermutation(model, p);
  return p;
}

}  // namespace shuffledp
