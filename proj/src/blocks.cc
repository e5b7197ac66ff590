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

#include "shuffledp/blocks.h"

#include <cmath>
#include <string>

#include "shuffledp/errors.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

double Apply(Activation a, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kIdentity:
      return z;
  }
  return z;
}

// Derivative expressed through the pre-activation.
double Derivative(Activation a, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

Matrix Activate(Activation a, const Matrix& z) {
  Matrix out = z;
  for (double& v : out.flat()) v = Apply(a, v);
  return out;
}

// upstream * h'(z), element-wise.
Matrix ActivationBackward(Activation a, const Matrix& z,
                          const Matrix& upstream) {
  Matrix out = upstream;
  auto zf = z.flat();
  auto of = out.flat();
  for (size_t i = 0; i < of.size(); ++i) of[i] *= Derivative(a, zf[i]);
  return out;
}

// rows of x W^T + b (b broadcast over rows).
Matrix Affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix z = MatMulTransB(x, w);
  for (size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (size_t j = 0; j < r.size(); ++j) r[j] += b(0, j);
  }
  return z;
}

Matrix ColumnSums(const Matrix& m) {
  Matrix out(1, m.cols());
  for (size_t i = 0; i < m.rows(); ++i) {
    for (size_t j = 0; j < m.cols(); ++j) out(0, j) += m(i, j);
  }
  return out;
}

void RequireShape(const Matrix& m, size_t rows, size_t cols,
                  const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(what + " has shape " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

Activation ParseActivation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) +
                    "' (softmax is not element-wise and is not supported)");
}

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

MlpParams MlpParams::Random(size_t in, size_t hidden, size_t out,
                            Activation activation, Rng& rng) {
  MlpParams p;
  p.w0 = Matrix::Gaussian(hidden, in, 1.0 / std::sqrt(double(in)), rng);
  p.b0 = Matrix::Gaussian(1, hidden, 0.1, rng);
  p.w1 = Matrix::Gaussian(out, hidden, 1.0 / std::sqrt(double(hidden)), rng);
  p.b1 = Matrix::Gaussian(1, out, 0.1, rng);
  p.activation = activation;
  return p;
}

MlpParams MlpParams::ZerosLike() const {
  MlpParams z;
  z.w0 = Matrix(w0.rows(), w0.cols());
  z.b0 = Matrix(b0.rows(), b0.cols());
  z.w1 = Matrix(w1.rows(), w1.cols());
  z.b1 = Matrix(b1.rows(), b1.cols());
  z.activation = activation;
  return z;
}

size_t MlpParams::ParameterCount() const {
  return w0.size() + b0.size() + w1.size() + b1.size();
}

void MlpParams::Validate() const {
  RequireShape(b0, 1, hidden_dim(), "mlp b0");
  RequireShape(w1, w1.rows(), hidden_dim(), "mlp w1");
  RequireShape(b1, 1, out_dim(), "mlp b1");
}

MlpForwardResult MlpForward(const MlpParams& params, const Matrix& x) {
  params.Validate();
  if (x.cols() != params.in_dim()) {
    throw ShapeError("mlp input has " + std::to_string(x.cols()) +
                     " features, expected " + std::to_string(params.in_dim()));
  }
  MlpForwardResult r;
  r.cache.x = x;
  r.cache.z0 = Affine(x, params.w0, params.b0);
  r.cache.a0 = Activate(params.activation, r.cache.z0);
  r.cache.z1 = Affine(r.cache.a0, params.w1, params.b1);
  r.y = Activate(params.activation, r.cache.z1);
  return r;
}

MlpBackwardResult MlpBackward(const MlpParams& params, const MlpCache& cache,
                              const Matrix& upstream) {
  RequireShape(upstream, cache.z1.rows(), cache.z1.cols(), "mlp upstream");
  MlpBackwardResult r;
  r.grads.activation = params.activation;
  const Matrix dz1 = ActivationBackward(params.activation, cache.z1, upstream);
  r.grads.w1 = MatMulTransA(dz1, cache.a0);
  r.grads.b1 = ColumnSums(dz1);
  const Matrix da0 = MatMul(dz1, params.w1);
  const Matrix dz0 = ActivationBackward(params.activation, cache.z0, da0);
  r.grads.w0 = MatMulTransA(dz0, cache.x);
  r.grads.b0 = ColumnSums(dz0);
  r.input_grad = MatMul(dz0, params.w0);
  return r;
}

AttentionParams AttentionParams::Random(size_t model_dim, size_t heads,
                                        size_t key_dim, size_t value_dim,
                                        Rng& rng) {
  AttentionParams p;
  const double s = 1.0 / std::sqrt(double(model_dim));
  for (size_t i = 0; i < heads; ++i) {
    p.wq.push_back(Matrix::Gaussian(model_dim, key_dim, s, rng));
    p.wk.push_back(Matrix::Gaussian(model_dim, key_dim, s, rng));
    p.wv.push_back(Matrix::Gaussian(model_dim, value_dim, s, rng));
  }
  p.wo = Matrix::Gaussian(heads * value_dim, model_dim,
                          1.0 / std::sqrt(double(heads * value_dim)), rng);
  return p;
}

AttentionParams AttentionParams::ZerosLike() const {
  AttentionParams z;
  for (size_t i = 0; i < heads(); ++i) {
    z.wq.emplace_back(wq[i].rows(), wq[i].cols());
    z.wk.emplace_back(wk[i].rows(), wk[i].cols());
    z.wv.emplace_back(wv[i].rows(), wv[i].cols());
  }
  z.wo = Matrix(wo.rows(), wo.cols());
  return z;
}

size_t AttentionParams::ParameterCount() const {
  size_t n = wo.size();
  for (size_t i = 0; i < heads(); ++i) {
    n += wq[i].size() + wk[i].size() + wv[i].size();
  }
  return n;
}

void AttentionParams::Validate() const {
  if (heads() == 0) throw ShapeError("attention needs at least one head");
  if (wk.size() != heads() || wv.size() != heads()) {
    throw ShapeError("attention head lists differ in length");
  }
  const size_t dm = model_dim();
  for (size_t i = 0; i < heads(); ++i) {
    RequireShape(wq[i], dm, key_dim(), "attention wq");
    RequireShape(wk[i], dm, key_dim(), "attention wk");
    RequireShape(wv[i], dm, value_dim(), "attention wv");
  }
  RequireShape(wo, heads() * value_dim(), dm, "attention wo");
}

AttentionForwardResult AttentionForward(const AttentionParams& params,
                                        const Matrix& x) {
  params.Validate();
  if (x.cols() != params.model_dim()) {
    throw ShapeError("attention input width " + std::to_string(x.cols()) +
                     " != model dim " + std::to_string(params.model_dim()));
  }
  const double scale = 1.0 / std::sqrt(double(params.key_dim()));
  const size_t dv = params.value_dim();
  AttentionForwardResult r;
  r.cache.x = x;
  r.cache.concat = Matrix(x.rows(), params.heads() * dv);
  for (size_t i = 0; i < params.heads(); ++i) {
    AttentionHeadCache h;
    h.q = MatMul(x, params.wq[i]);
    h.k = MatMul(x, params.wk[i]);
    h.v = MatMul(x, params.wv[i]);
    Matrix scores = MatMulTransB(h.q, h.k);
    scores *= scale;
    h.attn = SoftmaxRows(scores);
    SetColumns(r.cache.concat, i * dv, MatMul(h.attn, h.v));
    r.cache.heads.push_back(std::move(h));
  }
  r.y = MatMul(r.cache.concat, params.wo);
  return r;
}

AttentionBackwardResult AttentionBackward(const AttentionParams& params,
                                          const AttentionCache& cache,
                                          const Matrix& upstream) {
  RequireShape(upstream, cache.x.rows(), params.model_dim(),
               "attention upstream");
  const double scale = 1.0 / std::sqrt(double(params.key_dim()));
  const size_t dv = params.value_dim();
  AttentionBackwardResult r;
  r.grads.wo = MatMulTransA(cache.concat, upstream);
  const Matrix dconcat = MatMulTransB(upstream, params.wo);
  r.input_grad = Matrix(cache.x.rows(), cache.x.cols());
  for (size_t i = 0; i < params.heads(); ++i) {
    const AttentionHeadCache& h = cache.heads[i];
    const Matrix dh = Columns(dconcat, i * dv, dv);
    const Matrix dattn = MatMulTransB(dh, h.v);
    const Matrix dv_mat = MatMulTransA(h.attn, dh);
    // Softmax Jacobian, row by row: ds = a * (da - <da, a>).
    Matrix dscores(dattn.rows(), dattn.cols());
    for (size_t row = 0; row < dattn.rows(); ++row) {
      double dot = 0.0;
      for (size_t j = 0; j < dattn.cols(); ++j) {
        dot += dattn(row, j) * h.attn(row, j);
      }
      for (size_t j = 0; j < dattn.cols(); ++j) {
        dscores(row, j) = h.attn(row, j) * (dattn(row, j) - dot) * scale;
      }
    }
    const Matrix dq = MatMul(dscores, h.k);
    const Matrix dk = MatMulTransA(dscores, h.q);
    r.grads.wq.push_back(MatMulTransA(cache.x, dq));
    r.grads.wk.push_back(MatMulTransA(cache.x, dk));
    r.grads.wv.push_back(MatMulTransA(cache.x, dv_mat));
    r.input_grad += MatMulTransB(dq, params.wq[i]);
    r.input_grad += MatMulTransB(dk, params.wk[i]);
    r.input_grad += MatMulTransB(dv_mat, params.wv[i]);
  }
  return r;
}

}  // namespace shuffledp
