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

#include "shuffledp/tensor.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "shuffledp/errors.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

std::string Shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void RequireSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.SameShape(b)) {
    throw ShapeError(std::string(op) + ": " + Shape(a) + " vs " + Shape(b));
  }
}

}  // namespace

Matrix::Matrix(size_t rows, size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " != " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

Matrix Matrix::Identity(size_t n) {
  Matrix m(n, n);
  for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Gaussian(size_t rows, size_t cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data_) v = scale * rng.Normal();
  return m;
}

Matrix Matrix::RowVector(std::span<const double> v) {
  return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

Matrix& Matrix::operator+=(const Matrix& o) {
  RequireSameShape(*this, o, "add");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  RequireSameShape(*this, o, "sub");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + Shape(a) + " * " + Shape(b));
  }
  Matrix out(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix MatMulTransB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_t: " + Shape(a) + " * " + Shape(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix MatMulTransA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_ta: " + Shape(a) + "^T * " + Shape(b));
  }
  Matrix out(a.cols(), b.cols());
  for (size_t k = 0; k < a.rows(); ++k) {
    for (size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      for (size_t j = 0; j < b.cols(); ++j) out(i, j) += aki * b(k, j);
    }
  }
  return out;
}

Matrix Transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

Matrix Columns(const Matrix& a, size_t begin, size_t width) {
  if (begin + width > a.cols()) throw ShapeError("column slice out of range");
  Matrix out(a.rows(), width);
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < width; ++j) out(i, j) = a(i, begin + j);
  }
  return out;
}

void SetColumns(Matrix& dst, size_t begin, const Matrix& src) {
  if (dst.rows() != src.rows() || begin + src.cols() > dst.cols()) {
    throw ShapeError("column write out of range");
  }
  for (size_t i = 0; i < src.rows(); ++i) {
    for (size_t j = 0; j < src.cols(); ++j) dst(i, begin + j) = src(i, j);
  }
}

Matrix SoftmaxRows(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    auto in = a.row(i);
    auto o = out.row(i);
    const double m = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - m);
      sum += o[j];
    }
    for (double& v : o) v /= sum;
  }
  return out;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  RequireSameShape(a, b, "diff");
  double m = 0.0;
  auto x = a.flat();
  auto y = b.flat();
  for (size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double SquaredNorm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.flat()) s += v * v;
  return s;
}

}  // namespace shuffledp
