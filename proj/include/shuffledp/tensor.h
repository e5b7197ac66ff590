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

#ifndef SHUFFLEDP_TENSOR_H_
#define SHUFFLEDP_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace shuffledp {

class Rng;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(size_t rows, size_t cols, std::vector<double> data);

  static Matrix Identity(size_t n);
  // Entries i.i.d. N(0, scale^2).
  static Matrix Gaussian(size_t rows, size_t cols, double scale, Rng& rng);
  static Matrix RowVector(std::span<const double> v);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool SameShape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& o) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);

// A * B.
Matrix MatMul(const Matrix& a, const Matrix& b);
// A * B^T.
Matrix MatMulTransB(const Matrix& a, const Matrix& b);
// A^T * B.
Matrix MatMulTransA(const Matrix& a, const Matrix& b);
Matrix Transpose(const Matrix& a);

// Column slice [begin, begin + width).
Matrix Columns(const Matrix& a, size_t begin, size_t width);
void SetColumns(Matrix& dst, size_t begin, const Matrix& src);

// Row-wise softmax with max subtraction.
Matrix SoftmaxRows(const Matrix& a);

double MaxAbsDiff(const Matrix& a, const Matrix& b);
double SquaredNorm(const Matrix& a);

}  // namespace shuffledp

#endif  // SHUFFLEDP_TENSOR_H_
