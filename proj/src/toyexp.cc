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

#include "shuffledp/toyexp.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shuffledp/errors.h"
#include "shuffledp/permute.h"

namespace shuffledp {
namespace {

constexpr size_t kMaxEnumerationDim = 8;

void Check2d(std::span<const double> c1, std::span<const double> c2,
             double sigma) {
  if (c1.size() != 2 || c2.size() != 2) {
    throw ShapeError("mixture distance needs 2-dimensional centers");
  }
  if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
}

}  // namespace

void GridSpec::Validate() const {
  if (!(lo < hi)) throw DomainError("grid needs lo < hi");
  if (points_per_axis < 3) throw DomainError("grid needs >= 3 points per axis");
}

double GridSpec::At(int i) const {
  return lo + (hi - lo) * static_cast<double>(i) /
                  static_cast<double>(points_per_axis - 1);
}

std::vector<std::vector<double>> DistinctPermutations(
    std::span<const double> v) {
  std::vector<double> cur(v.begin(), v.end());
  std::sort(cur.begin(), cur.end());
  std::vector<std::vector<double>> out;
  do {
    out.push_back(cur);
  } while (std::next_permutation(cur.begin(), cur.end()));
  return out;
}

double GaussianPdf(std::span<const double> mean, double sigma,
                   std::span<const double> x) {
  if (mean.size() != x.size()) throw ShapeError("pdf dimension mismatch");
  if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
  double sq = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - mean[i];
    sq += r * r;
  }
  const double dim = static_cast<double>(x.size());
  const double log_norm =
      -0.5 * dim * std::log(2.0 * std::numbers::pi * sigma * sigma);
  return std::exp(log_norm - 0.5 * sq / (sigma * sigma));
}

double ShuffledGaussianPdf(std::span<const double> center, double sigma,
                           std::span<const double> at) {
  if (center.size() > kMaxEnumerationDim) {
    throw DomainError("shuffled pdf enumerates permutations; dimension > 8");
  }
  const auto perms = DistinctPermutations(center);
  double sum = 0.0;
  for (const auto& y : perms) sum += GaussianPdf(y, sigma, at);
  return sum / static_cast<double>(perms.size());
}

std::vector<double> SampleShuffledGaussian(std::span<const double> center,
                                           double sigma, Rng& rng) {
  std::vector<double> noisy(center.begin(), center.end());
  for (double& v : noisy) v += sigma * rng.Normal();
  const Permutation p = Permutation::Sample(noisy.size(), rng);
  return Apply<double>(p, noisy);
}

double MixtureDistance(std::span<const double> c1, std::span<const double> c2,
                       double sigma, const GridSpec& grid, bool shuffled) {
  Check2d(c1, c2, sigma);
  grid.Validate();
  double sq = 0.0;
  for (int i = 0; i < grid.points_per_axis; ++i) {
    for (int j = 0; j < grid.points_per_axis; ++j) {
      const double at[2] = {grid.At(i), grid.At(j)};
      const double a = shuffled ? ShuffledGaussianPdf(c1, sigma, at)
                                : GaussianPdf(c1, sigma, at);
      const double b = shuffled ? ShuffledGaussianPdf(c2, sigma, at)
                                : GaussianPdf(c2, sigma, at);
      sq += (a - b) * (a - b);
    }
  }
  return std::sqrt(sq);
}

std::vector<GridDensity> EvaluateGrid(std::span<const double> c1,
                                      std::span<const double> c2, double sigma,
                                      const GridSpec& grid) {
  Check2d(c1, c2, sigma);
  grid.Validate();
  std::vector<GridDensity> out;
  out.reserve(static_cast<size_t>(grid.points_per_axis) * grid.points_per_axis);
  for (int i = 0; i < grid.points_per_axis; ++i) {
    for (int j = 0; j < grid.points_per_axis; ++j) {
      GridDensity g;
      g.x = grid.At(i);
      g.y = grid.At(j);
      const double at[2] = {g.x, g.y};
      g.plain1 = GaussianPdf(c1, sigma, at);
      g.plain2 = GaussianPdf(c2, sigma, at);
      g.shuffled1 = ShuffledGaussianPdf(c1, sigma, at);
      g.shuffled2 = ShuffledGaussianPdf(c2, sigma, at);
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace shuffledp
