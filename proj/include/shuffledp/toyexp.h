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

#ifndef SHUFFLEDP_TOYEXP_H_
#define SHUFFLEDP_TOYEXP_H_

#include <span>
#include <vector>

#include "shuffledp/random.h"

namespace shuffledp {

// Square evaluation grid [lo, hi]^2 with points_per_axis samples per axis.
struct GridSpec {
  double lo = -10.0;
  double hi = 10.0;
  int points_per_axis = 201;

  void Validate() const;
  double At(int i) const;
};

// Distinct orderings of `v` (multiset permutations), lexicographic.
std::vector<std::vector<double>> DistinctPermutations(std::span<const double> v);

// Density of N(mean, sigma^2 I) at x.
double GaussianPdf(std::span<const double> mean, double sigma,
                   std::span<const double> x);

// Density of P(y + z): the uniform mixture of N(y', sigma^2 I) over distinct
// permutations y' of y. Throws DomainError above 8 dimensions.
double ShuffledGaussianPdf(std::span<const double> center, double sigma,
                           std::span<const double> at);

// One draw of P(y + z) with P uniform over all permutations.
std::vector<double> SampleShuffledGaussian(std::span<const double> center,
                                           double sigma, Rng& rng);

// Frobenius norm of the difference between the two densities sampled on the
// grid, without cell-area weighting. Centers must be 2-dimensional.
double MixtureDistance(std::span<const double> c1, std::span<const double> c2,
                       double sigma, const GridSpec& grid, bool shuffled);

struct GridDensity {
  double x = 0.0;
  double y = 0.0;
  double plain1 = 0.0;
  double plain2 = 0.0;
  double shuffled1 = 0.0;
  double shuffled2 = 0.0;
};

std::vector<GridDensity> EvaluateGrid(std::span<const double> c1,
                                      std::span<const double> c2, double sigma,
                                      const GridSpec& grid);

}  // namespace shuffledp

#endif  // SHUFFLEDP_TOYEXP_H_
