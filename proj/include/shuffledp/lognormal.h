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

#ifndef SHUFFLEDP_LOGNORMAL_H_
#define SHUFFLEDP_LOGNORMAL_H_

#include <cstdint>
#include <span>
#include <vector>

namespace shuffledp {

// Log-scale parameters of a lognormal variable e^Y, Y ~ N(mu, sigma2).
struct NormalParams {
  double mu = 0.0;
  double sigma2 = 1.0;
};

// Single-lognormal approximation e^Y, Y ~ N(mu_y, sigma2_y), of a sum of
// lognormals.
struct LognormalSumApprox {
  double mu_y = 0.0;
  double sigma2_y = 1.0;

  // P(e^Y <= x).
  double Cdf(double x) const;
};

// Fenton-Wilkinson moment matching for sum_i e^{Y_i}, Y_i ~ N(mus[i], sigma2)
// independent. All exponential sums are evaluated with log-sum-exp, so the
// result stays finite for very long or very large `mus`.
//
// Throws DomainError on an empty `mus`, non-finite input or sigma2 <= 0.
LognormalSumApprox FentonWilkinson(std::span<const double> mus, double sigma2);

// Monte-Carlo ground truth: `n_draws` samples of sum_i e^{Y_i}, sorted
// ascending. Draws are split into fixed-size chunks, each seeded from
// (seed, chunk index), so the output is identical for any thread count.
// Requires n_draws >= 1000.
std::vector<double> MonteCarloSumSamples(std::span<const double> mus,
                                         double sigma2, int64_t n_draws,
                                         uint64_t seed, int threads = 0);

// Standard normal CDF via erfc; accurate in both tails.
double StdNormalCdf(double x);

// log(1 + e^x) without overflow.
double Softplus(double x);

// log(e^x - 1) for x > 0 without overflow.
double LogExpm1(double x);

// log(sum_i e^{xs[i]}).
double LogSumExp(std::span<const double> xs);

// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
// `sorted` and `approx`.
double KolmogorovSmirnov(std::span<const double> sorted,
                         const LognormalSumApprox& approx);

}  // namespace shuffledp

#endif  // SHUFFLEDP_LOGNORMAL_H_
