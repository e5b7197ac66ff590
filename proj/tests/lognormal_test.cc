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

#include "shuffledp/lognormal.h"

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "shuffledp/errors.h"

namespace shuffledp {
namespace {

TEST(StdNormalCdfTest, KnownValues) {
  EXPECT_DOUBLE_EQ(StdNormalCdf(0.0), 0.5);
  EXPECT_NEAR(StdNormalCdf(1.959964), 0.975, 1e-6);
  EXPECT_NEAR(StdNormalCdf(-40.0), 0.0, 1e-300);
  EXPECT_NEAR(StdNormalCdf(8.0), 1.0, 1e-15);
}

TEST(StdNormalCdfTest, MatchesTrapezoidQuadrature) {
  // Integrate the density from 0 to x independently.
  for (double x : {0.3, 1.0, 2.5}) {
    const int n = 20000;
    const double h = x / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double t = i * h;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      s += w * std::exp(-0.5 * t * t);
    }
    const double expected = 0.5 + s * h / std::sqrt(2.0 * M_PI);
    EXPECT_NEAR(StdNormalCdf(x), expected, 1e-8) << x;
  }
}

TEST(LogSpaceHelpersTest, Softplus) {
  EXPECT_NEAR(Softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(Softplus(50.0), 50.0, 1e-15);
  EXPECT_NEAR(Softplus(-50.0) / std::exp(-50.0), 1.0, 1e-12);
  EXPECT_NEAR(Softplus(1.3), std::log1p(std::exp(1.3)), 1e-14);
}

TEST(LogSpaceHelpersTest, LogExpm1) {
  EXPECT_NEAR(LogExpm1(1.0), std::log(std::exp(1.0) - 1.0), 1e-14);
  EXPECT_NEAR(LogExpm1(1e-10), std::log(1e-10), 1e-9);
  EXPECT_NEAR(LogExpm1(800.0), 800.0, 1e-12);
}

TEST(LogSpaceHelpersTest, LogSumExp) {
  const std::vector<double> a = {0.0, 0.0};
  EXPECT_NEAR(LogSumExp(a), std::log(2.0), 1e-15);
  const std::vector<double> b = {1000.0, 1000.0};
  EXPECT_NEAR(LogSumExp(b), 1000.0 + std::log(2.0), 1e-12);
}

TEST(FentonWilkinsonTest, SingleTermIsExact) {
  const std::vector<double> mus = {0.7};
  const LognormalSumApprox a = FentonWilkinson(mus, 0.3);
  EXPECT_NEAR(a.mu_y, 0.7, 1e-12);
  EXPECT_NEAR(a.sigma2_y, 0.3, 1e-12);
}

TEST(FentonWilkinsonTest, TwoZeroMeansMatchesMomentAlgebra) {
  const double s = 0.8;
  const std::vector<double> mus = {0.0, 0.0};
  const LognormalSumApprox a = FentonWilkinson(mus, s);
  // Moments of the sum of two i.i.d. lognormals.
  const double mean = 2.0 * std::exp(s / 2.0);
  const double var = 2.0 * (std::exp(s) - 1.0) * std::exp(s);
  const double s2 = std::log(1.0 + var / (mean * mean));
  EXPECT_NEAR(a.sigma2_y, s2, 1e-12);
  EXPECT_NEAR(a.mu_y, std::log(mean) - s2 / 2.0, 1e-12);
  EXPECT_NEAR(a.sigma2_y, std::log((std::exp(s) - 1.0) / 2.0 + 1.0), 1e-12);
}

TEST(FentonWilkinsonTest, ShiftEquivariance) {
  const std::vector<double> mus = {0.3, -1.2, 2.0, 0.0};
  std::vector<double> shifted = mus;
  for (double& m : shifted) m += 5.5;
  const LognormalSumApprox a = FentonWilkinson(mus, 0.4);
  const LognormalSumApprox b = FentonWilkinson(shifted, 0.4);
  EXPECT_NEAR(b.mu_y - a.mu_y, 5.5, 1e-12);
  EXPECT_NEAR(b.sigma2_y, a.sigma2_y, 1e-14);
}

TEST(FentonWilkinsonTest, PermutationSymmetry) {
  const std::vector<double> a = {0.3, -1.2, 2.0};
  const std::vector<double> b = {2.0, 0.3, -1.2};
  EXPECT_NEAR(FentonWilkinson(a, 0.7).mu_y, FentonWilkinson(b, 0.7).mu_y, 1e-14);
  EXPECT_NEAR(FentonWilkinson(a, 0.7).sigma2_y, FentonWilkinson(b, 0.7).sigma2_y,
              1e-14);
}

TEST(FentonWilkinsonTest, VarianceMonotoneAndShrinksWithEqualMeans) {
  const std::vector<double> mus(50, 0.2);
  double prev = 0.0;
  for (double s2 = 0.01; s2 < 5.0; s2 *= 1.5) {
    const double v = FentonWilkinson(mus, s2).sigma2_y;
    EXPECT_GT(v, prev);
    EXPECT_LE(v, s2);
    prev = v;
  }
}

TEST(FentonWilkinsonTest, HandlesLargeExponents) {
  const std::vector<double> mus = {800.0, 800.0};
  const LognormalSumApprox a = FentonWilkinson(mus, 0.1);
  EXPECT_TRUE(std::isfinite(a.mu_y));
  EXPECT_TRUE(std::isfinite(a.sigma2_y));
}

TEST(FentonWilkinsonTest, RejectsBadInput) {
  const std::vector<double> empty;
  EXPECT_THROW(FentonWilkinson(empty, 1.0), DomainError);
  const std::vector<double> mus = {0.0};
  EXPECT_THROW(FentonWilkinson(mus, -1.0), DomainError);
}

TEST(FentonWilkinsonTest, CdfIsZeroBelowSupport) {
  const LognormalSumApprox a{0.0, 1.0};
  EXPECT_EQ(a.Cdf(0.0), 0.0);
  EXPECT_EQ(a.Cdf(-1.0), 0.0);
  EXPECT_NEAR(a.Cdf(1.0), 0.5, 1e-15);
}

TEST(MonteCarloTest, DegenerateVariance) {
  const std::vector<double> mus = {0.0};
  const auto s = MonteCarloSumSamples(mus, 1e-12, 1000, 3);
  ASSERT_EQ(s.size(), 1000u);
  for (double v : s) EXPECT_NEAR(v, 1.0, 1e-4);
}

TEST(MonteCarloTest, MeanMatchesAnalyticLognormalMean) {
  const std::vector<double> mus = {0.0, 0.0};
  const auto s = MonteCarloSumSamples(mus, 0.25, 100000, 11);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  EXPECT_NEAR(mean / (2.0 * std::exp(0.125)), 1.0, 0.02);
}

TEST(MonteCarloTest, DeterministicAndThreadIndependent) {
  const std::vector<double> mus = {0.1, -0.2, 0.3};
  const auto a = MonteCarloSumSamples(mus, 0.5, 5000, 7, 1);
  const auto b = MonteCarloSumSamples(mus, 0.5, 5000, 7, 1);
  const auto c = MonteCarloSumSamples(mus, 0.5, 5000, 7, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}

TEST(MonteCarloTest, RejectsTooFewDraws) {
  const std::vector<double> mus = {0.0};
  EXPECT_THROW(MonteCarloSumSamples(mus, 1.0, 999, 1), DomainError);
}

TEST(KolmogorovSmirnovTest, ExactLognormalIsClose) {
  const std::vector<double> mus = {0.3};
  const auto s = MonteCarloSumSamples(mus, 0.5, 100000, 5);
  const LognormalSumApprox exact{0.3, 0.5};
  EXPECT_LT(KolmogorovSmirnov(s, exact), 0.01);
  const LognormalSumApprox wrong{1.3, 0.5};
  EXPECT_GT(KolmogorovSmirnov(s, wrong), 0.3);
}

TEST(KolmogorovSmirnovTest, FentonWilkinsonForManyTerms) {
  const std::vector<double> mus(1000, 0.0);
  const auto s = MonteCarloSumSamples(mus, 0.0625, 20000, 9);
  EXPECT_LT(KolmogorovSmirnov(s, FentonWilkinson(mus, 0.0625)), 0.02);
}

TEST(KolmogorovSmirnovTest, AccuracyImprovesAtLowVariance) {
  const std::vector<double> mus(200, 0.0);
  double prev = INFINITY;
  for (double s2 : {4.0, 1.0, 0.0625}) {
    const auto s = MonteCarloSumSamples(mus, s2, 20000, 21);
    const double ks = KolmogorovSmirnov(s, FentonWilkinson(mus, s2));
    EXPECT_LT(ks, prev) << s2;
    prev = ks;
  }
}

}  // namespace
}  // namespace shuffledp
