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

#include "shuffledp/accountant.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "shuffledp/errors.h"
#include "shuffledp/lognormal.h"

namespace shuffledp {
namespace {

MechanismSpec Spec(double sigma, double c, double c_prime, int64_t d) {
  MechanismSpec s;
  s.sigma = sigma;
  s.c = c;
  s.c_prime = c_prime;
  s.d = d;
  return s;
}

// Direct, non-log-space evaluation for moderate arguments.
ShuffleBound NaiveBound(double sigma, double c, double cp, double d) {
  const double v = sigma * sigma;
  const double x1 = d * c * cp / ((d - 1) * v);
  const double x2 = d * c * (c + cp) / ((d - 1) * v);
  auto var = [&](double x) {
    const double num = 1 + (d - 1) * std::exp(-2 * x);
    const double den = std::pow(1 + (d - 1) * std::exp(-x), 2);
    return std::log(num / den * (std::exp(c * c / v) - 1) + 1);
  };
  ShuffleBound b;
  b.zeta1 = -std::log(1 + (d - 1) * std::exp(-x1));
  b.zeta2 = -std::log(1 + (d - 1) * std::exp(-x2)) - c * c / v;
  b.sigma_z1_sq = var(x1);
  b.sigma_z2_sq = var(x2);
  return b;
}

TEST(ShuffleBoundTest, LargeSigmaLimit) {
  const ShuffleBound b = ComputeShuffleBound(Spec(1e6, 1, 1, 10));
  EXPECT_NEAR(b.zeta1, -std::log(10.0), 1e-6);
}

TEST(ShuffleBoundTest, TwoDimensionalHandCase) {
  const ShuffleBound b = ComputeShuffleBound(Spec(1, 1, 1, 2));
  EXPECT_NEAR(b.zeta1, -std::log(1 + std::exp(-2.0)), 1e-14);
}

TEST(ShuffleBoundTest, MatchesDirectFormula) {
  for (double sigma : {0.7, 1.0, 2.5}) {
    for (double d : {2.0, 10.0, 300.0}) {
      const ShuffleBound a = ComputeShuffleBound(
          Spec(sigma, 1.0, 1.5, static_cast<int64_t>(d)));
      const ShuffleBound b = NaiveBound(sigma, 1.0, 1.5, d);
      EXPECT_NEAR(a.zeta1, b.zeta1, 1e-12);
      EXPECT_NEAR(a.zeta2, b.zeta2, 1e-12);
      EXPECT_NEAR(a.sigma_z1_sq, b.sigma_z1_sq, 1e-12);
      EXPECT_NEAR(a.sigma_z2_sq, b.sigma_z2_sq, 1e-12);
    }
  }
}

TEST(ShuffleBoundTest, HighDimensionStaysFinite) {
  const ShuffleBound b = ComputeShuffleBound(Spec(0.05, 0.1, 0.1, 1000000));
  EXPECT_TRUE(std::isfinite(b.zeta1));
  EXPECT_TRUE(std::isfinite(b.sigma_z1_sq));
  EXPECT_LT(b.sigma_z1_sq, 4.0);
  EXPECT_LE(b.zeta2, b.zeta1);
}

TEST(ShuffleBoundTest, RejectsDegenerateInput) {
  EXPECT_THROW(ComputeShuffleBound(Spec(1, 1, 1, 1)), DomainError);
  EXPECT_THROW(ComputeShuffleBound(Spec(0, 1, 1, 10)), DomainError);
  EXPECT_THROW(ComputeShuffleBound(Spec(1, -1, 1, 10)), DomainError);
}

TEST(ShuffledDeltaTest, LargeEpsilonVanishes) {
  EXPECT_NEAR(ShuffledDelta(Spec(1, 1, 1, 100), 50.0), 0.0, 1e-300);
}

TEST(ShuffledDeltaTest, DominatedByGaussianOnSweep) {
  const MechanismSpec s = Spec(0.05, 0.1, 0.1, 1000000);
  for (double eps : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0}) {
    EXPECT_LE(ShuffledDelta(s, eps), GaussianDelta(s.sigma, s.c, eps) + 1e-12)
        << eps;
  }
}

TEST(ShuffledDeltaTest, DecreasingInSigma) {
  for (double eps : {0.1, 1.0}) {
    EXPECT_GE(ShuffledDelta(Spec(0.5, 1, 1, 50), eps),
              ShuffledDelta(Spec(1.0, 1, 1, 50), eps));
  }
}

TEST(ShuffledDeltaTest, MatchesDirectEvaluation) {
  const ShuffleBound b = NaiveBound(1.2, 1.0, 1.0, 20.0);
  const double eps = 0.3;
  const double s1 = std::sqrt(b.sigma_z1_sq);
  const double s2 = std::sqrt(b.sigma_z2_sq);
  const double expected =
      StdNormalCdf(s1 / 2 + (b.zeta1 - eps) / s1) -
      std::exp(eps) * StdNormalCdf(s2 / 2 + (b.zeta2 - eps) / s2);
  EXPECT_NEAR(ShuffledDelta(Spec(1.2, 1, 1, 20), eps), std::max(0.0, expected),
              1e-14);
}

TEST(GaussianDeltaTest, ZeroEpsilon) {
  EXPECT_NEAR(GaussianDelta(1, 1, 0), 0.382924922548026, 1e-12);
}

TEST(GaussianDeltaTest, StrictlyDecreasingInSigma) {
  double prev = 1.0;
  for (double sigma = 0.2; sigma < 20; sigma *= 1.3) {
    const double d = GaussianDelta(sigma, 1, 0.5);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(GaussianDelta(1e6, 1, 0.5), 1e-6);
}

TEST(GaussianDeltaTest, NoOverflowAtLargeEpsilon) {
  const double d = GaussianDelta(0.1, 1, 800.0);
  EXPECT_TRUE(std::isfinite(d));
  EXPECT_GE(d, 0.0);
}

TEST(AmplificationTest, Examples) {
  const Budget same = AmplifyBySubsampling({0.7, 1e-5}, 1.0);
  EXPECT_DOUBLE_EQ(same.epsilon, 0.7);
  EXPECT_DOUBLE_EQ(same.delta, 1e-5);
  EXPECT_NEAR(AmplifyBySubsampling({1.0, 1e-5}, 0.01).epsilon,
              std::log(1 + 0.01 * (std::exp(1.0) - 1)), 1e-15);
  EXPECT_NEAR(AmplifyBySubsampling({1.0, 1e-5}, 0.01).epsilon, 0.017033, 1e-5);
  EXPECT_NEAR(AmplifyBySubsampling({1.0, 1e-5}, 0.1).delta, 1e-6, 1e-20);
}

TEST(AmplificationTest, Inverse) {
  EXPECT_NEAR(InvertAmplification(0.5, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(InvertAmplification(AmplifyBySubsampling({0.5, 1e-5}, 0.2).epsilon,
                                  0.2),
              0.5, 1e-12);
  EXPECT_NEAR(InvertAmplification(0.017033, 0.01), 1.0, 1e-3);
}

TEST(ComposeAdvancedTest, Examples) {
  EXPECT_NEAR(ComposeAdvanced({0.01, 0.0}, 1, 1e-6).epsilon, 0.01, 1e-15);
  const double expected =
      0.5 + std::sqrt(2 * std::log(1e6) * 1e4 * 1e-4);
  const Budget b = ComposeAdvanced({0.01, 1e-9}, 10000, 1e-6);
  EXPECT_NEAR(b.epsilon, expected, 1e-12);
  EXPECT_NEAR(b.epsilon, 5.757, 1e-3);
  EXPECT_NEAR(b.delta, 1e4 * 1e-9 + 1e-6, 1e-18);
}

TEST(ComposeAdvancedTest, MonotoneInK) {
  double prev = 0.0;
  for (int64_t k = 1; k < 2000; k += 37) {
    const double e = ComposeAdvanced({0.05, 0.0}, k, 1e-6).epsilon;
    EXPECT_GE(e, prev);
    prev = e;
  }
}

SigmaRequest Request(double eps, bool shuffled) {
  SigmaRequest r;
  r.total = {eps, 1e-5};
  r.d = 10000;
  r.p = 0.01;
  r.steps = 1000;
  r.shuffled = shuffled;
  return r;
}

TEST(SolveSigmaTest, PipelineIsConsistent) {
  const SigmaRequest r = Request(1.0, true);
  const SigmaSolution s = SolveSigma(r);
  // Composition of the per-step budget reproduces the total.
  const Budget total = ComposeAdvanced(s.per_step, r.steps, 0.5 * 1e-5);
  EXPECT_NEAR(total.epsilon, 1.0, 1e-6);
  EXPECT_NEAR(total.delta, 1e-5, 1e-15);
  // The per-invocation budget amplifies to the per-step one.
  const Budget amp = AmplifyBySubsampling(s.per_invocation, r.p);
  EXPECT_NEAR(amp.epsilon, s.per_step.epsilon, 1e-12);
  EXPECT_NEAR(amp.delta, s.per_step.delta, 1e-18);
  // Minimality.
  MechanismSpec m = Spec(s.sigma, 1, 1, r.d);
  EXPECT_LE(ShuffledDelta(m, s.per_invocation.epsilon), s.per_invocation.delta);
  m.sigma = s.sigma * (1 - 1e-5);
  EXPECT_GT(ShuffledDelta(m, s.per_invocation.epsilon), s.per_invocation.delta);
}

TEST(SolveSigmaTest, UnshuffledIsMinimal) {
  const SigmaSolution s = SolveSigma(Request(1.0, false));
  const Budget& inv = s.per_invocation;
  EXPECT_LE(GaussianDelta(s.sigma, 1, inv.epsilon), inv.delta);
  EXPECT_GT(GaussianDelta(s.sigma * (1 - 1e-5), 1, inv.epsilon), inv.delta);
}

TEST(SolveSigmaTest, ShuffledBelowUnshuffled) {
  for (double eps : {0.25, 1.0, 4.0}) {
    EXPECT_LT(SolveSigma(Request(eps, true)).sigma,
              SolveSigma(Request(eps, false)).sigma);
  }
}

TEST(SolveSigmaTest, DecreasingInDimension) {
  double prev = INFINITY;
  for (int64_t d : {100, 10000, 1000000, 100000000}) {
    SigmaRequest r = Request(1.0, true);
    r.d = d;
    const double s = SolveSigma(r).sigma;
    EXPECT_LT(s, prev) << d;
    prev = s;
  }
}

TEST(SolveSigmaTest, InfeasibleBudget) {
  SolveOptions o;
  o.sigma_ceiling = 2.0;
  EXPECT_THROW(SolveSigma(Request(1e-4, false), o), InfeasibleBudgetError);
}

TEST(SolveSigmaTest, RejectsBadRequest) {
  SigmaRequest r = Request(1.0, true);
  r.total.delta = 0.0;
  EXPECT_THROW(SolveSigma(r), DomainError);
  r = Request(1.0, true);
  r.p = 0.0;
  EXPECT_THROW(SolveSigma(r), DomainError);
  r = Request(1.0, true);
  r.d = 1;
  EXPECT_THROW(SolveSigma(r), DomainError);
}

TEST(SolveSigmaTest, WarnsAtHighLognormalVariance) {
  SigmaRequest r = Request(1.0, true);
  r.d = 10000;
  const SigmaSolution s = SolveSigma(r);
  EXPECT_EQ(s.high_variance_warning, 1.0 / (s.sigma * s.sigma) > 4.0);
}

TEST(FallbackTest, StrictInequality) {
  EXPECT_TRUE(TakeShufflePath(0.5, 1.0));
  EXPECT_FALSE(TakeShufflePath(1.0, 1.0));
  EXPECT_FALSE(TakeShufflePath(2.0, 1.0));
}

TEST(PropertyTest, ZetaOrderingAndDominance) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    MechanismSpec s;
    s.sigma = std::exp(std::log(0.05) + u(gen) * std::log(200.0));
    s.c = 0.1 + u(gen) * 2;
    s.c_prime = 0.1 + u(gen) * 2;
    s.d = 2 + static_cast<int64_t>(std::exp(u(gen) * std::log(1e8)));
    const double eps = u(gen) * 5;
    const ShuffleBound b = ComputeShuffleBound(s);
    EXPECT_LE(b.zeta2, b.zeta1);
    EXPECT_LE(b.zeta1, 0.0);
    // Variance bracket for the lognormal approximation.
    const double snr = s.c * s.c / (s.sigma * s.sigma);
    const double a = snr + std::log1p(-std::exp(-snr)) - std::log(double(s.d));
    const double floor = a > 30 ? a + std::log1p(std::exp(-a))
                                : std::log1p(std::exp(a));
    for (double v : {b.sigma_z1_sq, b.sigma_z2_sq}) {
      EXPECT_GE(v, floor * (1 - 1e-9));
      EXPECT_LE(v, snr * (1 + 1e-9));
    }
    EXPECT_LE(ShuffledDelta(s, eps), GaussianDelta(s.sigma, s.c, eps) + 1e-12);
  }
}

}  // namespace
}  // namespace shuffledp
