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

#include "shuffledp/audit.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "shuffledp/errors.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

// Scores where exactly `fp` of 100 absent and `fn` of 100 present trials are
// misclassified by threshold 0.5.
void MakeScores(int fp, int fn, std::vector<double>& present,
                std::vector<double>& absent) {
  present.assign(100, 1.0);
  absent.assign(100, 0.0);
  for (int i = 0; i < fp; ++i) absent[i] = 1.0;
  for (int i = 0; i < fn; ++i) present[i] = 0.0;
}

TEST(EmpiricalEpsilonTest, UninformativeTest) {
  std::vector<double> p, a;
  MakeScores(50, 50, p, a);
  const AuditOutcome o = EmpiricalEpsilon(p, a, 0.0, 0.5);
  EXPECT_DOUBLE_EQ(o.alpha, 0.5);
  EXPECT_DOUBLE_EQ(o.beta, 0.5);
  EXPECT_DOUBLE_EQ(o.eps_empirical, 0.0);
}

TEST(EmpiricalEpsilonTest, FivePercentErrors) {
  std::vector<double> p, a;
  MakeScores(5, 5, p, a);
  const AuditOutcome o = EmpiricalEpsilon(p, a, 0.0, 0.5);
  EXPECT_NEAR(o.eps_empirical, std::log(0.95 / 0.05), 1e-12);
  EXPECT_NEAR(o.eps_empirical, 2.944, 1e-3);
}

TEST(EmpiricalEpsilonTest, SmallErrorRatesAreExcluded) {
  std::vector<double> p, a;
  MakeScores(0, 5, p, a);
  const AuditOutcome o = EmpiricalEpsilon(p, a, 0.0, 0.5);
  EXPECT_TRUE(o.excluded);
  EXPECT_EQ(o.eps_empirical, 0.0);
  const AuditOutcome c = EmpiricalEpsilon(p, a, 0.0, 0.5, 0.0);
  EXPECT_TRUE(c.clamped);
  EXPECT_NEAR(c.eps_empirical, std::log((1 - 0.05) / 0.01), 1e-12);
}

TEST(EmpiricalEpsilonTest, RejectsBadInput) {
  std::vector<double> p = {1.0}, empty;
  EXPECT_THROW(EmpiricalEpsilon(p, empty, 0.0, 0.5), DomainError);
  EXPECT_THROW(EmpiricalEpsilon(p, p, 1.0, 0.5), DomainError);
}

TEST(SweepEpsilonTest, FindsBestThreshold) {
  std::vector<double> p, a;
  MakeScores(5, 5, p, a);
  const AuditOutcome o = SweepEpsilon(p, a, 0.0);
  EXPECT_NEAR(o.eps_empirical, std::log(0.95 / 0.05), 1e-12);
  EXPECT_NEAR(o.threshold, 1.0, 0.0);
}

TEST(SweepEpsilonTest, NeverNegativeAndRocMonotone) {
  Rng rng(1);
  std::vector<double> a(2000), p(2000), better(2000);
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.Normal();
    const double z = rng.Normal();
    p[i] = 1.0 + z;
    better[i] = 2.0 + z;
  }
  const double e1 = SweepEpsilon(p, a, 1e-5).eps_empirical;
  const double e2 = SweepEpsilon(better, a, 1e-5).eps_empirical;
  EXPECT_GE(e1, 0.0);
  EXPECT_GE(e2, e1);
}

TEST(DiracCanaryTest, PerfectSeparationWithoutNoise) {
  MechanismSpec s;
  s.sigma = 0.0;
  s.d = 10;
  const AuditScores sc = DiracCanaryTrials(s, false, 1000, 2);
  const AuditOutcome o = SweepEpsilon(sc.present, sc.absent, 1e-5);
  EXPECT_TRUE(o.clamped);
  EXPECT_NEAR(o.eps_empirical, std::log((1 - 1e-3 - 1e-5) / 1e-3), 1e-9);
}

TEST(DiracCanaryTest, HugeNoiseIsIndistinguishable) {
  MechanismSpec s;
  s.sigma = 1e6;
  s.d = 20;
  const AuditScores sc = DiracCanaryTrials(s, true, 4000, 3);
  // Two-sample Kolmogorov-Smirnov statistic against its 5% critical value.
  std::vector<double> p = sc.present, a = sc.absent;
  std::sort(p.begin(), p.end());
  std::sort(a.begin(), a.end());
  size_t i = 0, j = 0;
  double ks = 0.0;
  while (i < p.size() && j < a.size()) {
    if (p[i] <= a[j]) ++i; else ++j;
    ks = std::max(ks, std::abs(double(i) / p.size() - double(j) / a.size()));
  }
  EXPECT_LT(ks, 1.36 * std::sqrt(2.0 / 4000));
}

TEST(DiracCanaryTest, DeterministicAcrossThreads) {
  MechanismSpec s;
  s.sigma = 0.5;
  s.d = 50;
  const AuditScores a = DiracCanaryTrials(s, true, 1000, 4, 1);
  const AuditScores b = DiracCanaryTrials(s, true, 1000, 4, 3);
  EXPECT_EQ(a.present, b.present);
  EXPECT_EQ(a.absent, b.absent);
}

TEST(DiracCanaryTest, ShufflingDoesNotIncreaseEmpiricalEpsilon) {
  MechanismSpec s;
  s.sigma = 0.5;
  s.d = 1000;
  const AuditScores sh = DiracCanaryTrials(s, true, 5000, 5);
  const AuditScores pl = DiracCanaryTrials(s, false, 5000, 5);
  EXPECT_LE(SweepEpsilon(sh.present, sh.absent, 1e-5).eps_empirical,
            SweepEpsilon(pl.present, pl.absent, 1e-5).eps_empirical);
}

TEST(CertifiedEpsilonTest, InvertsDelta) {
  MechanismSpec s;
  s.sigma = 2.0;
  s.d = 100;
  for (bool shuffled : {true, false}) {
    const double eps = CertifiedEpsilon(s, 1e-5, shuffled);
    const double at = shuffled ? ShuffledDelta(s, eps) : GaussianDelta(2.0, 1.0, eps);
    EXPECT_LE(at, 1e-5);
    if (eps > 0) {
      const double below = shuffled ? ShuffledDelta(s, eps * (1 - 1e-6))
                                    : GaussianDelta(2.0, 1.0, eps * (1 - 1e-6));
      EXPECT_GT(below, 1e-5);
    }
  }
}

TEST(CalibrateSigmaTest, MeetsDelta) {
  MechanismSpec s;
  s.d = 1000;
  const double sigma = CalibrateSigma(s, 1.0, 1e-5, false);
  EXPECT_LE(GaussianDelta(sigma, 1.0, 1.0), 1e-5);
  EXPECT_GT(GaussianDelta(sigma * (1 - 1e-6), 1.0, 1.0), 1e-5);
  s.sigma = CalibrateSigma(s, 1.0, 1e-5, true);
  EXPECT_LE(ShuffledDelta(s, 1.0), 1e-5);
}

TEST(ExactMaxTestTest, AgreesWithSimulation) {
  MechanismSpec s;
  s.sigma = 0.6;
  s.d = 200;
  const AuditOutcome exact = ExactMaxTestEpsilon(s, 1e-5);
  ASSERT_FALSE(exact.excluded);
  // Simulated error rates at the exact test's threshold.
  const AuditScores sc = DiracCanaryTrials(s, true, 40000, 6);
  const AuditOutcome sim =
      EmpiricalEpsilon(sc.present, sc.absent, 1e-5, exact.threshold, 0.0);
  EXPECT_NEAR(sim.alpha, exact.alpha, 4 * std::sqrt(exact.alpha / 40000) + 1e-4);
  EXPECT_NEAR(sim.beta, exact.beta, 4 * std::sqrt(exact.beta / 40000) + 1e-4);
}

TEST(ExactMaxTestTest, SingleCoordinateMatchesGaussianTest) {
  // d = 1: alpha = Q(t/sigma), beta = Phi((t-c)/sigma).
  MechanismSpec s;
  s.sigma = 1.0;
  s.d = 1;
  const AuditOutcome o = ExactMaxTestEpsilon(s, 0.0, 0.0, 2001);
  const double t = o.threshold;
  EXPECT_NEAR(o.alpha, 0.5 * std::erfc(t / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(o.beta, 0.5 * std::erfc(-(t - 1) / std::sqrt(2.0)), 1e-12);
}

TEST(UnshuffledAuditTest, LowerBoundHolds) {
  // The plain Gaussian mechanism's delta curve is tight, so the audit of it
  // must stay below the certified epsilon.
  AuditRequest r;
  r.spec.d = 1;
  r.spec.sigma = 1.0;
  r.trials = 20000;
  r.shuffled = false;
  r.bootstrap_reps = 50;
  const AuditReport rep = RunAudit(r);
  EXPECT_GT(rep.outcome.eps_empirical, 0.0);
  EXPECT_LE(rep.ci.lo, rep.eps_theoretical);
}

}  // namespace
}  // namespace shuffledp
