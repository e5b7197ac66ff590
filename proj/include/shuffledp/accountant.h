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

#ifndef SHUFFLEDP_ACCOUNTANT_H_
#define SHUFFLEDP_ACCOUNTANT_H_

#include <cstdint>

namespace shuffledp {

// An (epsilon, delta) privacy budget.
struct Budget {
  double epsilon = 0.0;
  double delta = 0.0;

  // Throws DomainError unless epsilon >= 0 and 0 < delta < 1.
  void Validate() const;
};

// One shuffled-Gaussian invocation and the training run around it.
//
// `sigma` is the noise standard deviation in the same units as the clip
// norms: the release is P(f + z) with z ~ N(0, sigma^2 I), |f(x) - f(x')| <= c
// and |f(x)| <= c_prime. A trainer adding N(0, m^2 c^2 I) noise corresponds
// to sigma = m * c.
struct MechanismSpec {
  double sigma = 1.0;
  double c = 1.0;
  double c_prime = 1.0;
  int64_t d = 2;     // number of shuffled coordinates
  double p = 1.0;    // sampling rate |B| / N
  int64_t steps = 1;
};

// Worst-case quantities entering the shuffled-Gaussian delta condition,
// evaluated at f and g aligned along [(d-1), -1, ..., -1].
struct ShuffleBound {
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double sigma_z1_sq = 0.0;
  double sigma_z2_sq = 0.0;
};

// Throws DomainError for d < 2 or non-positive sigma / c / c_prime.
ShuffleBound ComputeShuffleBound(const MechanismSpec& spec);

// Smallest delta certified for one shuffled-Gaussian invocation at
// `epsilon`:
//   max(0, Phi(s1/2 + (zeta1 - eps)/s1) - e^eps Phi(s2/2 + (zeta2 - eps)/s2)).
double ShuffledDelta(const MechanismSpec& spec, double epsilon);

// Tight delta(epsilon) of the plain Gaussian mechanism with l2 sensitivity
// `c` and noise standard deviation `sigma`:
//   Phi(c/(2 sigma) - eps sigma/c) - e^eps Phi(-c/(2 sigma) - eps sigma/c).
double GaussianDelta(double sigma, double c, double epsilon);

// (log(1 + p (e^eps - 1)), p delta).
Budget AmplifyBySubsampling(const Budget& budget, double p);

// Inverse of the epsilon part of AmplifyBySubsampling.
double InvertAmplification(double amplified_epsilon, double p);

// k-fold advanced composition of identical per-step budgets with slack
// delta_slack:
//   eps = min{k e, k e^2 / 2 + sqrt(2 log(1/delta_slack) k e^2)},
//   delta = k delta_step + delta_slack.
Budget ComposeAdvanced(const Budget& per_step, int64_t k, double delta_slack);

struct SolveOptions {
  // Fraction of the total delta reserved as composition slack; the rest is
  // split equally over the steps.
  double delta_slack_fraction = 0.5;
  // c^2 / sigma^2 above which the lognormal-sum approximation behind the
  // shuffled bound is flagged as unreliable.
  double fw_variance_warning = 4.0;
  double sigma_floor = 1e-4;
  double sigma_ceiling = 1e6;
};

struct SigmaRequest {
  Budget total;
  double c = 1.0;
  double c_prime = 1.0;
  int64_t d = 2;
  double p = 1.0;
  int64_t steps = 1;
  bool shuffled = true;
};

struct SigmaSolution {
  double sigma = 0.0;
  // Per-step budget after subsampling amplification (what composes).
  Budget per_step;
  // Per-invocation budget before amplification (what the mechanism meets).
  Budget per_invocation;
  // c^2 / sigma^2 exceeded SolveOptions::fw_variance_warning.
  bool high_variance_warning = false;
};

// Noise level for a whole training run:
//  1. delta_slack = f * delta, per-step delta = (1 - f) delta / T;
//  2. bisect the per-step epsilon so that T-fold advanced composition meets
//     the total epsilon;
//  3. undo subsampling: eps_s = InvertAmplification(eps_j, p),
//     delta_s = delta_j / p;
//  4. bisect the smallest sigma whose per-invocation delta at eps_s is at
//     most delta_s (ShuffledDelta, or GaussianDelta when !shuffled).
//
// Throws InfeasibleBudgetError if sigma_ceiling does not suffice.
SigmaSolution SolveSigma(const SigmaRequest& request,
                         const SolveOptions& options = {});

// Convenience overload returning only sigma.
double SolveSigmaValue(const SigmaRequest& request);

// Whether the shuffled path is taken: strictly sigma < sigma0.
bool TakeShufflePath(double sigma, double sigma0);

}  // namespace shuffledp

#endif  // SHUFFLEDP_ACCOUNTANT_H_
