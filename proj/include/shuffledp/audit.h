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

#ifndef SHUFFLEDP_AUDIT_H_
#define SHUFFLEDP_AUDIT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "shuffledp/accountant.h"

namespace shuffledp {

struct AuditOutcome {
  double alpha = 0.0;  // P(score >= t | canary absent)
  double beta = 0.0;   // P(score < t | canary present)
  double delta = 0.0;
  double eps_empirical = 0.0;
  int64_t trials = 0;
  double threshold = 0.0;
  // alpha or beta fell below the small-probability floor.
  bool excluded = false;
  // alpha or beta was zero and replaced by 1/trials.
  bool clamped = false;
};

// Smallest alpha / beta kept when estimating epsilon.
inline constexpr double kMinErrorRate = 4e-4;

// max{ln((1 - alpha - delta)/beta), ln((1 - beta - delta)/alpha), 0} for the
// rule "canary present iff score >= threshold".
AuditOutcome EmpiricalEpsilon(std::span<const double> present,
                              std::span<const double> absent, double delta,
                              double threshold,
                              double min_error = kMinErrorRate);

// Largest epsilon over all thresholds at observed scores. When every
// threshold is excluded the result is clamped at alpha = beta = 1/trials.
AuditOutcome SweepEpsilon(std::span<const double> present,
                          std::span<const double> absent, double delta,
                          double min_error = kMinErrorRate);

struct AuditScores {
  std::vector<double> present;
  std::vector<double> absent;
};

// One mechanism invocation per trial and hypothesis. The gradient is 0
// (absent) or c e_1 (present, batch-clipped to c_prime when shuffled). The
// score is the released maximum coordinate when shuffled, otherwise the
// released canary coordinate. Trial i uses sub-seed DeriveSeed(seed, i).
AuditScores DiracCanaryTrials(const MechanismSpec& spec, bool shuffled,
                              int64_t trials, uint64_t seed, int threads = 1);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of SweepEpsilon, resampling each score set.
Interval BootstrapEpsilon(std::span<const double> present,
                          std::span<const double> absent, double delta,
                          int reps, double level, uint64_t seed);

// Smallest epsilon whose per-invocation delta at spec.sigma is <= delta.
double CertifiedEpsilon(const MechanismSpec& spec, double delta, bool shuffled);

// Smallest sigma whose per-invocation delta at epsilon is <= delta.
double CalibrateSigma(const MechanismSpec& spec, double epsilon, double delta,
                      bool shuffled);

// Epsilon of the shuffled max-coordinate test computed from the exact
// distributions of the maximum (no sampling), over a threshold grid:
//   alpha(t) = 1 - Phi(t/sigma)^d,
//   beta(t)  = Phi((t - c)/sigma) Phi(t/sigma)^(d-1).
AuditOutcome ExactMaxTestEpsilon(const MechanismSpec& spec, double delta,
                                 double min_error = kMinErrorRate,
                                 int grid_points = 20001);

struct AuditReport {
  double sigma = 0.0;
  double eps_theoretical = 0.0;
  AuditOutcome outcome;
  Interval ci;
  bool shuffled = true;
};

struct AuditRequest {
  MechanismSpec spec;  // sigma is used as given
  double delta = 1e-5;
  int64_t trials = 10000;
  uint64_t seed = 0;
  bool shuffled = true;
  int bootstrap_reps = 200;
  double level = 0.99;
  int threads = 1;
};

AuditReport RunAudit(const AuditRequest& request);

}  // namespace shuffledp

#endif  // SHUFFLEDP_AUDIT_H_
