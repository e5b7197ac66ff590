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

#include <algorithm>
#include <cmath>
#include <string>

#include "shuffledp/errors.h"
#include "shuffledp/lognormal.h"

namespace shuffledp {
namespace {

constexpr int kMaxBisections = 400;
constexpr double kEpsilonTolerance = 1e-9;
constexpr double kSigmaRelTolerance = 1e-6;

void CheckPositive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw DomainError(std::string(name) + " must be finite and > 0, got " +
                      std::to_string(v));
  }
}

void CheckRate(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DomainError("sampling rate p must be in (0, 1], got " +
                      std::to_string(p));
  }
}

// log[ratio (e^{c^2/sigma^2} - 1) + 1] with
// ratio = (1 + (d-1) e^{-2x}) / (1 + (d-1) e^{-x})^2.
double LogMixtureVariance(double log_dm1, double x, double log_expm1_snr) {
  const double log_ratio =
      Softplus(log_dm1 - 2.0 * x) - 2.0 * Softplus(log_dm1 - x);
  return Softplus(log_ratio + log_expm1_snr);
}

// e^eps * Phi(x), evaluated so that a vanishing Phi never meets an infinite
// exponential.
double ScaledCdf(double epsilon, double x) {
  const double phi = StdNormalCdf(x);
  if (phi == 0.0) return 0.0;
  return std::exp(epsilon + std::log(phi));
}

}  // namespace

void Budget::Validate() const {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw DomainError("epsilon must be finite and >= 0, got " +
                      std::to_string(epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must be in (0, 1), got " + std::to_string(delta));
  }
}

ShuffleBound ComputeShuffleBound(const MechanismSpec& spec) {
  if (spec.d < 2) {
    throw DomainError("shuffled bound needs d >= 2, got " +
                      std::to_string(spec.d));
  }
  CheckPositive(spec.sigma, "sigma");
  CheckPositive(spec.c, "c");
  CheckPositive(spec.c_prime, "c_prime");

  const double d = static_cast<double>(spec.d);
  const double var = spec.sigma * spec.sigma;
  const double log_dm1 = std::log(d - 1.0);
  const double scale = d / ((d - 1.0) * var);
  const double x1 = scale * spec.c * spec.c_prime;
  const double x2 = scale * spec.c * (spec.c + spec.c_prime);
  const double snr = spec.c * spec.c / var;
  const double log_expm1_snr = LogExpm1(snr);

  ShuffleBound b;
  b.zeta1 = -Softplus(log_dm1 - x1);
  b.zeta2 = -Softplus(log_dm1 - x2) - snr;
  b.sigma_z1_sq = LogMixtureVariance(log_dm1, x1, log_expm1_snr);
  b.sigma_z2_sq = LogMixtureVariance(log_dm1, x2, log_expm1_snr);
  return b;
}

double ShuffledDelta(const MechanismSpec& spec, double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  const ShuffleBound b = ComputeShuffleBound(spec);
  const double s1 = std::sqrt(b.sigma_z1_sq);
  const double s2 = std::sqrt(b.sigma_z2_sq);
  const double first = StdNormalCdf(0.5 * s1 + (b.zeta1 - epsilon) / s1);
  const double second = ScaledCdf(epsilon, 0.5 * s2 + (b.zeta2 - epsilon) / s2);
  return std::max(0.0, first - second);
}

double GaussianDelta(double sigma, double c, double epsilon) {
  CheckPositive(sigma, "sigma");
  CheckPositive(c, "c");
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  const double a = c / (2.0 * sigma);
  const double b = epsilon * sigma / c;
  return std::max(0.0, StdNormalCdf(a - b) - ScaledCdf(epsilon, -a - b));
}

Budget AmplifyBySubsampling(const Budget& budget, double p) {
  CheckRate(p);
  return {std::log1p(p * std::expm1(budget.epsilon)), p * budget.delta};
}

double InvertAmplification(double amplified_epsilon, double p) {
  CheckRate(p);
  if (!(amplified_epsilon >= 0.0)) {
    throw DomainError("amplified epsilon must be >= 0");
  }
  return std::log1p(std::expm1(amplified_epsilon) / p);
}

Budget ComposeAdvanced(const Budget& per_step, int64_t k, double delta_slack) {
  if (k < 1) throw DomainError("composition needs k >= 1");
  if (!(delta_slack > 0.0)) throw DomainError("delta slack must be > 0");
  const double kd = static_cast<double>(k);
  const double e = per_step.epsilon;
  const double linear = kd * e;
  const double sq = kd * e * e;
  const double advanced =
      0.5 * sq + std::sqrt(2.0 * std::log(1.0 / delta_slack) * sq);
  return {std::min(linear, advanced), kd * per_step.delta + delta_slack};
}

SigmaSolution SolveSigma(const SigmaRequest& request,
                         const SolveOptions& options) {
  request.total.Validate();
  CheckRate(request.p);
  CheckPositive(request.c, "c");
  CheckPositive(request.c_prime, "c_prime");
  if (request.steps < 1) throw DomainError("steps must be >= 1");
  if (request.shuffled && request.d < 2) {
    throw DomainError("shuffled accounting needs d >= 2");
  }
  const double f = options.delta_slack_fraction;
  if (!(f > 0.0 && f < 1.0)) {
    throw DomainError("delta slack fraction must be in (0, 1)");
  }

  const double steps = static_cast<double>(request.steps);
  const double delta_slack = f * request.total.delta;
  const double delta_step = (1.0 - f) * request.total.delta / steps;

  // Per-step epsilon: largest e with composed epsilon <= total.
  double lo = 0.0;
  double hi = request.total.epsilon;
  for (int i = 0; i < kMaxBisections && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (ComposeAdvanced({mid, delta_step}, request.steps, delta_slack).epsilon <=
        request.total.epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (request.total.epsilon -
          ComposeAdvanced({lo, delta_step}, request.steps, delta_slack)
              .epsilon >
      kEpsilonTolerance) {
    // ComposeAdvanced is continuous and increasing, so this cannot trigger
    // unless the bracket logic above is broken.
    throw DomainError("per-step epsilon bisection did not converge");
  }

  SigmaSolution sol;
  sol.per_step = {lo, delta_step};
  sol.per_invocation = {InvertAmplification(lo, request.p),
                        delta_step / request.p};
  if (sol.per_invocation.delta >= 1.0) {
    throw DomainError("per-invocation delta >= 1; budget delta too large");
  }

  const double eps_s = sol.per_invocation.epsilon;
  const double delta_s = sol.per_invocation.delta;
  auto satisfied = [&](double sigma) {
    if (request.shuffled) {
      MechanismSpec spec;
      spec.sigma = sigma;
      spec.c = request.c;
      spec.c_prime = request.c_prime;
      spec.d = request.d;
      return ShuffledDelta(spec, eps_s) <= delta_s;
    }
    return GaussianDelta(sigma, request.c, eps_s) <= delta_s;
  };

  double sigma_hi = 1.0;
  while (!satisfied(sigma_hi)) {
    if (sigma_hi >= options.sigma_ceiling) {
      throw InfeasibleBudgetError(
          "no sigma <= " + std::to_string(options.sigma_ceiling) +
          " meets eps=" + std::to_string(request.total.epsilon) +
          " delta=" + std::to_string(request.total.delta));
    }
    sigma_hi = std::min(2.0 * sigma_hi, options.sigma_ceiling);
  }
  double sigma_lo = options.sigma_floor;
  if (satisfied(sigma_lo)) {
    sol.sigma = sigma_lo;
  } else {
    while (sigma_hi - sigma_lo > kSigmaRelTolerance * sigma_hi) {
      const double mid = 0.5 * (sigma_lo + sigma_hi);
      if (satisfied(mid)) {
        sigma_hi = mid;
      } else {
        sigma_lo = mid;
      }
    }
    sol.sigma = sigma_hi;
  }
  sol.high_variance_warning =
      request.shuffled && request.c * request.c / (sol.sigma * sol.sigma) >
                              options.fw_variance_warning;
  return sol;
}

double SolveSigmaValue(const SigmaRequest& request) {
  return SolveSigma(request).sigma;
}

bool TakeShufflePath(double sigma, double sigma0) { return sigma < sigma0; }

}  // namespace shuffledp
