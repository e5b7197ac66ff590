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
#include <thread>

#include "shuffledp/errors.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

double EpsilonFromErrors(double alpha, double beta, double delta) {
  double eps = 0.0;
  if (beta > 0.0 && 1.0 - alpha - delta > 0.0) {
    eps = std::max(eps, std::log((1.0 - alpha - delta) / beta));
  }
  if (alpha > 0.0 && 1.0 - beta - delta > 0.0) {
    eps = std::max(eps, std::log((1.0 - beta - delta) / alpha));
  }
  return eps;
}

// Fractions of sorted `v` that are >= t and < t.
double FractionAtLeast(std::span<const double> sorted, double t) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(sorted.end() - it) /
         static_cast<double>(sorted.size());
}
double FractionBelow(std::span<const double> sorted, double t) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(it - sorted.begin()) /
         static_cast<double>(sorted.size());
}

AuditOutcome SweepSorted(std::span<const double> present,
                         std::span<const double> absent, double delta,
                         double min_error) {
  const int64_t trials =
      static_cast<int64_t>(std::min(present.size(), absent.size()));
  AuditOutcome best;
  best.delta = delta;
  best.trials = trials;
  best.excluded = true;
  auto consider = [&](double t) {
    AuditOutcome o;
    o.delta = delta;
    o.trials = trials;
    o.threshold = t;
    o.alpha = FractionAtLeast(absent, t);
    o.beta = FractionBelow(present, t);
    o.excluded = o.alpha < min_error || o.beta < min_error;
    if (o.excluded) return;
    o.eps_empirical = EpsilonFromErrors(o.alpha, o.beta, delta);
    if (best.excluded || o.eps_empirical > best.eps_empirical) best = o;
  };
  for (double t : present) consider(t);
  for (double t : absent) consider(t);
  if (best.excluded) {
    const double floor = 1.0 / static_cast<double>(std::max<int64_t>(trials, 1));
    best.alpha = floor;
    best.beta = floor;
    best.eps_empirical = EpsilonFromErrors(floor, floor, delta);
    best.clamped = true;
  }
  return best;
}

void CheckScores(std::span<const double> present,
                 std::span<const double> absent, double delta) {
  if (present.empty() || absent.empty()) {
    throw DomainError("audit needs non-empty score sets");
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw DomainError("audit delta must lie in [0, 1)");
  }
}

double InvocationDelta(const MechanismSpec& spec, double eps, bool shuffled) {
  return shuffled ? ShuffledDelta(spec, eps) : GaussianDelta(spec.sigma, spec.c, eps);
}

}  // namespace

AuditOutcome EmpiricalEpsilon(std::span<const double> present,
                              std::span<const double> absent, double delta,
                              double threshold, double min_error) {
  CheckScores(present, absent, delta);
  AuditOutcome o;
  o.delta = delta;
  o.trials = static_cast<int64_t>(std::min(present.size(), absent.size()));
  o.threshold = threshold;
  size_t fp = 0;
  for (double s : absent) fp += s >= threshold;
  size_t fn = 0;
  for (double s : present) fn += s < threshold;
  o.alpha = static_cast<double>(fp) / static_cast<double>(absent.size());
  o.beta = static_cast<double>(fn) / static_cast<double>(present.size());
  if (o.alpha < min_error || o.beta < min_error) {
    o.excluded = true;
    return o;
  }
  double alpha = o.alpha;
  double beta = o.beta;
  if (alpha == 0.0 || beta == 0.0) {
    const double floor = 1.0 / static_cast<double>(o.trials);
    alpha = std::max(alpha, floor);
    beta = std::max(beta, floor);
    o.clamped = true;
  }
  o.eps_empirical = EpsilonFromErrors(alpha, beta, delta);
  return o;
}

AuditOutcome SweepEpsilon(std::span<const double> present,
                          std::span<const double> absent, double delta,
                          double min_error) {
  CheckScores(present, absent, delta);
  std::vector<double> p(present.begin(), present.end());
  std::vector<double> a(absent.begin(), absent.end());
  std::sort(p.begin(), p.end());
  std::sort(a.begin(), a.end());
  return SweepSorted(p, a, delta, min_error);
}

AuditScores DiracCanaryTrials(const MechanismSpec& spec, bool shuffled,
                              int64_t trials, uint64_t seed, int threads) {
  if (trials < 1) throw DomainError("audit needs at least one trial");
  if (!(spec.sigma >= 0.0) || !(spec.c > 0.0) || spec.d < 1) {
    throw DomainError("audit needs sigma >= 0, c > 0 and d >= 1");
  }
  double canary = spec.c;
  if (shuffled) canary = std::min(canary, spec.c_prime);
  const int64_t d = spec.d;
  AuditScores out;
  out.present.resize(static_cast<size_t>(trials));
  out.absent.resize(static_cast<size_t>(trials));

  // Any permutation leaves the maximum unchanged, so the shuffled score is
  // computed without materializing the permutation. Without shuffling only
  // the canary coordinate matters.
  auto run_trial = [&](int64_t i) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    if (!shuffled) {
      out.absent[i] = spec.sigma * rng.Normal();
      out.present[i] = canary + spec.sigma * rng.Normal();
      return;
    }
    double m = -INFINITY;
    for (int64_t k = 0; k < d; ++k) m = std::max(m, spec.sigma * rng.Normal());
    out.absent[i] = m;
    m = canary + spec.sigma * rng.Normal();
    for (int64_t k = 1; k < d; ++k) m = std::max(m, spec.sigma * rng.Normal());
    out.present[i] = m;
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    for (int64_t i = 0; i < trials; ++i) run_trial(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int64_t i = t; i < trials; i += threads) run_trial(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

Interval BootstrapEpsilon(std::span<const double> present,
                          std::span<const double> absent, double delta,
                          int reps, double level, uint64_t seed) {
  CheckScores(present, absent, delta);
  if (reps < 1 || !(level > 0.0 && level < 1.0)) {
    throw DomainError("bootstrap needs reps >= 1 and level in (0, 1)");
  }
  Rng rng(seed);
  std::vector<double> eps(static_cast<size_t>(reps));
  std::vector<double> p(present.size());
  std::vector<double> a(absent.size());
  for (int r = 0; r < reps; ++r) {
    for (double& v : p) v = present[rng.UniformBelow(present.size())];
    for (double& v : a) v = absent[rng.UniformBelow(absent.size())];
    std::sort(p.begin(), p.end());
    std::sort(a.begin(), a.end());
    eps[r] = SweepSorted(p, a, delta, kMinErrorRate).eps_empirical;
  }
  std::sort(eps.begin(), eps.end());
  const double tail = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(reps - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, eps.size() - 1);
    return eps[lo] + (pos - static_cast<double>(lo)) * (eps[hi] - eps[lo]);
  };
  return {quantile(tail), quantile(1.0 - tail)};
}

double CertifiedEpsilon(const MechanismSpec& spec, double delta,
                        bool shuffled) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (InvocationDelta(spec, 0.0, shuffled) <= delta) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (InvocationDelta(spec, hi, shuffled) > delta) {
    hi *= 2.0;
    if (hi > 1e4) throw InfeasibleBudgetError("no finite epsilon certified");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (InvocationDelta(spec, mid, shuffled) <= delta ? hi : lo) = mid;
  }
  return hi;
}

double CalibrateSigma(const MechanismSpec& spec, double epsilon, double delta,
                      bool shuffled) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  MechanismSpec s = spec;
  auto ok = [&](double sigma) {
    s.sigma = sigma;
    return InvocationDelta(s, epsilon, shuffled) <= delta;
  };
  double lo = 1e-4;
  double hi = 1.0;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw InfeasibleBudgetError("no sigma meets the budget");
  }
  if (ok(lo)) return lo;
  for (int i = 0; i < 200 && hi - lo > 1e-10 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

AuditOutcome ExactMaxTestEpsilon(const MechanismSpec& spec, double delta,
                                 double min_error, int grid_points) {
  if (!(spec.sigma > 0.0) || !(spec.c > 0.0) || spec.d < 1) {
    throw DomainError("exact audit needs sigma > 0, c > 0 and d >= 1");
  }
  if (grid_points < 2) throw DomainError("exact audit needs >= 2 grid points");
  const double canary = std::min(spec.c, spec.c_prime);
  const double d = static_cast<double>(spec.d);
  // log P(N(0, sigma^2) < x).
  auto log_cdf = [&](double x) {
    return std::log1p(-0.5 * std::erfc(x / (spec.sigma * std::sqrt(2.0))));
  };
  const double lo = -8.0 * spec.sigma;
  const double hi = canary + 8.0 * spec.sigma + spec.sigma * std::sqrt(2.0 * std::log(d));
  AuditOutcome best;
  best.delta = delta;
  best.excluded = true;
  for (int i = 0; i < grid_points; ++i) {
    const double t = lo + (hi - lo) * i / (grid_points - 1);
    AuditOutcome o;
    o.delta = delta;
    o.threshold = t;
    o.alpha = -std::expm1(d * log_cdf(t));
    o.beta = std::exp(log_cdf(t - canary) + (d - 1.0) * log_cdf(t));
    o.excluded = o.alpha < min_error || o.beta < min_error;
    if (o.excluded) continue;
    o.eps_empirical = EpsilonFromErrors(o.alpha, o.beta, delta);
    if (best.excluded || o.eps_empirical > best.eps_empirical) best = o;
  }
  return best;
}

AuditReport RunAudit(const AuditRequest& request) {
  AuditReport report;
  report.sigma = request.spec.sigma;
  report.shuffled = request.shuffled;
  report.eps_theoretical =
      CertifiedEpsilon(request.spec, request.delta, request.shuffled);
  const AuditScores scores =
      DiracCanaryTrials(request.spec, request.shuffled, request.trials,
                        request.seed, request.threads);
  report.outcome = SweepEpsilon(scores.present, scores.absent, request.delta);
  report.ci = BootstrapEpsilon(scores.present, scores.absent, request.delta,
                               request.bootstrap_reps, request.level,
                               DeriveSeed(request.seed, 0xB007));
  return report;
}

}  // namespace shuffledp
