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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "shuffledp/errors.h"
#include "shuffledp/random.h"

namespace shuffledp {
namespace {

constexpr int64_t kDrawsPerChunk = 256;

void CheckInputs(std::span<const double> mus, double sigma2) {
  if (mus.empty()) throw DomainError("lognormal: empty mu list");
  if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
    throw DomainError("lognormal: sigma2 must be finite and > 0, got " +
                      std::to_string(sigma2));
  }
  for (double mu : mus) {
    if (!std::isfinite(mu)) throw DomainError("lognormal: non-finite mu");
  }
}

}  // namespace

double StdNormalCdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double Softplus(double x) {
  if (x > 35.0) return x + std::exp(-x);
  return std::log1p(std::exp(x));
}

double LogExpm1(double x) {
  if (x > 35.0) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

double LogSumExp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

double LognormalSumApprox::Cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return StdNormalCdf((std::log(x) - mu_y) / std::sqrt(sigma2_y));
}

LognormalSumApprox FentonWilkinson(std::span<const double> mus,
                                   double sigma2) {
  CheckInputs(mus, sigma2);
  std::vector<double> doubled(mus.begin(), mus.end());
  for (double& m : doubled) m *= 2.0;
  const double log_sum = LogSumExp(mus);
  const double log_sum_sq = LogSumExp(doubled);
  // sigma_y^2 = log[(e^{s} - 1) * S2 / S1^2 + 1]
  const double log_ratio = log_sum_sq - 2.0 * log_sum;
  const double sigma2_y = Softplus(LogExpm1(sigma2) + log_ratio);
  LognormalSumApprox out;
  out.sigma2_y = sigma2_y;
  out.mu_y = log_sum + 0.5 * sigma2 - 0.5 * sigma2_y;
  return out;
}

std::vector<double> MonteCarloSumSamples(std::span<const double> mus,
                                         double sigma2, int64_t n_draws,
                                         uint64_t seed, int threads) {
  CheckInputs(mus, sigma2);
  if (n_draws < 1000) throw DomainError("lognormal: n_draws must be >= 1000");
  std::vector<double> out(static_cast<size_t>(n_draws));
  const double sd = std::sqrt(sigma2);
  const int64_t n_chunks = (n_draws + kDrawsPerChunk - 1) / kDrawsPerChunk;

  auto run_chunk = [&](int64_t chunk) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(chunk)));
    const int64_t begin = chunk * kDrawsPerChunk;
    const int64_t end = std::min(n_draws, begin + kDrawsPerChunk);
    for (int64_t k = begin; k < end; ++k) {
      double s = 0.0;
      for (double mu : mus) s += std::exp(mu + sd * rng.Normal());
      out[static_cast<size_t>(k)] = s;
    }
  };

  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  threads = static_cast<int>(std::min<int64_t>(threads, n_chunks));
  if (threads <= 1) {
    for (int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int64_t c = t; c < n_chunks; c += threads) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }
  std::sort(out.begin(), out.end());
  return out;
}

double KolmogorovSmirnov(std::span<const double> sorted,
                         const LognormalSumApprox& approx) {
  const double n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const double f = approx.Cdf(sorted[i]);
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / n),
                      std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return worst;
}

}  // namespace shuffledp
