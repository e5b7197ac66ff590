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

#ifndef SHUFFLEDP_TRAINER_H_
#define SHUFFLEDP_TRAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shuffledp/accountant.h"
#include "shuffledp/model.h"
#include "shuffledp/permute.h"
#include "shuffledp/random.h"

namespace shuffledp {

struct TrainConfig {
  Budget budget{1.0, 1e-5};
  double c = 1.0;        // per-sample clip
  double c_prime = 1.0;  // batch clip (shuffled path only)
  size_t batch_size = 32;
  int64_t steps = 100;
  double lr = 0.1;
  uint64_t seed = 0;
  LossKind loss = LossKind::kCrossEntropy;

  // Permute after each update on the shuffled path. Turning this off keeps
  // every other computation, including the noise scale, unchanged.
  bool shuffle = true;
  // Sample the permutation once and reuse it every step.
  bool freeze_permutations = false;
  // Always take the unshuffled path with sigma0.
  bool force_fallback = false;

  // Noise standard deviations (gradient units) replacing the accountant's.
  std::optional<double> sigma_override;
  std::optional<double> sigma0_override;

  int threads = 1;
  SolveOptions solve;
};

enum class UpdatePath { kShuffled, kFallback };

struct StepRecord {
  int64_t step = 0;
  double loss = 0.0;
  double sigma_used = 0.0;  // noise std in gradient units
  UpdatePath path = UpdatePath::kShuffled;
  size_t batch = 0;  // realized Poisson batch size
  double mean_grad_norm = 0.0;  // pre-clip per-sample norms
  double max_grad_norm = 0.0;
  double batch_grad_norm = 0.0;  // |sum of clipped grads| before batch clip
};

std::string StepRecordToJson(const StepRecord& r);

struct TrainResult {
  Model model;
  std::vector<StepRecord> log;
  double sigma = 0.0;
  double sigma0 = 0.0;
  int64_t d = 0;
  bool fw_warning = false;
  UpdatePath path = UpdatePath::kShuffled;
  // Maps the initial parameter layout to the final one.
  ModelPermutation layout;
};

// Each index in [0, dataset_size) is kept independently with probability
// batch_size / dataset_size.
std::vector<size_t> PoissonSample(size_t dataset_size, size_t batch_size,
                                  Rng& rng);

// g / max(1, |g| / c_prime).
void BatchClip(std::span<double> g, double c_prime);

// Adds i.i.d. N(0, (sigma c)^2) to every coordinate, then divides by
// `divisor` (the nominal batch size in training).
void AddNoise(std::span<double> g, double sigma, double c, double divisor,
              Rng& rng);

// Noise multiplier / sigma resolution for a config and model size.
struct NoisePlan {
  double sigma = 0.0;
  double sigma0 = 0.0;
  bool fw_warning = false;
};
NoisePlan PlanNoise(const TrainConfig& config, size_t dataset_size, int64_t d);

// Shuffled DPSGD. Throws InfeasibleBudgetError before touching `data` when
// the accountant cannot meet the budget.
TrainResult Train(const TrainConfig& config, Model model, const Dataset& data);

}  // namespace shuffledp

#endif  // SHUFFLEDP_TRAINER_H_
