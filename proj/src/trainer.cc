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

#include "shuffledp/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "shuffledp/errors.h"

namespace shuffledp {

std::string StepRecordToJson(const StepRecord& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["loss"] = r.loss;
  j["sigma_used"] = r.sigma_used;
  j["path"] = r.path == UpdatePath::kShuffled ? "shuffled" : "fallback";
  j["batch"] = r.batch;
  j["mean_grad_norm"] = r.mean_grad_norm;
  j["max_grad_norm"] = r.max_grad_norm;
  j["batch_grad_norm"] = r.batch_grad_norm;
  return j.dump();
}

std::vector<size_t> PoissonSample(size_t dataset_size, size_t batch_size,
                                  Rng& rng) {
  if (dataset_size == 0 || batch_size == 0 || batch_size > dataset_size) {
    throw DomainError("need 0 < batch_size <= dataset_size");
  }
  const double p = static_cast<double>(batch_size) /
                   static_cast<double>(dataset_size);
  std::vector<size_t> out;
  out.reserve(batch_size + batch_size / 2);
  for (size_t i = 0; i < dataset_size; ++i) {
    if (rng.Uniform() < p) out.push_back(i);
  }
  return out;
}

void BatchClip(std::span<double> g, double c_prime) { ClipToNorm(g, c_prime); }

void AddNoise(std::span<double> g, double sigma, double c, double divisor,
              Rng& rng) {
  if (!(sigma >= 0.0)) throw DomainError("noise sigma must be >= 0");
  const double sd = sigma * c;
  for (double& v : g) v = (v + sd * rng.Normal()) / divisor;
}

NoisePlan PlanNoise(const TrainConfig& config, size_t dataset_size,
                    int64_t d) {
  NoisePlan plan;
  SigmaRequest req;
  req.total = config.budget;
  req.c = config.c;
  req.c_prime = config.c_prime;
  req.d = d;
  req.p = static_cast<double>(config.batch_size) /
          static_cast<double>(dataset_size);
  req.steps = config.steps;
  if (config.sigma_override) {
    plan.sigma = *config.sigma_override;
  } else {
    req.shuffled = true;
    SigmaSolution s = SolveSigma(req, config.solve);
    plan.sigma = s.sigma;
    plan.fw_warning = s.high_variance_warning;
  }
  if (config.sigma0_override) {
    plan.sigma0 = *config.sigma0_override;
  } else {
    req.shuffled = false;
    plan.sigma0 = SolveSigma(req, config.solve).sigma;
  }
  return plan;
}

TrainResult Train(const TrainConfig& config, Model model, const Dataset& data) {
  if (config.steps < 1) throw DomainError("steps must be >= 1");
  if (!(config.lr > 0.0)) throw DomainError("learning rate must be > 0");
  TrainResult result;
  result.d = static_cast<int64_t>(model.ParameterCount());
  const NoisePlan plan = PlanNoise(config, data.size(), result.d);
  result.sigma = plan.sigma;
  result.sigma0 = plan.sigma0;
  result.fw_warning = plan.fw_warning;
  const bool shuffled_path =
      !config.force_fallback && TakeShufflePath(plan.sigma, plan.sigma0);
  result.path = shuffled_path ? UpdatePath::kShuffled : UpdatePath::kFallback;
  const double noise_std = shuffled_path ? plan.sigma : plan.sigma0;
  const double divisor = static_cast<double>(config.batch_size);

  Rng sampling = MakeStream(config.seed, Stream::kSampling);
  Rng noise_rng = MakeStream(config.seed, Stream::kNoise);
  Rng perm_rng = MakeStream(config.seed, Stream::kPermutation);

  result.layout = IdentityModelPermutation(model);
  std::optional<ModelPermutation> frozen;

  for (int64_t t = 0; t < config.steps; ++t) {
    StepRecord rec;
    rec.step = t;
    rec.path = result.path;
    rec.sigma_used = noise_std;

    const std::vector<size_t> batch =
        PoissonSample(data.size(), config.batch_size, sampling);
    rec.batch = batch.size();
    PerSampleGrads grads = ComputePerSampleGradients(model, data, batch,
                                                     config.loss,
                                                     config.threads);
    if (!batch.empty()) {
      double sum_norm = 0.0;
      double sum_loss = 0.0;
      for (size_t k = 0; k < grads.size(); ++k) {
        sum_norm += grads.norms[k];
        sum_loss += grads.losses[k];
        rec.max_grad_norm = std::max(rec.max_grad_norm, grads.norms[k]);
      }
      rec.mean_grad_norm = sum_norm / static_cast<double>(batch.size());
      rec.loss = sum_loss / static_cast<double>(batch.size());
    } else {
      rec.loss = MeanLoss(model, data, config.loss);
    }
    ClipPerSample(grads, config.c);
    std::vector<double> g = SumGradients(grads);
    if (g.empty()) g.assign(model.ParameterCount(), 0.0);
    rec.batch_grad_norm = L2Norm(g);
    if (shuffled_path) BatchClip(g, config.c_prime);

    // Noise is drawn in the initial parameter layout and carried into the
    // current one, so a permuted run sees exactly the permuted noise of an
    // unpermuted run. P(z) has the law of z, so the mechanism is unchanged.
    Model noise = model.ZerosLike();
    {
      std::vector<double> z(g.size(), 0.0);
      AddNoise(z, noise_std, 1.0, 1.0, noise_rng);
      noise.Unflatten(z);
      ApplyModelPermutation(noise, result.layout);
    }
    const std::vector<double> z = noise.Flatten();
    for (size_t i = 0; i < g.size(); ++i) g[i] = (g[i] + z[i]) / divisor;

    std::vector<double> w = model.Flatten();
    for (size_t i = 0; i < w.size(); ++i) w[i] -= config.lr * g[i];
    model.Unflatten(w);

    if (shuffled_path && config.shuffle) {
      ModelPermutation p;
      if (config.freeze_permutations && frozen) {
        p = *frozen;
      } else {
        p = SampleModelPermutation(model, perm_rng);
        if (config.freeze_permutations) frozen = p;
      }
      ApplyModelPermutation(model, p);
      result.layout = Compose(result.layout, p);
    }
    if (!std::isfinite(rec.loss)) {
      throw DomainError("non-finite loss at step " + std::to_string(t));
    }
    result.log.push_back(rec);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace shuffledp
