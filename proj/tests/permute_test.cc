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

#include "shuffledp/permute.h"

#include <algorithm>
#include <map>

#include <gtest/gtest.h>

#include "shuffledp/errors.h"
#include "shuffledp/model.h"

namespace shuffledp {
namespace {

constexpr char kToyConfig[] = R"({
  "input_dim": 12,
  "blocks": [
    {"type": "attention", "model_dim": 4, "heads": 2, "key_dim": 3, "value_dim": 5},
    {"type": "mlp", "in": 12, "hidden": 7, "out": 12, "activation": "tanh"},
    {"type": "mlp", "in": 12, "hidden": 5, "out": 3, "activation": "relu"}
  ]
})";

Model ToyModel(uint64_t seed) {
  return BuildModel(ParseModelConfig(kToyConfig), seed);
}

std::vector<double> RandomInput(size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.Normal();
  return x;
}

double MaxDiff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(PermutationTest, Validation) {
  EXPECT_NO_THROW(Permutation({2, 0, 1}));
  EXPECT_THROW(Permutation({0, 0, 1}), DomainError);
  EXPECT_THROW(Permutation({0, 3, 1}), DomainError);
  Rng rng(1);
  EXPECT_THROW(Permutation::Sample(0, rng), DomainError);
}

TEST(PermutationTest, SizeOneIsIdentity) {
  Rng rng(2);
  for (int i = 0; i < 10; ++i) EXPECT_TRUE(Permutation::Sample(1, rng).IsIdentity());
}

TEST(PermutationTest, UniformOverOrderings) {
  Rng rng(3);
  std::map<std::vector<size_t>, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    const Permutation p = Permutation::Sample(3, rng);
    counts[{p.indices().begin(), p.indices().end()}]++;
  }
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [k, c] : counts) EXPECT_NEAR(c / double(draws), 1.0 / 6, 0.01);
}

TEST(PermutationTest, SeedReproducible) {
  Rng a(4), b(4);
  EXPECT_EQ(Permutation::Sample(50, a), Permutation::Sample(50, b));
}

TEST(PermutationTest, ComposeAndInverse) {
  Rng rng(5);
  const Permutation p = Permutation::Sample(9, rng);
  const Permutation q = Permutation::Sample(9, rng);
  std::vector<double> v(9);
  for (size_t i = 0; i < 9; ++i) v[i] = double(i) * 1.5;
  const auto pq = Apply<double>(q, Apply<double>(p, v));
  EXPECT_EQ(Apply<double>(Compose(p, q), v), pq);
  EXPECT_TRUE(Compose(p, p.Inverse()).IsIdentity());
  EXPECT_EQ(Apply<double>(p.Inverse(), Apply<double>(p, v)), v);
}

TEST(MlpPermutationTest, IdentityIsBitExact) {
  Rng rng(6);
  MlpParams a = MlpParams::Random(4, 6, 2, Activation::kRelu, rng);
  const MlpParams b = a;
  ApplyMlpPermutation(a, Permutation::Identity(6));
  EXPECT_EQ(a.w0, b.w0);
  EXPECT_EQ(a.b0, b.b0);
  EXPECT_EQ(a.w1, b.w1);
}

TEST(MlpPermutationTest, ForwardInvariantAndInverse) {
  Rng rng(7);
  MlpParams a = MlpParams::Random(4, 6, 2, Activation::kTanh, rng);
  const MlpParams orig = a;
  const Matrix x = Matrix::Gaussian(3, 4, 1.0, rng);
  const Permutation p = Permutation::Sample(6, rng);
  ApplyMlpPermutation(a, p);
  EXPECT_LT(MaxAbsDiff(MlpForward(a, x).y, MlpForward(orig, x).y), 1e-10);
  ApplyMlpPermutation(a, p.Inverse());
  EXPECT_EQ(a.w0, orig.w0);
  EXPECT_EQ(a.b0, orig.b0);
  EXPECT_EQ(a.w1, orig.w1);
  EXPECT_THROW(ApplyMlpPermutation(a, Permutation::Identity(5)), ShapeError);
}

TEST(AttentionPermutationTest, ForwardInvariant) {
  Rng rng(8);
  AttentionParams a = AttentionParams::Random(4, 3, 2, 5, rng);
  const AttentionParams orig = a;
  const Matrix x = Matrix::Gaussian(6, 4, 1.0, rng);
  AttentionPermutation p;
  for (int i = 0; i < 3; ++i) p.key.push_back(Permutation::Sample(2, rng));
  p.value = Permutation::Sample(5, rng);
  ApplyAttentionPermutation(a, p);
  EXPECT_NE(a.wo, orig.wo);
  EXPECT_LT(MaxAbsDiff(AttentionForward(a, x).y, AttentionForward(orig, x).y),
            1e-10);
}

TEST(AttentionPermutationTest, IdentityIsBitExact) {
  Rng rng(9);
  AttentionParams a = AttentionParams::Random(4, 2, 3, 2, rng);
  const AttentionParams orig = a;
  AttentionPermutation p;
  p.key = {Permutation::Identity(3), Permutation::Identity(3)};
  p.value = Permutation::Identity(2);
  ApplyAttentionPermutation(a, p);
  EXPECT_EQ(a.wq, orig.wq);
  EXPECT_EQ(a.wk, orig.wk);
  EXPECT_EQ(a.wv, orig.wv);
  EXPECT_EQ(a.wo, orig.wo);
}

TEST(ModelPermutationTest, ForwardInvariantAndGradientEquivariant) {
  Rng rng(10);
  const Model orig = ToyModel(11);
  Model perm = orig;
  const ModelPermutation p = SampleModelPermutation(perm, rng);
  ApplyModelPermutation(perm, p);
  EXPECT_GT(MaxDiff(perm.Flatten(), orig.Flatten()), 0.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = RandomInput(12, rng);
    EXPECT_LT(MaxDiff(Forward(perm, x), Forward(orig, x)), 1e-10);
    Model g = Backprop(orig, x, trial % 3, LossKind::kCrossEntropy).grads;
    ApplyModelPermutation(g, p);
    const Model gp = Backprop(perm, x, trial % 3, LossKind::kCrossEntropy).grads;
    EXPECT_LT(MaxDiff(gp.Flatten(), g.Flatten()), 1e-8);
  }
}

TEST(ModelPermutationTest, ComposeMatchesSequentialApplication) {
  Rng rng(12);
  const Model orig = ToyModel(13);
  const ModelPermutation p = SampleModelPermutation(orig, rng);
  const ModelPermutation q = SampleModelPermutation(orig, rng);
  Model a = orig;
  ApplyModelPermutation(a, p);
  ApplyModelPermutation(a, q);
  Model b = orig;
  ApplyModelPermutation(b, Compose(p, q));
  EXPECT_EQ(a.Flatten(), b.Flatten());
  ApplyModelPermutation(b, Inverse(Compose(p, q)));
  EXPECT_EQ(b.Flatten(), orig.Flatten());
}

TEST(ShuffleUpdateTest, ZeroLearningRate) {
  Rng rng(14);
  const Model orig = ToyModel(15);
  Model m = orig;
  ShuffleUpdate(m, m.ZerosLike(), 0.0, rng);
  EXPECT_GT(MaxDiff(m.Flatten(), orig.Flatten()), 0.0);
  const auto x = RandomInput(12, rng);
  EXPECT_LT(MaxDiff(Forward(m, x), Forward(orig, x)), 1e-10);
}

TEST(ShuffleUpdateTest, IdentityPermutationIsPlainSgd) {
  const Model orig = ToyModel(16);
  Model m = orig;
  ApplyModelPermutation(m, IdentityModelPermutation(m));
  EXPECT_EQ(m.Flatten(), orig.Flatten());
}

TEST(ShuffleUpdateTest, SgdStepThenPermutation) {
  Rng a(17);
  const Model orig = ToyModel(18);
  Model grad = orig.ZerosLike();
  std::vector<double> g(orig.ParameterCount());
  for (double& v : g) v = a.Normal();
  grad.Unflatten(g);
  Model m = orig;
  const ModelPermutation p = ShuffleUpdate(m, grad, 0.1, a);
  Model expected = orig;
  std::vector<double> w = expected.Flatten();
  for (size_t i = 0; i < w.size(); ++i) w[i] -= 0.1 * g[i];
  expected.Unflatten(w);
  ApplyModelPermutation(expected, p);
  EXPECT_EQ(m.Flatten(), expected.Flatten());
}

TEST(PermutationCountTest, LogFactorials) {
  const Model m = ToyModel(19);
  const double expected = 2 * std::lgamma(4.0) + std::lgamma(6.0) +
                          std::lgamma(8.0) + std::lgamma(6.0);
  EXPECT_NEAR(LogPermutationCount(m), expected, 1e-12);
}

TEST(GatherTest, FusedMatchesRowThenColumn) {
  Rng rng(20);
  const size_t n = 7;
  std::vector<float> src(n * n);
  for (float& v : src) v = static_cast<float>(rng.Normal());
  const Permutation r = Permutation::Sample(n, rng);
  const Permutation c = Permutation::Sample(n, rng);
  std::vector<float> dst(n * n);
  PermuteRowsAndColumns(src, dst, n, r, c);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) EXPECT_EQ(dst[i * n + j], src[r[i] * n + c[j]]);
  }
  Matrix m(n, n);
  for (size_t i = 0; i < n * n; ++i) m.flat()[i] = src[i];
  const Matrix both = PermuteColumns(PermuteRows(m, r), c);
  for (size_t i = 0; i < n * n; ++i) EXPECT_EQ(both.flat()[i], double(dst[i]));
}

}  // namespace
}  // namespace shuffledp
