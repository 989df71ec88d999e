// Copyright 2026 The dpfw Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpfw/estimators.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpfw {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;

GradientBatch MakeBatch(const std::vector<std::vector<double>>& rows) {
  GradientBatch batch(static_cast<int>(rows.front().size()));
  for (const auto& r : rows) batch.Append(r);
  return batch;
}

TEST(GradientBatchTest, AppendAndMean) {
  GradientBatch batch(2);
  batch.Append(std::vector<double>{1, 2});
  auto row = batch.AppendRow();
  row[0] = 3;
  row[1] = -4;
  EXPECT_EQ(batch.count(), 2);
  EXPECT_THAT(BatchMean(batch), ElementsAre(2.0, -1.0));
  batch.Clear();
  EXPECT_EQ(batch.count(), 0);
}

TEST(SpiderUpdateTest, FullRestartIsBatchMean) {
  const GradientBatch fresh = MakeBatch({{0.1, 0.7}, {0.3, -0.2}, {1e-3, 5}});
  const GradientBatch old = MakeBatch({{9, 9}, {8, 8}, {7, 7}});
  EstimatorState state{{100.0, -100.0}, 3, 1.0, 10};
  const EstimatorState next = *SpiderUpdate(state, fresh, old, 1.0);
  EXPECT_EQ(next.current, BatchMean(fresh));  // bitwise
  EXPECT_EQ(next.step, 4);
  EXPECT_EQ(next.consumed, 13);
  const std::vector<double> noise = {0.5, -0.25};
  const EstimatorState noisy = *SpiderUpdate(state, fresh, old, 1.0, noise);
  const auto mean = BatchMean(fresh);
  EXPECT_EQ(noisy.current[0], mean[0] + 0.5);
  EXPECT_EQ(noisy.current[1], mean[1] - 0.25);
}

TEST(SpiderUpdateTest, ConstantLossIsFixedPoint) {
  const GradientBatch g = MakeBatch({{1.5, -2}, {1.5, -2}});
  const EstimatorState state{{1.5, -2}, 0, 0.5, 0};
  EXPECT_THAT(SpiderUpdate(state, g, g, 0.5)->current, ElementsAre(1.5, -2.0));
}

TEST(SpiderUpdateTest, LinearLossHandExpansion) {
  // f(x, z) = -<x, z>: gradients do not depend on x, so Delta = 0.
  const std::vector<std::vector<double>> b0 = {{1, 0}, {0, 1}, {1, 1}};
  const std::vector<std::vector<double>> bt = {{-1, 2}, {3, 0}};
  auto neg = [](std::vector<std::vector<double>> rows) {
    for (auto& r : rows)
      for (double& v : r) v = -v;
    return rows;
  };
  const EstimatorState state{BatchMean(MakeBatch(neg(b0))), 1, 0.3, 3};
  const GradientBatch g = MakeBatch(neg(bt));
  const EstimatorState next = *SpiderUpdate(state, g, g, 0.3);
  EXPECT_THAT(next.current,
              ElementsAre(DoubleNear(0.7 * (-2.0 / 3) + 0.3 * (-1.0), 1e-15),
                          DoubleNear(0.7 * (-2.0 / 3) + 0.3 * (-1.0), 1e-15)));
}

TEST(SpiderUpdateTest, RejectsMismatchedBatches) {
  const EstimatorState state{{0, 0}, 0, 1, 0};
  EXPECT_FALSE(
      SpiderUpdate(state, MakeBatch({{1, 1}}), MakeBatch({{1, 1}, {2, 2}}), 0.5)
          .ok());
  EXPECT_FALSE(
      SpiderUpdate(state, MakeBatch({{1, 1}}), MakeBatch({{1, 1}}), 1.5).ok());
  EXPECT_FALSE(
      SpiderUpdate(state, MakeBatch({{1, 1, 1}}), MakeBatch({{1, 1, 1}}), 0.5)
          .ok());
}

// E over all size-b batches of a finite population of
//   (1-a)(old + mean(g(x_t) - g(x_{t-1}))) + a mean(g(x_t))
// equals (1-a)(old - grad F(x_{t-1})) + grad F(x_t), where F is the
// population average. Checked by enumerating every batch.
void CheckTelescope(int n, int b, bool linear) {
  std::mt19937_64 rng(n * 31 + b);
  std::normal_distribution<double> normal;
  constexpr int kD = 3;
  std::vector<std::vector<double>> a(n, std::vector<double>(kD));
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    for (double& v : a[i]) v = normal(rng);
    y[i] = normal(rng);
  }
  auto grad = [&](const std::vector<double>& x, int i) {
    std::vector<double> g(kD);
    if (linear) {
      for (int j = 0; j < kD; ++j) g[j] = -a[i][j];
      return g;
    }
    double r = -y[i];
    for (int j = 0; j < kD; ++j) r += a[i][j] * x[j];
    for (int j = 0; j < kD; ++j) g[j] = r * a[i][j];
    return g;
  };
  auto population = [&](const std::vector<double>& x) {
    std::vector<double> g(kD, 0.0);
    for (int i = 0; i < n; ++i) {
      const auto gi = grad(x, i);
      for (int j = 0; j < kD; ++j) g[j] += gi[j] / n;
    }
    return g;
  };
  const std::vector<double> x_prev = {0.2, -0.1, 0.4}, x_now = {0.5, 0.3, -0.2};
  const double alpha = 0.35;
  const EstimatorState state{{1.0, -2.0, 0.5}, 2, alpha, 0};
  std::vector<double> expect(kD, 0.0);
  int batches = 0;
  std::vector<int> pick(b);
  // Enumerate b-subsets in lexicographic order.
  for (int i = 0; i < b; ++i) pick[i] = i;
  while (true) {
    GradientBatch g_new(kD), g_old(kD);
    for (int i : pick) {
      g_new.Append(grad(x_now, i));
      g_old.Append(grad(x_prev, i));
    }
    const auto next = *SpiderUpdate(state, g_new, g_old, alpha);
    for (int j = 0; j < kD; ++j) expect[j] += next.current[j];
    ++batches;
    int k = b - 1;
    while (k >= 0 && pick[k] == n - b + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int i = k + 1; i < b; ++i) pick[i] = pick[i - 1] + 1;
  }
  const auto f_prev = population(x_prev), f_now = population(x_now);
  for (int j = 0; j < kD; ++j) {
    EXPECT_NEAR(expect[j] / batches,
                (1 - alpha) * (state.current[j] - f_prev[j]) + f_now[j], 1e-12)
        << "n=" << n << " b=" << b << " j=" << j;
  }
}

TEST(SpiderPropertyTest, UnbiasedTelescopeLinear) {
  for (int n : {4, 8, 16}) CheckTelescope(n, 2, true);
  CheckTelescope(12, 5, true);
}

TEST(SpiderPropertyTest, UnbiasedTelescopeQuadratic) {
  for (int n : {6, 10, 32}) CheckTelescope(n, 3, false);
}

TEST(BiasConfidenceConstantTest, Examples) {
  EXPECT_NEAR(BiasConfidenceConstant(1.0, 1.0, 2.0 * std::exp(-3.0)),
              std::sqrt(std::numbers::e) + 3.0, 1e-14);
  EXPECT_NEAR(BiasConfidenceConstant(1.0, 1.0, 2.0 * std::exp(-3.0)), 4.6487,
              1e-4);
}

TEST(BiasBoundTest, BaseCase) {
  BiasBoundInputs in;
  in.t = 0;
  in.horizon = 8;
  in.alpha = 0.2;
  in.batch_sizes = {64};
  in.L0 = 2.0;
  in.kappa = 3.0;
  EXPECT_NEAR(*BiasBound(in), BiasConfidenceConstant(3.0, 8, 0.05) * 2.0 / 8.0,
              1e-15);
}

TEST(BiasBoundTest, FullRestartKeepsOnlyLastSummand) {
  BiasBoundInputs in;
  in.t = 3;
  in.horizon = 4;
  in.alpha = 1.0;
  in.eta = {0.5, 0.4, 0.3, 0.2};
  in.batch_sizes = {16, 25, 36};
  in.nu = {0.1, 0.2, 0.3};
  in.L0 = 1.5;
  in.L1 = 2.0;
  in.M = 0.5;
  const double c = BiasConfidenceConstant(1.0, 4, 0.05);
  EXPECT_NEAR(*BiasBound(in), c * ((2.0 * 0.5 * 0.2 + 1.5) / 6.0 + 0.3), 1e-14);
}

TEST(BiasBoundTest, MatchesDirectEvaluation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    BiasBoundInputs in;
    in.t = trial % 7;
    in.horizon = 1 + trial % 13;
    in.alpha = u(rng);
    in.L0 = u(rng) * 3;
    in.L1 = u(rng) * 3;
    in.M = u(rng) * 2;
    in.kappa = 1 + 5 * u(rng);
    in.beta = 0.01 + 0.9 * u(rng);
    for (int s = 0; s <= in.t; ++s) {
      in.eta.push_back(u(rng));
      in.batch_sizes.push_back(1 + std::floor(100 * u(rng)));
      in.nu.push_back(u(rng));
    }
    const double c = std::sqrt(std::numbers::e * in.kappa) +
                     std::sqrt(3 * std::log(2 * in.horizon / in.beta));
    double bracket =
        std::pow(1 - in.alpha, in.t) * in.L0 / std::sqrt(in.batch_sizes[0]);
    for (int s = 0; s < in.t; ++s) {
      const double w = std::pow(1 - in.alpha, in.t - (s + 1));
      bracket += (in.L1 * in.M * in.eta[in.t] + in.alpha * in.L0) * w /
                     std::sqrt(in.batch_sizes[s]) +
                 w * in.nu[s];
    }
    ASSERT_NEAR(*BiasBound(in), c * bracket, 1e-12 * c * bracket);
  }
}

TEST(BiasBoundTest, RejectsBadInputs) {
  BiasBoundInputs in;
  in.t = 2;
  in.batch_sizes = {4};
  EXPECT_FALSE(BiasBound(in).ok());
  in.t = 0;
  in.beta = 1.0;
  EXPECT_FALSE(BiasBound(in).ok());
}

TEST(MartingaleTailBoundTest, Examples) {
  const std::vector<double> psi = {3, 4};
  const MartingaleTail zero = *MartingaleTailBound(2.0, psi, 0.0);
  EXPECT_NEAR(zero.threshold, std::sqrt(4 * std::numbers::e) * 5, 1e-13);
  EXPECT_EQ(zero.probability, 2.0);
  const std::vector<double> one = {1};
  const double tau = std::sqrt(3 * std::log(200.0));
  EXPECT_NEAR(MartingaleTailBound(1.0, one, tau)->probability, 0.01, 1e-15);
  const std::vector<double> doubled = {6, 8};
  const MartingaleTail a = *MartingaleTailBound(2.0, psi, 1.7);
  const MartingaleTail b = *MartingaleTailBound(2.0, doubled, 1.7);
  EXPECT_NEAR(b.threshold, 2 * a.threshold, 1e-13);
  EXPECT_EQ(a.probability, b.probability);
}

TEST(MartingaleTailBoundTest, RejectsBadInputs) {
  const std::vector<double> bad = {1, 0};
  EXPECT_FALSE(MartingaleTailBound(1.0, bad, 1.0).ok());
  const std::vector<double> ok = {1};
  EXPECT_FALSE(MartingaleTailBound(1.0, ok, -1.0).ok());
}

TEST(BiasTraceTest, MaxGap) {
  BiasTrace trace;
  EXPECT_EQ(trace.MaxGap(), 0.0);
  trace.entries = {{0, 0.3, 1}, {1, 0.7, 1}, {2, 0.1, 1}};
  EXPECT_EQ(trace.MaxGap(), 0.7);
}

}  // namespace
}  // namespace dpfw
