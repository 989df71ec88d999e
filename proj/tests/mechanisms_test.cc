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

#include "dpfw/mechanisms.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "dpfw/geometry.h"
#include "dpfw/renyi_quadrature.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpfw {
namespace {

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Two-sided Kolmogorov-Smirnov statistic against N(0, sigma2).
double KsAgainstNormal(std::vector<double> xs, double sigma2) {
  std::sort(xs.begin(), xs.end());
  const double n = xs.size();
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = NormalCdf(xs[i] / std::sqrt(sigma2));
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

// 1% critical value of the KS statistic.
double KsCritical(int n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

TEST(GgSampleTest, EuclideanCaseIsGaussian) {
  Rng rng(1);
  const GGParams params{3, 2.0, 2.0, {}};
  constexpr int kDraws = 100000;
  std::vector<std::vector<double>> coords(3);
  for (int i = 0; i < kDraws; ++i) {
    const auto z = SampleGeneralizedGaussian(params, rng);
    for (int j = 0; j < 3; ++j) coords[j].push_back(z[j]);
  }
  for (const auto& c : coords) {
    EXPECT_LT(KsAgainstNormal(c, 2.0), KsCritical(kDraws));
  }
}

TEST(GgSampleTest, OneDimensionIsGaussianForAnyR) {
  for (double r : {2.0, 3.0, 7.0}) {
    Rng rng(2);
    const GGParams params{1, r, 0.7, {}};
    std::vector<double> xs;
    for (int i = 0; i < 50000; ++i) {
      xs.push_back(SampleGeneralizedGaussian(params, rng)[0]);
    }
    EXPECT_LT(KsAgainstNormal(xs, 0.7), KsCritical(50000)) << "r=" << r;
  }
}

TEST(GgSampleTest, SecondMomentOfFourNorm) {
  Rng rng(3);
  const GGParams params{8, 4.0, 2.25, {}};
  double sum = 0.0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    const auto z = SampleGeneralizedGaussian(params, rng);
    const double n = LpNormUnchecked(z, Exponent::Finite(4));
    sum += n * n;
  }
  EXPECT_NEAR(sum / kDraws / 18.0, 1.0, 0.02);
}

TEST(GgSampleTest, CenterShiftsDraws) {
  Rng a(4), b(4);
  const auto z0 = SampleGeneralizedGaussian({2, 3.0, 1.0, {}}, a);
  const auto z1 = SampleGeneralizedGaussian({2, 3.0, 1.0, {5.0, -1.0}}, b);
  EXPECT_DOUBLE_EQ(z1[0], z0[0] + 5.0);
  EXPECT_DOUBLE_EQ(z1[1], z0[1] - 1.0);
}

TEST(GgSampleTest, DeterministicForEqualSeeds) {
  Rng a(99), b(99);
  const GGParams params{5, 3.0, 1.0, {}};
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(SampleGeneralizedGaussian(params, a),
              SampleGeneralizedGaussian(params, b));
  }
}

TEST(GgSampleTest, ZeroVarianceReturnsCenter) {
  Rng rng(5);
  EXPECT_THAT(SampleGeneralizedGaussian({2, 2.0, 0.0, {1.0, 2.0}}, rng),
              ::testing::ElementsAre(1.0, 2.0));
}

TEST(GgMomentExactTest, Examples) {
  for (int d : {1, 4, 50}) {
    EXPECT_NEAR(GgMomentExact(2, d, 1.7), d * 1.7, 1e-12 * d);
  }
  // Oracle: Gamma recurrence, evaluated with std::tgamma.
  EXPECT_NEAR(GgMomentExact(4, 8, 1.0),
              4.0 * std::tgamma(6.0) / std::tgamma(4.0), 1e-10);
  EXPECT_NEAR(GgMomentExact(4, 8, 1.0), 80.0, 1e-10);
  EXPECT_NEAR(GgMomentExact(2, 1, 3.0), 3.0, 1e-14);
}

TEST(GgLightTailNuTest, Examples) {
  EXPECT_DOUBLE_EQ(GgLightTailNu(2, 1.0), 2.0);
  EXPECT_EQ(GgLightTailNu(5, 0.0), 0.0);
  EXPECT_NEAR(GgLightTailNu(98, 0.25), 5.0, 1e-14);
}

TEST(GgExpSquareMomentTest, ClosedFormAndDomain) {
  for (int d : {1, 2, 10, 200}) {
    const double nu = GgLightTailNu(d, 1.0);
    const double m = *GgExpSquareMoment(nu, d, 1.0);
    EXPECT_NEAR(m, std::pow((d + 2.0) / d, d / 2.0), 1e-12 * m);
    EXPECT_LE(m, std::numbers::e);
  }
  EXPECT_FALSE(GgExpSquareMoment(1.0, 3, 0.5).ok());  // nu^2 = 2 sigma2
  EXPECT_FALSE(GgExpSquareMoment(0.5, 3, 1.0).ok());
}

// Property: E||Z||_r^m within 3 standard errors of the exact value.
TEST(GgPropertyTest, MomentIdentity) {
  constexpr int kDraws = 20000;
  for (int d : {2, 8, 50}) {
    for (double r : {2.0, 3.0, 4.0}) {
      Rng rng(static_cast<uint64_t>(100 * d + r));
      const GGParams params{d, r, 1.3, {}};
      std::array<double, 3> sum{}, sum_sq{};
      const std::array<int, 3> orders = {1, 2, 4};
      for (int i = 0; i < kDraws; ++i) {
        const auto z = SampleGeneralizedGaussian(params, rng);
        const double n = LpNormUnchecked(z, Exponent::Finite(r));
        for (int k = 0; k < 3; ++k) {
          const double v = std::pow(n, orders[k]);
          sum[k] += v;
          sum_sq[k] += v * v;
        }
      }
      for (int k = 0; k < 3; ++k) {
        const double mean = sum[k] / kDraws;
        const double se =
            std::sqrt((sum_sq[k] / kDraws - mean * mean) / kDraws);
        EXPECT_NEAR(mean, GgMomentExact(orders[k], d, 1.3), 3 * se)
            << "d=" << d << " r=" << r << " m=" << orders[k];
      }
    }
  }
}

TEST(GgPropertyTest, LightTail) {
  Rng rng(6);
  const GGParams params{8, 4.0, 2.25, {}};
  const double nu = GgLightTailNu(8, 2.25);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto z = SampleGeneralizedGaussian(params, rng);
    const double n = LpNormUnchecked(z, Exponent::Finite(4));
    sum += std::exp(n * n / (nu * nu));
  }
  EXPECT_LE(sum / 100000, std::numbers::e * 1.05);
}

// Chi-square over the 8 sign orthants and over the position of the largest
// |coordinate|; the angular law is invariant under sign flips and
// permutations.
TEST(GgPropertyTest, AngularSymmetry) {
  Rng rng(7);
  const GGParams params{3, 4.0, 1.0, {}};
  constexpr int kDraws = 80000;
  std::array<int, 8> orthant{};
  std::array<int, 3> argmax{};
  for (int i = 0; i < kDraws; ++i) {
    const auto z = SampleGeneralizedGaussian(params, rng);
    orthant[(z[0] > 0) + 2 * (z[1] > 0) + 4 * (z[2] > 0)]++;
    int best = 0;
    for (int j = 1; j < 3; ++j) {
      if (std::abs(z[j]) > std::abs(z[best])) best = j;
    }
    argmax[best]++;
  }
  auto chi2 = [](const auto& counts) {
    const double expected = static_cast<double>(kDraws) / counts.size();
    double s = 0.0;
    for (int c : counts) s += (c - expected) * (c - expected) / expected;
    return s;
  };
  EXPECT_LT(chi2(orthant), 24.32);  // 7 dof, 0.999 quantile
  EXPECT_LT(chi2(argmax), 13.82);   // 2 dof, 0.999 quantile
}

TEST(LaplaceTest, ZeroScale) {
  Rng rng(8);
  EXPECT_EQ(SampleLaplace(0.0, rng), 0.0);
}

TEST(LaplaceTest, VarianceAndTail) {
  Rng rng(9);
  constexpr int kDraws = 1000000;
  double sum_sq = 0.0;
  int tail = 0;
  const double t = std::log(100.0);
  for (int i = 0; i < kDraws; ++i) {
    const double u = SampleLaplace(1.0, rng);
    sum_sq += u * u;
    if (std::abs(u) > t) ++tail;
  }
  EXPECT_NEAR(sum_sq / kDraws, 2.0, 0.02);
  const double se = std::sqrt(0.01 * 0.99 / kDraws);
  EXPECT_NEAR(static_cast<double>(tail) / kDraws, 0.01, 3 * se);
}

TEST(ReportNoisyMinTest, Noiseless) {
  Rng rng(10);
  const auto res = *ReportNoisyMin(std::vector<double>{3, 1, 2}, 0.0, rng);
  EXPECT_EQ(res.index, 1);
  EXPECT_EQ(res.suboptimality, 0.0);
  EXPECT_EQ(ReportNoisyMin(std::vector<double>{2, 1, 1}, 0.0, rng)->index, 1);
}

TEST(ReportNoisyMinTest, SingleCandidate) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(ReportNoisyMin(std::vector<double>{4.2}, 10.0, rng)->index, 0);
  }
}

TEST(ReportNoisyMinTest, EmptyScoresRejected) {
  Rng rng(12);
  EXPECT_EQ(ReportNoisyMin(std::vector<double>{}, 1.0, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ReportNoisyMinTest, LargeGapSelectsMinimum) {
  Rng rng(13);
  const double scale = 0.5;
  int hits = 0;
  double max_sub = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto res =
        *ReportNoisyMin(std::vector<double>{0.0, 20 * scale}, scale, rng);
    hits += res.index == 0;
    max_sub = std::max(max_sub, res.suboptimality);
  }
  EXPECT_GE(hits / 10000.0, 0.99);
  // The suboptimality is either 0 or the gap.
  EXPECT_TRUE(max_sub == 0.0 || max_sub == 20 * scale);
}

TEST(RenyiQuadratureTest, GaussianClosedForm) {
  for (double alpha : {1.5, 2.0, 4.0}) {
    for (double mu : {0.1, 0.5, 1.0}) {
      EXPECT_NEAR(NumericRenyiDivergence1D(alpha, mu, 1.0, 1.0),
                  alpha * mu * mu / 2.0, 1e-6);
      EXPECT_NEAR(GaussianRenyiDivergence(alpha, mu * mu, 2.0),
                  alpha * mu * mu / 4.0, 1e-15);
    }
  }
}

TEST(RenyiQuadratureTest, TwoDimensionalEuclideanMatchesClosedForm) {
  for (double alpha : {1.5, 4.0}) {
    const std::array<double, 2> mu = {0.3, -0.4};
    EXPECT_NEAR(NumericRenyiDivergence2D(alpha, mu, 2.0, 1.0),
                alpha * 0.25 / 2.0, 1e-6);
  }
}

TEST(RenyiQuadratureTest, ZeroShiftIsZero) {
  EXPECT_NEAR(NumericRenyiDivergence1D(2.0, 0.0, 1.0, 1.0), 0.0, 1e-9);
  EXPECT_NEAR(NumericRenyiDivergence2D(2.0, {0.0, 0.0}, 4.0, 1.0), 0.0, 1e-9);
}

}  // namespace
}  // namespace dpfw
