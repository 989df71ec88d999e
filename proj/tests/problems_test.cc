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

#include "dpfw/problems.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dpfw/dataset.h"
#include "dpfw/geometry.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpfw {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

TEST(LinearLossGradTest, Examples) {
  const std::vector<double> x1 = {0.3, -0.2}, x2 = {-5, 7};
  EXPECT_THAT(LinearLossGrad(x1, std::vector<double>{0, 0}),
              ElementsAre(0.0, 0.0));
  const std::vector<double> z = {0.25, -0.5};
  EXPECT_EQ(LinearLossGrad(x1, z), LinearLossGrad(x2, z));
  EXPECT_THAT(LinearLossGrad(x1, z), ElementsAre(-0.25, 0.5));
}

TEST(LinearLossGradTest, CubeGradientsHaveUnitDualNorm) {
  for (double pv : {1.2, 1.5, 2.0}) {
    const Exponent q = *DualExponent(Exponent::Finite(pv));
    for (int d : {1, 3, 64}) {
      const double c = std::pow(d, -1.0 / q.value());
      std::vector<double> z(d);
      for (int j = 0; j < d; ++j) z[j] = j % 3 ? c : -c;
      const std::vector<double> x(d, 0.0);
      EXPECT_NEAR(LpNormUnchecked(LinearLossGrad(x, z), q), 1.0, 1e-12);
    }
  }
}

TEST(LeastSquaresGradTest, Examples) {
  const Exponent q = Exponent::Finite(3.0);
  const std::vector<double> a = {0.5, -0.25}, x = {1.0, 2.0};
  // <a, x> = 0: the interpolation point for b = 0.
  EXPECT_THAT(*LeastSquaresGrad(x, a, 0.0, q, 1.0, 1.0), ElementsAre(0.0, 0.0));
  const auto g = *LeastSquaresGrad(x, a, -0.5, q, 1.0, 1.0);
  EXPECT_THAT(g,
              ElementsAre(DoubleNear(0.25, 1e-15), DoubleNear(-0.125, 1e-15)));
  EXPECT_FALSE(
      LeastSquaresGrad(x, std::vector<double>{3.0, 0.0}, 0.0, q, 1.0, 1.0)
          .ok());
  EXPECT_FALSE(LeastSquaresGrad(x, a, 2.0, q, 1.0, 1.0).ok());
}

TEST(LeastSquaresGradTest, AxisExampleReachesSmoothnessTimesRadius) {
  // a = A e1, b = 0, x = R e1: gradient norm A^2 R = L1 R <= L0.
  const double A = 1.7, R = 0.8;
  LeastSquaresSpec spec;
  spec.feature_bound = A;
  spec.feature_bias = {0.0, 0.0};
  spec.weights = {0.0, 0.0};
  const Problem problem =
      *Problem::LeastSquares(LpBall{Exponent::Finite(1.5), R}, spec);
  const Exponent q = Exponent::Finite(3.0);
  const std::vector<double> a = {A, 0.0}, x = {R, 0.0};
  const auto g = *LeastSquaresGrad(x, a, 0.0, q, A, problem.label_bound());
  EXPECT_NEAR(LpNormUnchecked(g, q), A * A * R, 1e-14);
  EXPECT_NEAR(problem.L1(), A * A, 1e-14);
  EXPECT_LE(A * A * R, problem.L0());
}

TEST(LeastSquaresGradTest, HolderSmoothnessOnRandomPairs) {
  Rng rng(5);
  std::normal_distribution<double> normal;
  const Exponent p = Exponent::Finite(1.4);
  const Exponent q = *DualExponent(p);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> a(4), x(4), y(4), diff(4), gd(4);
    for (int j = 0; j < 4; ++j) {
      a[j] = normal(rng);
      x[j] = normal(rng);
      y[j] = normal(rng);
      diff[j] = x[j] - y[j];
    }
    const double A = LpNormUnchecked(a, q);
    const auto gx = *LeastSquaresGrad(x, a, 0.1, q, A, 1.0);
    const auto gy = *LeastSquaresGrad(y, a, 0.1, q, A, 1.0);
    for (int j = 0; j < 4; ++j) gd[j] = gx[j] - gy[j];
    ASSERT_LE(LpNormUnchecked(gd, q),
              A * A * LpNormUnchecked(diff, p) * (1 + 1e-12));
  }
}

TEST(CubeDistributionTest, Examples) {
  Rng rng(6);
  const Exponent q = Exponent::Finite(3.0);
  const auto plus =
      *CubeDistributionSample(std::vector<double>{1, 1, 1}, q, rng);
  const double c = std::pow(3.0, -1.0 / 3);
  EXPECT_THAT(plus, ElementsAre(DoubleNear(c, 1e-15), DoubleNear(c, 1e-15),
                                DoubleNear(c, 1e-15)));
  EXPECT_FALSE(CubeDistributionSample(std::vector<double>{1.5}, q, rng).ok());
}

TEST(CubeDistributionTest, MeansWithinThreeStandardErrors) {
  Rng rng(7);
  const Exponent q = Exponent::Finite(3.0);
  struct Case {
    std::vector<double> bias;
  };
  for (const auto& bias :
       {std::vector<double>{0.0, 0.0}, std::vector<double>{0.5, -0.5}}) {
    const double c = std::pow(2.0, -1.0 / 3);
    constexpr int kDraws = 100000;
    std::vector<double> sum(2, 0.0);
    for (int i = 0; i < kDraws; ++i) {
      const auto z = *CubeDistributionSample(bias, q, rng);
      for (int j = 0; j < 2; ++j) sum[j] += z[j];
    }
    for (int j = 0; j < 2; ++j) {
      const double mean = bias[j] * c;
      const double se = c * std::sqrt((1 - bias[j] * bias[j]) / kDraws);
      EXPECT_NEAR(sum[j] / kDraws, mean, 3 * se);
    }
  }
}

TEST(ClosedFormMinimizerTest, SingleActiveCoordinate) {
  const auto cf = *ClosedFormMinimizer(std::vector<double>{0, -2.5, 0},
                                       Exponent::Finite(1.5));
  EXPECT_THAT(cf.x_star, ElementsAre(0.0, -1.0, 0.0));
  EXPECT_DOUBLE_EQ(cf.value, -2.5);
}

TEST(ClosedFormMinimizerTest, OnesInThreeNorm) {
  const std::vector<double> z = {1, 1};
  const Exponent p = Exponent::Finite(1.5);
  const auto cf = *ClosedFormMinimizer(z, p);
  const double c = std::pow(2.0, -2.0 / 3);
  EXPECT_THAT(cf.x_star,
              ElementsAre(DoubleNear(c, 1e-15), DoubleNear(c, 1e-15)));
  EXPECT_NEAR(LpNormUnchecked(cf.x_star, p), 1.0, 1e-15);
  // Oracle: numeric maximization of <x, z> over the unit l_1.5 sphere.
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200000; ++i) {
    const double theta = 2 * std::numbers::pi * i / 200000;
    const std::vector<double> u = {std::cos(theta), std::sin(theta)};
    best = std::max(best, Dot(u, z) / LpNormUnchecked(u, p));
  }
  EXPECT_NEAR(Dot(cf.x_star, z), best, 1e-9);
  EXPECT_NEAR(cf.value, -std::cbrt(2.0), 1e-15);
}

TEST(ClosedFormMinimizerTest, ValueMatchesInnerProduct) {
  Rng rng(8);
  std::normal_distribution<double> normal;
  for (double pv : {1.2, 1.5, 1.9}) {
    const Exponent p = Exponent::Finite(pv);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> z(1 + i % 9);
      for (double& v : z) v = normal(rng);
      const auto cf = *ClosedFormMinimizer(z, p);
      ASSERT_NEAR(cf.value, -Dot(cf.x_star, z), 1e-12);
      ASSERT_NEAR(cf.value, -LpNormUnchecked(z, *DualExponent(p)), 1e-12);
    }
  }
}

TEST(ClosedFormMinimizerTest, RadiusAndDegenerateInput) {
  const auto scaled =
      *ClosedFormMinimizer(std::vector<double>{3, 4}, Exponent::Finite(2), 2.0);
  EXPECT_THAT(scaled.x_star,
              ElementsAre(DoubleNear(1.2, 1e-15), DoubleNear(1.6, 1e-15)));
  EXPECT_NEAR(scaled.value, -10.0, 1e-14);
  const auto zero =
      *ClosedFormMinimizer(std::vector<double>{0, 0}, Exponent::Finite(1.5));
  EXPECT_TRUE(zero.degenerate);
  EXPECT_THAT(zero.x_star, ElementsAre(0.0, 0.0));
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_FALSE(
      ClosedFormMinimizer(std::vector<double>{1}, Exponent::Finite(1)).ok());
}

TEST(ClosedFormMinimizerTest, OptimalAgainstRandomFeasiblePoints) {
  Rng rng(9);
  const LpBall ball{Exponent::Finite(1.3), 1.0};
  const std::vector<double> z = {0.4, -1.2, 0.05, 0.7};
  const auto cf = *ClosedFormMinimizer(z, ball.p);
  const double best = Dot(cf.x_star, z);
  for (int i = 0; i < 10000; ++i) {
    const auto x = RandomFeasiblePoint(ball, 4, rng);
    ASSERT_LE(Dot(x, z), best + 1e-12);
  }
}

TEST(RiskToDistanceBoundTest, Examples) {
  const Exponent p = Exponent::Finite(1.5);
  EXPECT_EQ(*RiskToDistanceBound(0.0, p, 2.0), 0.0);
  EXPECT_NEAR(*RiskToDistanceBound(0.5 * 2.0 / 8, p, 2.0), 1.0, 1e-15);
  EXPECT_FALSE(RiskToDistanceBound(-1.0, p, 2.0).ok());
  EXPECT_FALSE(RiskToDistanceBound(1.0, p, 0.0).ok());
}

TEST(RiskToDistanceBoundTest, NeverViolatedOnRandomPoints) {
  Rng rng(10);
  std::normal_distribution<double> normal;
  const LpBall ball{Exponent::Finite(1.5), 1.0};
  const Exponent q = Exponent::Finite(3.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> z(5);
    for (double& v : z) v = normal(rng);
    const auto cf = *ClosedFormMinimizer(z, ball.p);
    const auto x = RandomFeasiblePoint(ball, 5, rng);
    const double zq = LpNormUnchecked(z, q);
    const double gap = std::max(0.0, zq - Dot(x, z));
    std::vector<double> diff(5);
    for (int j = 0; j < 5; ++j) diff[j] = x[j] - cf.x_star[j];
    ASSERT_LE(LpNormUnchecked(diff, ball.p),
              *RiskToDistanceBound(gap, ball.p, zq) + 1e-12);
  }
}

TEST(LinearProblemTest, ConstantsAndExcessRisk) {
  const double R = 1.5;
  const LpBall ball{Exponent::Finite(1.5), R};
  const std::vector<double> bias = {0.6, -0.2, 0.3};
  const Problem problem = *Problem::Linear(ball, bias);
  EXPECT_EQ(problem.L0(), 1.0);
  EXPECT_EQ(problem.L1(), 0.0);
  EXPECT_EQ(problem.M(), 2 * R);
  EXPECT_TRUE(problem.has_analytic_minimizer());
  const double c = std::pow(3.0, -1.0 / 3);
  std::vector<double> mean(3);
  for (int j = 0; j < 3; ++j) mean[j] = bias[j] * c;
  const Exponent q = Exponent::Finite(3.0);
  EXPECT_NEAR(problem.optimum(), -R * LpNormUnchecked(mean, q), 1e-14);
  const auto& xs = problem.optimum_point();
  EXPECT_NEAR(*problem.ExcessRisk(xs), 0.0, 1e-14);
  std::vector<double> anti(xs);
  for (double& v : anti) v = -v;
  // Oracle: inner products at the antipode.
  EXPECT_NEAR(*problem.ExcessRisk(anti), -Dot(anti, mean) + Dot(xs, mean),
              1e-14);
  EXPECT_NEAR(*problem.ExcessRisk(anti), 2 * LpNormUnchecked(mean, q) * R,
              1e-14);
  // Linear along segments.
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto x = RandomFeasiblePoint(ball, 3, rng);
    std::vector<double> mid(3);
    for (int j = 0; j < 3; ++j) mid[j] = (x[j] + xs[j]) / 2;
    EXPECT_NEAR(*problem.ExcessRisk(mid), *problem.ExcessRisk(x) / 2, 1e-14);
  }
}

TEST(LinearProblemTest, PolytopeOptimumIsBestVertex) {
  const Problem problem =
      *Problem::Linear(Polytope::CrossPolytope(3), {0.2, -0.7, 0.1});
  EXPECT_NEAR(problem.optimum(), -0.7, 1e-15);
  EXPECT_THAT(problem.optimum_point(), ElementsAre(0.0, -1.0, 0.0));
  EXPECT_EQ(problem.M(), 2.0);
}

TEST(LinearProblemTest, EmpiricalRiskMatchesDirectAverage) {
  const Problem problem =
      *Problem::Linear(LpBall{Exponent::Finite(2), 1.0}, {0.1, 0.2});
  Rng rng(12);
  const Dataset data = problem.Sample(500, rng);
  const std::vector<double> x = {0.6, -0.3};
  double direct = 0.0;
  for (int64_t i = 0; i < data.n(); ++i) direct -= Dot(x, data.row(i));
  EXPECT_NEAR(problem.EmpiricalRisk(x, data), direct / 500, 1e-15);
  EXPECT_TRUE(problem.ValidateDataset(data).ok());
}

TEST(LinearProblemTest, RejectsBadSamples) {
  const Problem problem =
      *Problem::Linear(LpBall{Exponent::Finite(2), 1.0}, {0.1, 0.2});
  EXPECT_FALSE(problem.ValidateSample(std::vector<double>{5.0, 0.0}).ok());
  EXPECT_FALSE(problem.ValidateSample(std::vector<double>{0.1}).ok());
  EXPECT_FALSE(Problem::Linear(LpBall{Exponent::Finite(2), 1.0}, {1.2}).ok());
}

LeastSquaresSpec SmallSpec() {
  LeastSquaresSpec spec;
  spec.feature_bound = 1.3;
  spec.feature_bias = {0.4, -0.3, 0.2};
  spec.weights = {0.2, 0.1, -0.3};
  spec.label_noise = 0.2;
  return spec;
}

TEST(LeastSquaresProblemTest, PopulationRiskMatchesMonteCarlo) {
  const Problem problem =
      *Problem::LeastSquares(LpBall{Exponent::Finite(1.5), 1.0}, SmallSpec());
  Rng rng(13);
  const Dataset data = problem.Sample(200000, rng);
  const std::vector<double> x = {-0.4, 0.3, 0.2};
  double sum = 0.0, sum_sq = 0.0;
  for (int64_t i = 0; i < data.n(); ++i) {
    const double l = problem.Loss(x, data.row(i));
    sum += l;
    sum_sq += l * l;
  }
  const double mean = sum / data.n();
  const double se = std::sqrt((sum_sq / data.n() - mean * mean) / data.n());
  EXPECT_NEAR(problem.PopulationRisk(x), mean, 3 * se);
  // Population gradient against central differences of the risk.
  const auto g = problem.PopulationGradient(x);
  for (int j = 0; j < 3; ++j) {
    auto xp = x, xm = x;
    xp[j] += 1e-6;
    xm[j] -= 1e-6;
    EXPECT_NEAR(
        g[j], (problem.PopulationRisk(xp) - problem.PopulationRisk(xm)) / 2e-6,
        1e-7);
  }
}

TEST(LeastSquaresProblemTest, InteriorWeightsAreTheMinimizer) {
  const Problem problem =
      *Problem::LeastSquares(LpBall{Exponent::Finite(1.5), 1.0}, SmallSpec());
  EXPECT_TRUE(problem.has_analytic_minimizer());
  EXPECT_THAT(problem.optimum_point(), ElementsAre(0.2, 0.1, -0.3));
  EXPECT_NEAR(problem.optimum(), 0.2 * 0.2 / 6, 1e-15);
  EXPECT_NEAR(*problem.ExcessRisk(problem.optimum_point()), 0.0, 1e-15);
}

TEST(LeastSquaresProblemTest, ExteriorWeightsUseCertifiedLowerBound) {
  LeastSquaresSpec spec = SmallSpec();
  spec.weights = {1.5, -1.0, 0.8};
  const LpBall ball{Exponent::Finite(1.5), 0.5};
  const Problem problem = *Problem::LeastSquares(ball, spec);
  EXPECT_FALSE(problem.has_analytic_minimizer());
  EXPECT_TRUE(InBall(problem.optimum_point(), ball, 1e-12));
  EXPECT_LE(*problem.ExcessRisk(problem.optimum_point()), 1e-10);
  Rng rng(14);
  for (int i = 0; i < 2000; ++i) {
    EXPECT_TRUE(problem.ExcessRisk(RandomFeasiblePoint(ball, 3, rng)).ok());
  }
}

TEST(ProblemPropertyTest, CertifiedConstants) {
  Rng rng(15);
  std::vector<Problem> problems = {
      *Problem::Linear(LpBall{Exponent::Finite(1.5), 1.0}, {0.3, -0.3, 0.9}),
      *Problem::Linear(Polytope::CrossPolytope(4), {0.3, -0.3, 0.9, 0.0}),
      *Problem::LeastSquares(LpBall{Exponent::Finite(1.2), 2.0}, SmallSpec()),
      *Problem::LeastSquares(Polytope::CrossPolytope(3), SmallSpec()),
  };
  for (const Problem& problem : problems) {
    const Dataset data = problem.Sample(1000, rng);
    const LipschitzCertificate cert =
        CertifyConstants(problem, data, 10000, rng);
    EXPECT_TRUE(cert.ok);
    EXPECT_LE(cert.l0_ratio, problem.L0() * (1 + 1e-12));
    EXPECT_LE(cert.l1_ratio, problem.L1() * (1 + 1e-12) + 1e-15);
  }
}

TEST(ProblemPropertyTest, DatasetMeanConvergesToBias) {
  const std::vector<double> bias = {0.7, -0.1, 0.0, -0.9};
  const Problem problem =
      *Problem::Linear(LpBall{Exponent::Finite(1.5), 1.0}, bias);
  Rng rng(16);
  const int64_t n = 50000;
  const Dataset data = problem.Sample(n, rng);
  const double c = problem.cube_scale();
  for (int j = 0; j < 4; ++j) {
    double sum = 0.0;
    for (int64_t i = 0; i < n; ++i) sum += data.row(i)[j];
    const double se = c * std::sqrt((1 - bias[j] * bias[j]) / n);
    EXPECT_NEAR(sum / n, bias[j] * c, 3 * se + 1e-15);
  }
}

TEST(RandomFeasiblePointTest, StaysFeasible) {
  Rng rng(17);
  const LpBall ball{Exponent::Finite(1.7), 0.3};
  for (int i = 0; i < 1000; ++i) {
    ASSERT_TRUE(InBall(RandomFeasiblePoint(ball, 6, rng), ball, 1e-12));
  }
  const Polytope poly = Polytope::CrossPolytope(2);
  for (int i = 0; i < 1000; ++i) {
    const auto x = RandomFeasiblePoint(poly, 2, rng);
    ASSERT_LE(std::abs(x[0]) + std::abs(x[1]), 1.0 + 1e-12);
  }
}

class DatasetIoTest : public ::testing::Test {
 protected:
  std::string Path(const std::string& name) {
    return ::testing::TempDir() + "/dpfw_" + name;
  }
};

TEST_F(DatasetIoTest, BinaryRoundTrip) {
  const Dataset data = *Dataset::FromValues(
      3, 2, {0.1, -2.5, 1e-300, 7.0, std::nextafter(1.0, 2.0), -0.0});
  ASSERT_TRUE(WriteDatasetBinary(data, Path("rt.bin")).ok());
  EXPECT_EQ(std::filesystem::file_size(Path("rt.bin")), 32u + 6 * 8);
  const Dataset back = *ReadDatasetBinary(Path("rt.bin"));
  EXPECT_EQ(back.n(), 3);
  EXPECT_EQ(back.width(), 2);
  EXPECT_EQ(back, data);
}

TEST_F(DatasetIoTest, RejectsCorruptFiles) {
  const Dataset data = *Dataset::FromValues(2, 2, {1, 2, 3, 4});
  ASSERT_TRUE(WriteDatasetBinary(data, Path("bad.bin")).ok());
  {
    std::fstream f(Path("bad.bin"),
                   std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  EXPECT_FALSE(ReadDatasetBinary(Path("bad.bin")).ok());
  ASSERT_TRUE(WriteDatasetBinary(data, Path("short.bin")).ok());
  std::filesystem::resize_file(Path("short.bin"), 40);
  EXPECT_FALSE(ReadDatasetBinary(Path("short.bin")).ok());
  EXPECT_FALSE(ReadDatasetBinary(Path("missing.bin")).ok());
  EXPECT_FALSE(Dataset::FromValues(2, 3, {1, 2}).ok());
}

TEST_F(DatasetIoTest, CsvHasHeaderAndFullPrecision) {
  const Dataset data = *Dataset::FromValues(1, 2, {0.1, -1.0 / 3});
  ASSERT_TRUE(WriteDatasetCsv(data, Path("d.csv")).ok());
  std::ifstream in(Path("d.csv"));
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "c0,c1\n0.10000000000000001,-0.33333333333333331\n");
}

}  // namespace
}  // namespace dpfw
