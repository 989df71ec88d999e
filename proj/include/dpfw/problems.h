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

#ifndef DPFW_PROBLEMS_H_
#define DPFW_PROBLEMS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpfw/dataset.h"
#include "dpfw/geometry.h"
#include "dpfw/mechanisms.h"

namespace dpfw {

enum class LossKind { kLinear, kLeastSquares };

// {x : ||x||_p <= radius}.
struct LpBall {
  Exponent p = Exponent::Finite(2.0);
  double radius = 1.0;
};

using FeasibleSet = std::variant<LpBall, Polytope>;

// Diameter M of the set in its own norm: 2 * radius for a ball.
double Diameter(const FeasibleSet& set);
// The primal norm: the ball exponent, or the ambient norm of a polytope.
Exponent PrimalExponent(const FeasibleSet& set);
// sup ||x||_p over the set.
double MaxNorm(const FeasibleSet& set);
int SetDimension(const FeasibleSet& set);

struct LmoResult {
  std::vector<double> point;
  // Vertex index for polytopes, -1 for balls.
  int vertex = -1;
};

LmoResult Lmo(std::span<const double> g, const FeasibleSet& set);

// Membership test with absolute slack `tol` on the norm (balls only; for
// polytopes use convex-combination weights instead).
bool InBall(std::span<const double> x, const LpBall& ball, double tol);

// Coordinates are +-scale with P(+) = (1 + bias_j) / 2.
void SampleCubeInto(std::span<const double> bias, double scale, Rng& rng,
                    std::span<double> out);

// One draw from the cube alphabet {+-d^{-1/q}}^d. Biases must lie in [-1, 1].
absl::StatusOr<std::vector<double>> CubeDistributionSample(
    std::span<const double> bias, Exponent q, Rng& rng);

// Gradient of f(x, z) = -<x, z>, which is -z for every x.
std::vector<double> LinearLossGrad(std::span<const double> x,
                                   std::span<const double> z);

// Gradient a (<a, x> - b) of (<a, x> - b)^2 / 2 after checking
// ||a||_q <= feature_bound and |b| <= label_bound.
absl::StatusOr<std::vector<double>> LeastSquaresGrad(std::span<const double> x,
                                                     std::span<const double> a,
                                                     double b, Exponent q,
                                                     double feature_bound,
                                                     double label_bound);

struct ClosedFormMinimum {
  std::vector<double> x_star;
  double value = 0.0;
  // Set when z_bar = 0: every feasible point is optimal and 0 is returned.
  bool degenerate = false;
};

// Minimizer of -<x, z_bar> over the radius-R lp ball for 1 < p <= 2:
// x*_j = R (|z_j| / ||z||_q)^{q-1} sign(z_j), value -R ||z||_q.
absl::StatusOr<ClosedFormMinimum> ClosedFormMinimizer(
    std::span<const double> z_bar, Exponent p, double radius = 1.0);

// sqrt(8 alpha / ((p - 1) ||z_bar||_q)).
absl::StatusOr<double> RiskToDistanceBound(double alpha_gap, Exponent p,
                                           double z_bar_q_norm);

struct LeastSquaresSpec {
  // Feature coordinates are +-A d^{-1/q}, so ||a||_q = A exactly.
  double feature_bound = 1.0;
  std::vector<double> feature_bias;
  std::vector<double> weights;
  // Labels are <a, w> + Uniform(-h, h).
  double label_noise = 0.1;
};

// A loss family over a feasible set with certified constants and exact
// population moments.
class Problem {
 public:
  // Linear loss on cube-alphabet samples with the given per-coordinate bias.
  static absl::StatusOr<Problem> Linear(FeasibleSet set,
                                        std::vector<double> bias);
  static absl::StatusOr<Problem> LeastSquares(FeasibleSet set,
                                              LeastSquaresSpec spec);

  LossKind kind() const { return kind_; }
  const FeasibleSet& set() const { return set_; }
  Exponent p() const { return p_; }
  Exponent q() const { return q_; }
  int dim() const { return dim_; }
  // Features plus one label column for least squares.
  int sample_width() const {
    return kind_ == LossKind::kLinear ? dim_ : dim_ + 1;
  }
  double L0() const { return l0_; }
  double L1() const { return l1_; }
  double M() const { return m_; }
  // Coordinate magnitude of the cube alphabet.
  double cube_scale() const { return cube_scale_; }
  double label_bound() const { return label_bound_; }
  const std::vector<double>& bias() const { return bias_; }
  bool has_analytic_minimizer() const { return analytic_minimizer_; }

  // Minimum of F_D over the set. Exact when has_analytic_minimizer(); a
  // certified lower bound from a duality-gap reference solve otherwise.
  double optimum() const { return optimum_; }
  const std::vector<double>& optimum_point() const { return optimum_point_; }

  // Hot-path evaluation; no validation.
  double Loss(std::span<const double> x, std::span<const double> sample) const;
  void Gradient(std::span<const double> x, std::span<const double> sample,
                std::span<double> out) const;

  double PopulationRisk(std::span<const double> x) const;
  std::vector<double> PopulationGradient(std::span<const double> x) const;
  double EmpiricalRisk(std::span<const double> x, const Dataset& data) const;

  // F_D(x) - F*; fails with an internal error below -1e-12.
  absl::StatusOr<double> ExcessRisk(std::span<const double> x) const;

  absl::Status ValidateSample(std::span<const double> sample) const;
  absl::Status ValidateDataset(const Dataset& data) const;

  Dataset Sample(int64_t n, Rng& rng) const;

 private:
  Problem() = default;
  absl::Status Finish();

  LossKind kind_ = LossKind::kLinear;
  FeasibleSet set_ = LpBall{};
  Exponent p_ = Exponent::Finite(2.0);
  Exponent q_ = Exponent::Finite(2.0);
  int dim_ = 0;
  double l0_ = 0.0;
  double l1_ = 0.0;
  double m_ = 0.0;
  double cube_scale_ = 1.0;
  double label_bound_ = 0.0;
  std::vector<double> bias_;

  // Least squares: weights, noise half-width, and Sigma = E[a a^T].
  std::vector<double> weights_;
  double label_noise_ = 0.0;
  std::vector<double> sigma_;

  bool analytic_minimizer_ = false;
  double optimum_ = 0.0;
  std::vector<double> optimum_point_;
};

struct LipschitzCertificate {
  // max |f(x,z) - f(y,z)| / ||x-y||_p and the gradient analogue in ||.||_q.
  double l0_ratio = 0.0;
  double l1_ratio = 0.0;
  bool ok = true;
};

// Random-pair check of the declared constants on samples from `data` (or
// fresh draws when data is empty), with points drawn from the feasible set.
LipschitzCertificate CertifyConstants(const Problem& problem,
                                      const Dataset& data, int pairs, Rng& rng);

// A uniform-ish random point of the feasible set: radius * u^{1/d} times a
// random lp-direction for balls, Dirichlet weights for polytopes.
std::vector<double> RandomFeasiblePoint(const FeasibleSet& set, int dim,
                                        Rng& rng);

}  // namespace dpfw

#endif  // DPFW_PROBLEMS_H_
