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

#ifndef DPFW_GEOMETRY_H_
#define DPFW_GEOMETRY_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace dpfw {

// An lp exponent in [1, inf]. Infinity is a distinct state rather than a
// large finite value so that p=inf and p=1e300 never get confused.
class Exponent {
 public:
  static Exponent Finite(double value) { return Exponent(value, false); }
  static Exponent Infinity() { return Exponent(0.0, true); }

  bool is_infinite() const { return infinite_; }
  // Returns +inf for the infinite exponent.
  double value() const;

  bool operator==(const Exponent& other) const {
    return infinite_ == other.infinite_ &&
           (infinite_ || value_ == other.value_);
  }

  std::string ToString() const;

 private:
  Exponent(double value, bool infinite) : value_(value), infinite_(infinite) {}

  double value_;
  bool infinite_;
};

// Geometry of an lp setup with its kappa-regular dual.
struct SpaceSpec {
  Exponent p = Exponent::Finite(2.0);
  Exponent q = Exponent::Finite(2.0);
  int d = 1;
  // Regularity constant of the dual space (l_q, ||.||_q).
  double kappa = 1.0;
  // Exponent of the smooth norm ||.||_r used by the generalized Gaussian.
  double r = 2.0;
  // Smoothness constant of ||.||_r^2; always r - 1.
  double kappa_plus = 1.0;
};

// Regularity constants of the dual of a polyhedral norm with K vertices.
struct PolyhedralRegularityConstants {
  double kappa = 0.0;
  double smoothing_exponent = 0.0;
  double kappa_plus = 0.0;
};

// Convex hull of finitely many points. The diameter is measured in the
// ambient lp norm passed at construction.
class Polytope {
 public:
  // Fails on an empty vertex list, ragged or non-finite coordinates.
  static absl::StatusOr<Polytope> Create(
      std::vector<std::vector<double>> vertices,
      Exponent ambient = Exponent::Finite(1.0));

  // The 2d signed unit vectors {+e_1, ..., +e_d, -e_1, ..., -e_d}.
  static Polytope CrossPolytope(int d, double radius = 1.0);

  int size() const { return static_cast<int>(vertices_.size()); }
  int dim() const { return dim_; }
  double diameter() const { return diameter_; }
  Exponent ambient() const { return ambient_; }
  const std::vector<double>& vertex(int k) const { return vertices_[k]; }
  const std::vector<std::vector<double>>& vertices() const { return vertices_; }

 private:
  Polytope() = default;

  std::vector<std::vector<double>> vertices_;
  int dim_ = 0;
  double diameter_ = 0.0;
  Exponent ambient_ = Exponent::Finite(1.0);
};

// Conjugate exponent: 1/p + 1/q = 1, with 1 <-> inf.
absl::StatusOr<Exponent> DualExponent(Exponent p);

// Regularity data for the l_p setup with 1 < p <= 2 (dual q >= 2). All
// logarithms are natural. p = 1 is rejected; use the polyhedral path.
absl::StatusOr<SpaceSpec> Regularity(Exponent p, int d);

// kappa = 2e ln K for the dual of a polyhedral norm with K vertices. K must
// be an integer >= 2; it is taken as a double so that non-integral input
// coming from configuration files is rejected here.
absl::StatusOr<PolyhedralRegularityConstants> PolyhedralRegularity(
    double vertex_count);

// Overflow-safe lp norm. Fails on NaN entries.
absl::StatusOr<double> LpNorm(std::span<const double> x, Exponent p);

// Same as LpNorm with no input validation; for inner loops.
double LpNormUnchecked(std::span<const double> x, Exponent p);

// Gradient of ||x||_r^2, i.e. 2 ||x||_r^{2-r} |x_j|^{r-1} sign(x_j). The
// gradient at the origin is 0. Requires 2 <= r < inf.
std::vector<double> SmoothNormGradSq(std::span<const double> x, double r);

// argmin of <g, v> over the ball {||v||_p <= radius}. For p = 1 the
// minimizer is a signed coordinate vector at the lowest index attaining
// max |g_j|. g = 0 maps to 0. The attained value is -radius * ||g||_q.
std::vector<double> LmoLpBall(std::span<const double> g, Exponent p,
                              double radius);

struct PolytopeLmoResult {
  int index = 0;
  std::span<const double> vertex;
};

// Lowest-index vertex minimizing <g, v>.
absl::StatusOr<PolytopeLmoResult> LmoPolytope(std::span<const double> g,
                                              const Polytope& polytope);

// 1 - ((p-1)/8) ||x-y||_p^2 - ||(x+y)/2||_p for x, y in the unit ball.
// Nonnegative whenever 1 < p <= 2 (uniform convexity of lp).
absl::StatusOr<double> UniformConvexityGap(std::span<const double> x,
                                           std::span<const double> y,
                                           Exponent p);

// (l2 diameter inflation, Lipschitz factor) when passing from ||.||_p to
// ||.||_2 for p >= 2: (d^{1/2 - 1/p}, 1).
absl::StatusOr<std::pair<double, double>> NormConversionFactors(Exponent p,
                                                                int d);

double Dot(std::span<const double> a, std::span<const double> b);

}  // namespace dpfw

#endif  // DPFW_GEOMETRY_H_
