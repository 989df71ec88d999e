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

#include "dpfw/renyi_quadrature.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "boost/math/quadrature/gauss_kronrod.hpp"

namespace dpfw {
namespace {

constexpr int kGridNodes = 2001;
constexpr double kTailSigmas = 12.0;

double NormPow(double a, double b, double r) {
  return std::pow(std::pow(std::abs(a), r) + std::pow(std::abs(b), r), 1.0 / r);
}

}  // namespace

double GaussianRenyiDivergence(double alpha, double mu_norm_sq, double sigma2) {
  return alpha * mu_norm_sq / (2.0 * sigma2);
}

double NumericRenyiDivergence1D(double alpha, double mu, double sigma2,
                                double kappa) {
  using boost::math::quadrature::gauss_kronrod;
  const double sigma = std::sqrt(sigma2);
  const double lo =
      -alpha * std::abs(mu) - kTailSigmas * sigma * std::sqrt(kappa);
  const double hi =
      alpha * std::abs(mu) + kTailSigmas * sigma * std::sqrt(kappa);
  // exponent of p^alpha q^{1-alpha}
  auto tilted = [&](double z) {
    const double a = (z - mu) * (z - mu);
    const double b = z * z;
    return std::exp(-(alpha * a - (alpha - 1.0) * b) / (2.0 * sigma2));
  };
  auto base = [&](double z) { return std::exp(-z * z / (2.0 * sigma2)); };
  const double numerator =
      gauss_kronrod<double, 61>::integrate(tilted, lo, hi, 20, 1e-14);
  const double normalizer =
      gauss_kronrod<double, 61>::integrate(base, lo, hi, 20, 1e-14);
  return std::log(numerator / normalizer) / (alpha - 1.0);
}

double NumericRenyiDivergence2D(double alpha, std::array<double, 2> mu,
                                double r, double sigma2) {
  const double sigma = std::sqrt(sigma2);
  const double reach =
      alpha * std::max(std::abs(mu[0]), std::abs(mu[1])) + kTailSigmas * sigma;
  const double h = 2.0 * reach / (kGridNodes - 1);
  std::vector<double> axis(kGridNodes), weight(kGridNodes, h);
  for (int i = 0; i < kGridNodes; ++i) axis[i] = -reach + i * h;
  weight.front() = weight.back() = 0.5 * h;

  double numerator = 0.0;
  double normalizer = 0.0;
  const double inv = 1.0 / (2.0 * sigma2);
  for (int i = 0; i < kGridNodes; ++i) {
    double row_num = 0.0;
    double row_norm = 0.0;
    for (int j = 0; j < kGridNodes; ++j) {
      const double z1 = axis[i];
      const double z2 = axis[j];
      const double shifted = NormPow(z1 - mu[0], z2 - mu[1], r);
      const double centered = NormPow(z1, z2, r);
      const double s2 = shifted * shifted;
      const double c2 = centered * centered;
      row_num += weight[j] * std::exp(-(alpha * s2 - (alpha - 1.0) * c2) * inv);
      row_norm += weight[j] * std::exp(-c2 * inv);
    }
    numerator += weight[i] * row_num;
    normalizer += weight[i] * row_norm;
  }
  return std::log(numerator / normalizer) / (alpha - 1.0);
}

}  // namespace dpfw
