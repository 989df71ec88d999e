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

#ifndef DPFW_RENYI_QUADRATURE_H_
#define DPFW_RENYI_QUADRATURE_H_

#include <array>

namespace dpfw {

// Numerical Renyi divergence D_alpha(GG(mu, sigma2) || GG(0, sigma2)) for GG
// distributions built on ||.||_r. Both integrals (the tilted numerator and
// the normalizer) are evaluated numerically so no surface-measure constant is
// needed.

// d = 1: every lr norm is |.|. Adaptive Gauss-Kronrod on
// [-(alpha |mu| + 12 sigma sqrt(kappa)), alpha |mu| + 12 sigma sqrt(kappa)].
double NumericRenyiDivergence1D(double alpha, double mu, double sigma2,
                                double kappa);

// d = 2: tensor-product trapezoid rule on a 2001 x 2001 grid.
double NumericRenyiDivergence2D(double alpha, std::array<double, 2> mu,
                                double r, double sigma2);

// Closed form alpha mu^2 / (2 sigma2) for Gaussians.
double GaussianRenyiDivergence(double alpha, double mu_norm_sq, double sigma2);

}  // namespace dpfw

#endif  // DPFW_RENYI_QUADRATURE_H_
