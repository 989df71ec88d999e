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

#ifndef DPFW_MECHANISMS_H_
#define DPFW_MECHANISMS_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace dpfw {

// Every sampler takes an explicit stream owned by the caller.
using Rng = std::mt19937_64;

// Generalized Gaussian GG_{||.||_r}(mu, sigma2): density proportional to
// exp(-||z - mu||_r^2 / (2 sigma2)). An empty mu means the origin.
// sigma2 = 0 is accepted and yields the point mass at mu (noise-free runs).
struct GGParams {
  int d = 1;
  double r = 2.0;
  double sigma2 = 1.0;
  std::vector<double> mu;
};

// Exact polar sampler: Z = mu + sigma * chi_d * X / ||X||_r where X has iid
// coordinates with density proportional to exp(-|t|^r). O(d) per draw.
std::vector<double> SampleGeneralizedGaussian(const GGParams& params, Rng& rng);

// Writes one draw into `out` (size d) without allocating.
void SampleGeneralizedGaussianInto(const GGParams& params, Rng& rng,
                                   std::span<double> out);

// E ||Z||_r^m = (2 sigma2)^{m/2} Gamma((m+d)/2) / Gamma(d/2).
double GgMomentExact(int m, int d, double sigma2);

// nu = sigma sqrt(d+2), the scale at which E exp(||Z||^2/nu^2) <= e.
double GgLightTailNu(int d, double sigma2);

// E exp(||Z||_r^2 / nu^2) = (nu^2 / (nu^2 - 2 sigma2))^{d/2}. Finite only for
// nu^2 > 2 sigma2; anything else is an error.
absl::StatusOr<double> GgExpSquareMoment(double nu, int d, double sigma2);

// One Laplace(0, scale) draw by inverse CDF. scale = 0 returns 0.
double SampleLaplace(double scale, Rng& rng);

struct NoisyMinResult {
  int index = 0;
  // <v_chosen, d> - min_v <v, d> measured on the noise-free scores.
  double suboptimality = 0.0;
};

// Report-noisy-min: argmin_k scores[k] + Lap(scale), lowest index on ties.
absl::StatusOr<NoisyMinResult> ReportNoisyMin(std::span<const double> scores,
                                              double scale, Rng& rng);

}  // namespace dpfw

#endif  // DPFW_MECHANISMS_H_
