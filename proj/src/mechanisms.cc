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

#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "dpfw/geometry.h"

namespace dpfw {

void SampleGeneralizedGaussianInto(const GGParams& params, Rng& rng,
                                   std::span<double> out) {
  const int d = params.d;
  if (params.sigma2 > 0.0) {
    // Angular part: X / ||X||_r, X_j = sign * Gamma(1/r)^{1/r}.
    std::gamma_distribution<double> coord_gamma(1.0 / params.r, 1.0);
    std::bernoulli_distribution coin(0.5);
    double norm = 0.0;
    do {
      for (int j = 0; j < d; ++j) {
        const double magnitude = std::pow(coord_gamma(rng), 1.0 / params.r);
        out[j] = coin(rng) ? magnitude : -magnitude;
      }
      norm = LpNormUnchecked(out.first(d), Exponent::Finite(params.r));
    } while (norm == 0.0);
    // Radial part: sigma * chi_d, chi_d^2 = 2 Gamma(d/2).
    std::gamma_distribution<double> radial_gamma(0.5 * d, 1.0);
    const double radius =
        std::sqrt(params.sigma2) * std::sqrt(2.0 * radial_gamma(rng));
    const double scale = radius / norm;
    for (int j = 0; j < d; ++j) out[j] *= scale;
  } else {
    for (int j = 0; j < d; ++j) out[j] = 0.0;
  }
  if (!params.mu.empty()) {
    for (int j = 0; j < d; ++j) out[j] += params.mu[j];
  }
}

std::vector<double> SampleGeneralizedGaussian(const GGParams& params,
                                              Rng& rng) {
  std::vector<double> out(params.d);
  SampleGeneralizedGaussianInto(params, rng, out);
  return out;
}

double GgMomentExact(int m, int d, double sigma2) {
  if (sigma2 == 0.0) return 0.0;
  return std::exp(0.5 * m * std::log(2.0 * sigma2) +
                  std::lgamma(0.5 * (m + d)) - std::lgamma(0.5 * d));
}

double GgLightTailNu(int d, double sigma2) {
  return std::sqrt(sigma2 * (d + 2.0));
}

absl::StatusOr<double> GgExpSquareMoment(double nu, int d, double sigma2) {
  const double nu2 = nu * nu;
  if (!(nu2 > 2.0 * sigma2)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "exponential square moment diverges: need nu^2 > 2 sigma2 "
        "(nu^2=%g, sigma2=%g)",
        nu2, sigma2));
  }
  return std::pow(nu2 / (nu2 - 2.0 * sigma2), 0.5 * d);
}

double SampleLaplace(double scale, Rng& rng) {
  if (scale == 0.0) return 0.0;
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  double u = 0.0;
  double tail = 0.0;
  do {
    u = uniform(rng);
    tail = 1.0 - 2.0 * std::abs(u);
  } while (tail <= 0.0);
  const double magnitude = -scale * std::log(tail);
  return u < 0.0 ? -magnitude : magnitude;
}

absl::StatusOr<NoisyMinResult> ReportNoisyMin(std::span<const double> scores,
                                              double scale, Rng& rng) {
  if (scores.empty()) {
    return absl::InvalidArgumentError("report-noisy-min needs >= 1 score");
  }
  int best = 0;
  double best_noisy = std::numeric_limits<double>::infinity();
  double true_min = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < scores.size(); ++k) {
    const double noisy = scores[k] + SampleLaplace(scale, rng);
    if (noisy < best_noisy) {
      best_noisy = noisy;
      best = static_cast<int>(k);
    }
    true_min = std::min(true_min, scores[k]);
  }
  return NoisyMinResult{best, scores[best] - true_min};
}

}  // namespace dpfw
