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

#include "dpfw/accounting.h"

#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace dpfw {

absl::StatusOr<PrivacyBudget> PrivacyBudget::Create(double eps, double delta) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps must be positive and finite, got %g", eps));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  return PrivacyBudget(eps, delta);
}

absl::StatusOr<RdpPoint> GgRdp(double alpha, double sensitivity, double sigma2,
                               double kappa) {
  if (!(alpha > 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("invalid Renyi order alpha=%g: must exceed 1", alpha));
  }
  if (!(sigma2 > 0.0)) {
    return absl::InvalidArgumentError("GG variance must be positive");
  }
  if (sensitivity < 0.0 || kappa < 1.0) {
    return absl::InvalidArgumentError(
        "sensitivity must be >= 0 and kappa >= 1");
  }
  const double rho = kappa * alpha * alpha * sensitivity * sensitivity /
                     (2.0 * sigma2 * (alpha - 1.0));
  return RdpPoint{alpha, rho};
}

double GgCalibrate(double sensitivity, double kappa,
                   const PrivacyBudget& budget) {
  return 2.0 * kappa * std::log(1.0 / budget.delta()) * sensitivity *
         sensitivity / (budget.eps() * budget.eps());
}

double RdpToDp(const RdpPoint& point, double delta) {
  return point.rho + std::log(1.0 / delta) / (point.alpha - 1.0);
}

std::vector<double> RdpAlphaGrid() {
  constexpr int kPoints = 200;
  const double log_max = std::log(1000.0);
  std::vector<double> grid;
  grid.reserve(kPoints);
  for (int i = 1; i <= kPoints; ++i) {
    grid.push_back(std::exp(log_max * i / kPoints));
  }
  return grid;
}

OptimizedEpsilon OptimalRdpToDp(
    const std::function<double(double)>& rho_of_alpha, double delta) {
  OptimizedEpsilon best{std::numeric_limits<double>::infinity(), 0.0};
  for (double alpha : RdpAlphaGrid()) {
    const double eps = RdpToDp(RdpPoint{alpha, rho_of_alpha(alpha)}, delta);
    if (eps < best.eps) best = {eps, alpha};
  }
  return best;
}

absl::StatusOr<ComposedBudget> AdvancedComposition(double eps_step,
                                                   double delta_step, int k,
                                                   double delta_slack) {
  if (eps_step < 0.0 || !(delta_step >= 0.0 && delta_step < 1.0) ||
      !(delta_slack > 0.0 && delta_slack < 1.0) || k < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid composition parameters eps=%g delta=%g k=%d delta'=%g",
        eps_step, delta_step, k, delta_slack));
  }
  ComposedBudget out;
  out.eps = eps_step * std::sqrt(2.0 * k * std::log(1.0 / delta_slack)) +
            k * eps_step * std::expm1(eps_step);
  out.delta = k * delta_step + delta_slack;
  return out;
}

}  // namespace dpfw
