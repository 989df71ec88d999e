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

#ifndef DPFW_ACCOUNTING_H_
#define DPFW_ACCOUNTING_H_

#include <functional>
#include <vector>

#include "absl/status/statusor.h"

namespace dpfw {

class PrivacyBudget {
 public:
  // eps > 0 and 0 < delta < 1.
  static absl::StatusOr<PrivacyBudget> Create(double eps, double delta);

  double eps() const { return eps_; }
  double delta() const { return delta_; }

 private:
  PrivacyBudget(double eps, double delta) : eps_(eps), delta_(delta) {}

  double eps_;
  double delta_;
};

// (alpha, rho)-RDP guarantee. alpha here is the Renyi order, unrelated to the
// estimator averaging factor.
struct RdpPoint {
  double alpha = 2.0;
  double rho = 0.0;
};

// rho = kappa alpha^2 s^2 / (2 sigma2 (alpha - 1)) for the GG mechanism with
// dual-norm sensitivity s.
absl::StatusOr<RdpPoint> GgRdp(double alpha, double sensitivity, double sigma2,
                               double kappa);

// sigma2 = 2 kappa ln(1/delta) s^2 / eps^2.
double GgCalibrate(double sensitivity, double kappa,
                   const PrivacyBudget& budget);

// Standard RDP to (eps, delta) conversion: eps = rho + ln(1/delta) / (alpha -
// 1).
double RdpToDp(const RdpPoint& point, double delta);

// 200 log-spaced Renyi orders in (1, 1000].
std::vector<double> RdpAlphaGrid();

struct OptimizedEpsilon {
  double eps = 0.0;
  double alpha = 0.0;
};

// Minimum of RdpToDp over RdpAlphaGrid() for an order-dependent curve.
OptimizedEpsilon OptimalRdpToDp(
    const std::function<double(double)>& rho_of_alpha, double delta);

struct ComposedBudget {
  double eps = 0.0;
  double delta = 0.0;
};

// k-fold advanced composition:
// (eps sqrt(2k ln(1/delta')) + k eps (e^eps - 1), k delta + delta').
absl::StatusOr<ComposedBudget> AdvancedComposition(double eps_step,
                                                   double delta_step, int k,
                                                   double delta_slack);

}  // namespace dpfw

#endif  // DPFW_ACCOUNTING_H_
