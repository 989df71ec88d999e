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

#ifndef DPFW_ESTIMATORS_H_
#define DPFW_ESTIMATORS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace dpfw {

// Per-sample gradients of one mini-batch stored row-major (count x dim).
class GradientBatch {
 public:
  explicit GradientBatch(int dim) : dim_(dim) {}

  void Append(std::span<const double> gradient);
  // Appends a zeroed row and returns it for in-place filling.
  std::span<double> AppendRow();
  void Clear() { values_.clear(); }

  int dim() const { return dim_; }
  int64_t count() const {
    return dim_ == 0 ? 0 : static_cast<int64_t>(values_.size()) / dim_;
  }
  std::span<const double> row(int64_t i) const {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
  }

 private:
  int dim_;
  std::vector<double> values_;
};

// Column means in row-index order; pairwise over rows once the batch holds
// more than 1e6 scalars. Bitwise reproducible for a given batch.
std::vector<double> BatchMean(const GradientBatch& batch);

struct EstimatorState {
  std::vector<double> current;
  int64_t step = 0;
  // Averaging factor in (1 - alpha)(prev + Delta) + alpha * fresh.
  double alpha = 1.0;
  int64_t consumed = 0;
};

// Recursive variance-reduced update
//   new = (1 - alpha)(old + mean(grad_new - grad_old)) + alpha mean(grad_new)
//         + noise.
// grad_new and grad_old must be evaluated on the same mini-batch at the new
// and previous iterate. alpha = 0 gives the pure path-integrated form used at
// the right children of the tree solver. An empty noise span means no noise.
absl::StatusOr<EstimatorState> SpiderUpdate(const EstimatorState& state,
                                            const GradientBatch& grad_new,
                                            const GradientBatch& grad_old,
                                            double alpha,
                                            std::span<const double> noise = {});

// C_beta = sqrt(e kappa) + sqrt(3 ln(2 T / beta)).
double BiasConfidenceConstant(double kappa, double horizon, double beta);

// Schedules for the high-probability bias bound of the recursive estimator.
// Index s refers to update s; batch_sizes[0] is the initial batch.
struct BiasBoundInputs {
  int t = 0;
  double horizon = 1.0;
  double alpha = 1.0;
  std::vector<double> eta;
  std::vector<double> batch_sizes;
  std::vector<double> nu;
  double L0 = 1.0;
  double L1 = 0.0;
  double M = 1.0;
  double kappa = 1.0;
  double beta = 0.05;
};

// C_beta [ (1-a)^t L0 / sqrt(B_0)
//          + (L1 M eta_t + a L0) sum_{s<t} (1-a)^{t-s-1} / sqrt(B_s)
//          + sum_{s<t} (1-a)^{t-s-1} nu_s ].
absl::StatusOr<double> BiasBound(const BiasBoundInputs& in);

struct MartingaleTail {
  double threshold = 0.0;
  double probability = 0.0;
};

// For a martingale-difference sequence in a kappa-regular space whose terms
// have sub-Gaussian scales psi_i:
//   P[ ||sum|| >= (sqrt(2 e kappa) + sqrt(2) tau) ||psi||_2 ] <= 2
//   e^{-tau^2/3}.
absl::StatusOr<MartingaleTail> MartingaleTailBound(double kappa,
                                                   std::span<const double> psi,
                                                   double tau);

struct BiasTraceEntry {
  int64_t step = 0;
  // Dual-norm distance between the estimate and the population gradient.
  double gap = 0.0;
  // The matching high-probability bound (0 when not evaluated).
  double bound = 0.0;
};

struct BiasTrace {
  std::vector<BiasTraceEntry> entries;
  double beta = 0.05;

  double MaxGap() const;
};

}  // namespace dpfw

#endif  // DPFW_ESTIMATORS_H_
