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

#include "dpfw/estimators.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace dpfw {
namespace {

constexpr int64_t kPairwiseThreshold = 1000000;
constexpr int64_t kPairwiseLeaf = 128;

void SumRows(const GradientBatch& batch, int64_t lo, int64_t hi,
             std::vector<double>& acc) {
  if (hi - lo <= kPairwiseLeaf) {
    for (int64_t i = lo; i < hi; ++i) {
      const auto row = batch.row(i);
      for (int j = 0; j < batch.dim(); ++j) acc[j] += row[j];
    }
    return;
  }
  const int64_t mid = lo + (hi - lo) / 2;
  std::vector<double> right(batch.dim(), 0.0);
  SumRows(batch, lo, mid, acc);
  SumRows(batch, mid, hi, right);
  for (int j = 0; j < batch.dim(); ++j) acc[j] += right[j];
}

}  // namespace

void GradientBatch::Append(std::span<const double> gradient) {
  values_.insert(values_.end(), gradient.begin(), gradient.end());
}

std::span<double> GradientBatch::AppendRow() {
  values_.resize(values_.size() + dim_, 0.0);
  return std::span<double>(values_).subspan(values_.size() - dim_, dim_);
}

std::vector<double> BatchMean(const GradientBatch& batch) {
  std::vector<double> mean(batch.dim(), 0.0);
  const int64_t count = batch.count();
  if (count == 0) return mean;
  if (count * batch.dim() > kPairwiseThreshold) {
    SumRows(batch, 0, count, mean);
  } else {
    for (int64_t i = 0; i < count; ++i) {
      const auto row = batch.row(i);
      for (int j = 0; j < batch.dim(); ++j) mean[j] += row[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : mean) v *= inv;
  return mean;
}

absl::StatusOr<EstimatorState> SpiderUpdate(const EstimatorState& state,
                                            const GradientBatch& grad_new,
                                            const GradientBatch& grad_old,
                                            double alpha,
                                            std::span<const double> noise) {
  const int dim = grad_new.dim();
  if (grad_new.count() != grad_old.count() || grad_old.dim() != dim) {
    return absl::InvalidArgumentError(
        absl::StrFormat("batch mismatch: %d new vs %d old gradients",
                        grad_new.count(), grad_old.count()));
  }
  if (grad_new.count() == 0) {
    return absl::InvalidArgumentError("empty mini-batch");
  }
  if (static_cast<int>(state.current.size()) != dim ||
      (!noise.empty() && static_cast<int>(noise.size()) != dim)) {
    return absl::InvalidArgumentError("estimate/noise dimension mismatch");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("averaging factor must lie in [0, 1], got %g", alpha));
  }
  const std::vector<double> mean_new = BatchMean(grad_new);
  const std::vector<double> mean_old = BatchMean(grad_old);
  EstimatorState next;
  next.current.resize(dim);
  next.step = state.step + 1;
  next.alpha = alpha;
  next.consumed = state.consumed + grad_new.count();
  for (int j = 0; j < dim; ++j) {
    const double delta = mean_new[j] - mean_old[j];
    double value =
        (1.0 - alpha) * (state.current[j] + delta) + alpha * mean_new[j];
    if (!noise.empty()) value += noise[j];
    next.current[j] = value;
  }
  return next;
}

double BiasConfidenceConstant(double kappa, double horizon, double beta) {
  return std::sqrt(std::numbers::e * kappa) +
         std::sqrt(3.0 * std::log(2.0 * horizon / beta));
}

absl::StatusOr<double> BiasBound(const BiasBoundInputs& in) {
  if (in.t < 0) return absl::InvalidArgumentError("step must be >= 0");
  if (!(in.beta > 0.0 && in.beta < 1.0)) {
    return absl::InvalidArgumentError("beta must lie in (0, 1)");
  }
  if (in.batch_sizes.size() < static_cast<size_t>(std::max(in.t, 1)) ||
      in.nu.size() < static_cast<size_t>(in.t)) {
    return absl::InvalidArgumentError(
        "schedules shorter than the requested step");
  }
  if (in.L1 > 0.0 && in.eta.size() <= static_cast<size_t>(in.t)) {
    return absl::InvalidArgumentError("step-size schedule too short");
  }
  const double decay = 1.0 - in.alpha;
  const double eta_t =
      in.eta.size() > static_cast<size_t>(in.t) ? in.eta[in.t] : 0.0;
  double batch_sum = 0.0;
  double noise_sum = 0.0;
  for (int s = 0; s < in.t; ++s) {
    const double w = std::pow(decay, in.t - s - 1);
    batch_sum += w / std::sqrt(in.batch_sizes[s]);
    noise_sum += w * in.nu[s];
  }
  const double bracket =
      std::pow(decay, in.t) * in.L0 / std::sqrt(in.batch_sizes[0]) +
      (in.L1 * in.M * eta_t + in.alpha * in.L0) * batch_sum + noise_sum;
  return BiasConfidenceConstant(in.kappa, in.horizon, in.beta) * bracket;
}

absl::StatusOr<MartingaleTail> MartingaleTailBound(double kappa,
                                                   std::span<const double> psi,
                                                   double tau) {
  if (tau < 0.0) return absl::InvalidArgumentError("tau must be >= 0");
  double sum_sq = 0.0;
  for (double v : psi) {
    if (!(v > 0.0)) {
      return absl::InvalidArgumentError("martingale scales must be positive");
    }
    sum_sq += v * v;
  }
  MartingaleTail out;
  out.threshold =
      (std::sqrt(2.0 * std::numbers::e * kappa) + std::numbers::sqrt2 * tau) *
      std::sqrt(sum_sq);
  out.probability = 2.0 * std::exp(-tau * tau / 3.0);
  return out;
}

double BiasTrace::MaxGap() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.gap);
  return m;
}

}  // namespace dpfw
