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

#include "dpfw/problems.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_format.h"

namespace dpfw {
namespace {

constexpr double kExcessRiskTolerance = 1e-12;
constexpr double kSampleBoundSlack = 1e-12;
constexpr int kReferenceIterations = 200000;
constexpr double kReferenceGapTarget = 1e-13;

// d^{-1/q}; 1 for q = inf.
double CubeScale(int d, Exponent q) {
  if (q.is_infinite()) return 1.0;
  return std::pow(static_cast<double>(d), -1.0 / q.value());
}

absl::Status CheckBias(std::span<const double> bias) {
  for (double b : bias) {
    if (!(b >= -1.0 && b <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("bias %g outside [-1, 1]", b));
    }
  }
  return absl::OkStatus();
}

absl::Status CheckSet(const FeasibleSet& set) {
  if (const auto* ball = std::get_if<LpBall>(&set)) {
    if (!(ball->radius > 0.0) || !std::isfinite(ball->radius)) {
      return absl::InvalidArgumentError("ball radius must be positive");
    }
    if (!ball->p.is_infinite() && !(ball->p.value() >= 1.0)) {
      return absl::InvalidArgumentError("ball exponent must lie in [1, inf]");
    }
  }
  return absl::OkStatus();
}

}  // namespace

double Diameter(const FeasibleSet& set) {
  if (const auto* ball = std::get_if<LpBall>(&set)) return 2.0 * ball->radius;
  return std::get<Polytope>(set).diameter();
}

Exponent PrimalExponent(const FeasibleSet& set) {
  if (const auto* ball = std::get_if<LpBall>(&set)) return ball->p;
  return std::get<Polytope>(set).ambient();
}

double MaxNorm(const FeasibleSet& set) {
  if (const auto* ball = std::get_if<LpBall>(&set)) return ball->radius;
  const Polytope& poly = std::get<Polytope>(set);
  double r = 0.0;
  for (const auto& v : poly.vertices()) {
    r = std::max(r, LpNormUnchecked(v, poly.ambient()));
  }
  return r;
}

int SetDimension(const FeasibleSet& set) {
  if (std::holds_alternative<LpBall>(set)) return -1;
  return std::get<Polytope>(set).dim();
}

LmoResult Lmo(std::span<const double> g, const FeasibleSet& set) {
  if (const auto* ball = std::get_if<LpBall>(&set)) {
    return LmoResult{LmoLpBall(g, ball->p, ball->radius), -1};
  }
  const Polytope& poly = std::get<Polytope>(set);
  int best = 0;
  double best_value = Dot(g, poly.vertex(0));
  for (int k = 1; k < poly.size(); ++k) {
    const double value = Dot(g, poly.vertex(k));
    if (value < best_value) {
      best = k;
      best_value = value;
    }
  }
  return LmoResult{poly.vertex(best), best};
}

bool InBall(std::span<const double> x, const LpBall& ball, double tol) {
  return LpNormUnchecked(x, ball.p) <= ball.radius + tol;
}

void SampleCubeInto(std::span<const double> bias, double scale, Rng& rng,
                    std::span<double> out) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (size_t j = 0; j < bias.size(); ++j) {
    // P(+) = (1 + b)/2; the comparison is strict so bias = -1 never fires.
    out[j] = unif(rng) < 0.5 * (1.0 + bias[j]) ? scale : -scale;
  }
}

absl::StatusOr<std::vector<double>> CubeDistributionSample(
    std::span<const double> bias, Exponent q, Rng& rng) {
  if (absl::Status s = CheckBias(bias); !s.ok()) return s;
  std::vector<double> z(bias.size());
  SampleCubeInto(bias, CubeScale(static_cast<int>(bias.size()), q), rng, z);
  return z;
}

std::vector<double> LinearLossGrad(std::span<const double> /*x*/,
                                   std::span<const double> z) {
  std::vector<double> g(z.size());
  for (size_t j = 0; j < z.size(); ++j) g[j] = -z[j];
  return g;
}

absl::StatusOr<std::vector<double>> LeastSquaresGrad(std::span<const double> x,
                                                     std::span<const double> a,
                                                     double b, Exponent q,
                                                     double feature_bound,
                                                     double label_bound) {
  if (x.size() != a.size()) {
    return absl::InvalidArgumentError("dimension mismatch");
  }
  const double norm = LpNormUnchecked(a, q);
  if (norm > feature_bound * (1.0 + kSampleBoundSlack)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("invalid sample: ||a||_q = %g exceeds feature bound %g",
                        norm, feature_bound));
  }
  if (std::abs(b) > label_bound * (1.0 + kSampleBoundSlack)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("invalid sample: |b| = %g exceeds label bound %g",
                        std::abs(b), label_bound));
  }
  const double residual = Dot(a, x) - b;
  std::vector<double> g(a.size());
  for (size_t j = 0; j < a.size(); ++j) g[j] = a[j] * residual;
  return g;
}

absl::StatusOr<ClosedFormMinimum> ClosedFormMinimizer(
    std::span<const double> z_bar, Exponent p, double radius) {
  if (p.is_infinite() || !(p.value() > 1.0 && p.value() <= 2.0)) {
    return absl::InvalidArgumentError("closed form needs 1 < p <= 2");
  }
  ClosedFormMinimum out;
  out.x_star.assign(z_bar.size(), 0.0);
  const Exponent q = *DualExponent(p);
  const double zq = LpNormUnchecked(z_bar, q);
  if (zq == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double qv = q.value();
  for (size_t j = 0; j < z_bar.size(); ++j) {
    if (z_bar[j] == 0.0) continue;
    const double mag = std::pow(std::abs(z_bar[j]) / zq, qv - 1.0);
    out.x_star[j] = radius * (z_bar[j] > 0.0 ? mag : -mag);
  }
  out.value = -radius * zq;
  return out;
}

absl::StatusOr<double> RiskToDistanceBound(double alpha_gap, Exponent p,
                                           double z_bar_q_norm) {
  if (!(alpha_gap >= 0.0)) {
    return absl::InvalidArgumentError("excess risk must be nonnegative");
  }
  if (p.is_infinite() || !(p.value() > 1.0 && p.value() <= 2.0)) {
    return absl::InvalidArgumentError("distance bound needs 1 < p <= 2");
  }
  if (!(z_bar_q_norm > 0.0)) {
    return absl::InvalidArgumentError("||z_bar||_q must be positive");
  }
  return std::sqrt(8.0 * alpha_gap / ((p.value() - 1.0) * z_bar_q_norm));
}

absl::StatusOr<Problem> Problem::Linear(FeasibleSet set,
                                        std::vector<double> bias) {
  if (absl::Status s = CheckSet(set); !s.ok()) return s;
  if (absl::Status s = CheckBias(bias); !s.ok()) return s;
  Problem out;
  out.kind_ = LossKind::kLinear;
  out.set_ = std::move(set);
  out.bias_ = std::move(bias);
  if (absl::Status s = out.Finish(); !s.ok()) return s;
  return out;
}

absl::StatusOr<Problem> Problem::LeastSquares(FeasibleSet set,
                                              LeastSquaresSpec spec) {
  if (absl::Status s = CheckSet(set); !s.ok()) return s;
  if (absl::Status s = CheckBias(spec.feature_bias); !s.ok()) return s;
  if (spec.weights.size() != spec.feature_bias.size()) {
    return absl::InvalidArgumentError(
        "weights and feature bias differ in size");
  }
  if (!(spec.feature_bound > 0.0) || !(spec.label_noise >= 0.0)) {
    return absl::InvalidArgumentError(
        "feature bound must be positive and label noise nonnegative");
  }
  Problem out;
  out.kind_ = LossKind::kLeastSquares;
  out.set_ = std::move(set);
  out.bias_ = std::move(spec.feature_bias);
  out.weights_ = std::move(spec.weights);
  out.label_noise_ = spec.label_noise;
  out.l1_ = spec.feature_bound * spec.feature_bound;
  if (absl::Status s = out.Finish(); !s.ok()) return s;
  return out;
}

absl::Status Problem::Finish() {
  dim_ = static_cast<int>(bias_.size());
  if (dim_ < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  const int set_dim = SetDimension(set_);
  if (set_dim >= 0 && set_dim != dim_) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "polytope dimension %d does not match problem dimension %d", set_dim,
        dim_));
  }
  p_ = PrimalExponent(set_);
  absl::StatusOr<Exponent> q = DualExponent(p_);
  if (!q.ok()) return q.status();
  q_ = *q;
  m_ = Diameter(set_);
  const double unit = CubeScale(dim_, q_);

  if (kind_ == LossKind::kLinear) {
    cube_scale_ = unit;
    l0_ = 1.0;  // ||z||_q = d^{1/q} d^{-1/q}.
    l1_ = 0.0;
    std::vector<double> mean(dim_);
    for (int j = 0; j < dim_; ++j) mean[j] = bias_[j] * cube_scale_;
    // -<x, Ez> is minimized by the LMO at -(-Ez) direction, i.e. lmo(-Ez).
    std::vector<double> neg(dim_);
    for (int j = 0; j < dim_; ++j) neg[j] = -mean[j];
    optimum_point_ = Lmo(neg, set_).point;
    optimum_ = -Dot(optimum_point_, mean);
    analytic_minimizer_ = true;
    return absl::OkStatus();
  }

  const double a_bound = std::sqrt(l1_);
  cube_scale_ = a_bound * unit;
  label_bound_ = a_bound * LpNormUnchecked(weights_, p_) + label_noise_;
  const double reach = std::max(m_, MaxNorm(set_));
  l0_ = a_bound * (a_bound * reach + label_bound_);
  sigma_.assign(static_cast<size_t>(dim_) * dim_, 0.0);
  const double c2 = cube_scale_ * cube_scale_;
  for (int j = 0; j < dim_; ++j) {
    for (int k = 0; k < dim_; ++k) {
      sigma_[j * dim_ + k] = j == k ? c2 : c2 * bias_[j] * bias_[k];
    }
  }
  const double floor_value = label_noise_ * label_noise_ / 6.0;
  if (const auto* ball = std::get_if<LpBall>(&set_);
      ball != nullptr && InBall(weights_, *ball, 0.0)) {
    optimum_point_ = weights_;
    optimum_ = floor_value;
    analytic_minimizer_ = true;
    return absl::OkStatus();
  }

  // Frank-Wolfe with exact line search on the quadratic; F(x) - gap(x) is a
  // valid lower bound at every iterate, so keep the best one.
  std::vector<double> x = Lmo(std::vector<double>(dim_, 0.0), set_).point;
  std::vector<double> best_x = x;
  double best_value = PopulationRisk(x);
  double lower = floor_value;
  std::vector<double> g(dim_), dir(dim_), sdir(dim_);
  for (int it = 0; it < kReferenceIterations; ++it) {
    for (int j = 0; j < dim_; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) {
        s += sigma_[j * dim_ + k] * (x[k] - weights_[k]);
      }
      g[j] = s;
    }
    const std::vector<double> v = Lmo(g, set_).point;
    for (int j = 0; j < dim_; ++j) dir[j] = v[j] - x[j];
    const double gap = -Dot(g, dir);
    const double value = PopulationRisk(x);
    lower = std::max(lower, value - gap);
    if (value < best_value) {
      best_value = value;
      best_x = x;
    }
    if (gap <= kReferenceGapTarget) break;
    for (int j = 0; j < dim_; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += sigma_[j * dim_ + k] * dir[k];
      sdir[j] = s;
    }
    const double curvature = Dot(dir, sdir);
    const double step = curvature > 0.0 ? std::min(1.0, gap / curvature) : 1.0;
    for (int j = 0; j < dim_; ++j) x[j] += step * dir[j];
  }
  optimum_point_ = best_x;
  optimum_ = std::min(lower, best_value);
  analytic_minimizer_ = false;
  return absl::OkStatus();
}

double Problem::Loss(std::span<const double> x,
                     std::span<const double> sample) const {
  if (kind_ == LossKind::kLinear) return -Dot(x, sample);
  const double residual = Dot(x, sample.first(dim_)) - sample[dim_];
  return 0.5 * residual * residual;
}

void Problem::Gradient(std::span<const double> x,
                       std::span<const double> sample,
                       std::span<double> out) const {
  if (kind_ == LossKind::kLinear) {
    for (int j = 0; j < dim_; ++j) out[j] = -sample[j];
    return;
  }
  const double residual = Dot(x, sample.first(dim_)) - sample[dim_];
  for (int j = 0; j < dim_; ++j) out[j] = sample[j] * residual;
}

double Problem::PopulationRisk(std::span<const double> x) const {
  if (kind_ == LossKind::kLinear) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += x[j] * bias_[j];
    return -cube_scale_ * s;
  }
  double quad = 0.0;
  for (int j = 0; j < dim_; ++j) {
    double row = 0.0;
    for (int k = 0; k < dim_; ++k) {
      row += sigma_[j * dim_ + k] * (x[k] - weights_[k]);
    }
    quad += (x[j] - weights_[j]) * row;
  }
  return 0.5 * quad + label_noise_ * label_noise_ / 6.0;
}

std::vector<double> Problem::PopulationGradient(
    std::span<const double> x) const {
  std::vector<double> g(dim_);
  if (kind_ == LossKind::kLinear) {
    for (int j = 0; j < dim_; ++j) g[j] = -bias_[j] * cube_scale_;
    return g;
  }
  for (int j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) {
      s += sigma_[j * dim_ + k] * (x[k] - weights_[k]);
    }
    g[j] = s;
  }
  return g;
}

double Problem::EmpiricalRisk(std::span<const double> x,
                              const Dataset& data) const {
  if (data.n() == 0) return 0.0;
  double s = 0.0;
  for (int64_t i = 0; i < data.n(); ++i) s += Loss(x, data.row(i));
  return s / static_cast<double>(data.n());
}

absl::StatusOr<double> Problem::ExcessRisk(std::span<const double> x) const {
  const double gap = PopulationRisk(x) - optimum_;
  if (!std::isfinite(gap)) {
    return absl::InternalError("non-finite population risk");
  }
  if (gap < -kExcessRiskTolerance) {
    return absl::InternalError(absl::StrFormat(
        "excess risk %g is negative: minimizer oracle is inconsistent", gap));
  }
  return std::max(gap, 0.0);
}

absl::Status Problem::ValidateSample(std::span<const double> sample) const {
  if (static_cast<int>(sample.size()) != sample_width()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sample width %d, expected %d", sample.size(), sample_width()));
  }
  for (double v : sample) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("invalid sample: non-finite entry");
    }
  }
  const auto features = sample.first(dim_);
  const double bound = kind_ == LossKind::kLinear ? l0_ : std::sqrt(l1_);
  const double norm = LpNormUnchecked(features, q_);
  if (norm > bound * (1.0 + kSampleBoundSlack)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid sample: dual norm %g exceeds bound %g", norm, bound));
  }
  if (kind_ == LossKind::kLeastSquares &&
      std::abs(sample[dim_]) > label_bound_ * (1.0 + kSampleBoundSlack)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("invalid sample: label %g exceeds bound %g",
                        sample[dim_], label_bound_));
  }
  return absl::OkStatus();
}

absl::Status Problem::ValidateDataset(const Dataset& data) const {
  if (data.width() != sample_width()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "dataset width %d, expected %d", data.width(), sample_width()));
  }
  for (int64_t i = 0; i < data.n(); ++i) {
    if (absl::Status s = ValidateSample(data.row(i)); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("row %d: %s", i, s.message()));
    }
  }
  return absl::OkStatus();
}

Dataset Problem::Sample(int64_t n, Rng& rng) const {
  Dataset data(n, sample_width());
  std::uniform_real_distribution<double> noise(-label_noise_, label_noise_);
  for (int64_t i = 0; i < n; ++i) {
    std::span<double> row = data.mutable_row(i);
    SampleCubeInto(bias_, cube_scale_, rng, row.first(dim_));
    if (kind_ == LossKind::kLeastSquares) {
      const double u = label_noise_ > 0.0 ? noise(rng) : 0.0;
      row[dim_] = Dot(row.first(dim_), weights_) + u;
    }
  }
  return data;
}

std::vector<double> RandomFeasiblePoint(const FeasibleSet& set, int dim,
                                        Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (const auto* ball = std::get_if<LpBall>(&set)) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(dim);
    for (double& v : x) v = normal(rng);
    const double norm = LpNormUnchecked(x, ball->p);
    if (norm == 0.0) return std::vector<double>(dim, 0.0);
    const double scale = ball->radius *
                         std::pow(unif(rng), 1.0 / static_cast<double>(dim)) /
                         norm;
    for (double& v : x) v *= scale;
    return x;
  }
  const Polytope& poly = std::get<Polytope>(set);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(poly.size());
  double total = 0.0;
  for (double& v : w) total += (v = expo(rng));
  std::vector<double> x(poly.dim(), 0.0);
  for (int k = 0; k < poly.size(); ++k) {
    for (int j = 0; j < poly.dim(); ++j) {
      x[j] += w[k] / total * poly.vertex(k)[j];
    }
  }
  return x;
}

LipschitzCertificate CertifyConstants(const Problem& problem,
                                      const Dataset& data, int pairs,
                                      Rng& rng) {
  LipschitzCertificate cert;
  const int d = problem.dim();
  std::vector<double> gx(d), gy(d), diff(d), gdiff(d);
  Dataset fresh;
  const Dataset* source = &data;
  if (data.n() == 0) {
    fresh = problem.Sample(pairs, rng);
    source = &fresh;
  }
  std::uniform_int_distribution<int64_t> pick(0, source->n() - 1);
  for (int i = 0; i < pairs; ++i) {
    const std::vector<double> x = RandomFeasiblePoint(problem.set(), d, rng);
    const std::vector<double> y = RandomFeasiblePoint(problem.set(), d, rng);
    const auto z = source->row(pick(rng));
    for (int j = 0; j < d; ++j) diff[j] = x[j] - y[j];
    const double dist = LpNormUnchecked(diff, problem.p());
    if (dist == 0.0) continue;
    cert.l0_ratio =
        std::max(cert.l0_ratio,
                 std::abs(problem.Loss(x, z) - problem.Loss(y, z)) / dist);
    problem.Gradient(x, z, gx);
    problem.Gradient(y, z, gy);
    for (int j = 0; j < d; ++j) gdiff[j] = gx[j] - gy[j];
    cert.l1_ratio =
        std::max(cert.l1_ratio, LpNormUnchecked(gdiff, problem.q()) / dist);
  }
  constexpr double kSlack = 1e-9;
  cert.ok = cert.l0_ratio <= problem.L0() * (1.0 + kSlack) + kSlack &&
            cert.l1_ratio <= problem.L1() * (1.0 + kSlack) + kSlack;
  return cert;
}

}  // namespace dpfw
