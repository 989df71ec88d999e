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

#include "dpfw/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace dpfw {
namespace {

constexpr double kUnitBallSlack = 1e-12;

double MaxAbs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// ln ||g||_q for finite q > 1, computed without forming |g_j|^q.
double LogLqNorm(std::span<const double> g, double q, double max_abs) {
  double sum = 0.0;
  for (double v : g) {
    if (v != 0.0) sum += std::pow(std::abs(v) / max_abs, q);
  }
  return std::log(max_abs) + std::log(sum) / q;
}

}  // namespace

double Exponent::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

std::string Exponent::ToString() const {
  return infinite_ ? std::string("inf") : absl::StrFormat("%.17g", value_);
}

absl::StatusOr<Exponent> DualExponent(Exponent p) {
  if (p.is_infinite()) return Exponent::Finite(1.0);
  const double v = p.value();
  if (!(v >= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("invalid exponent p=%g: must lie in [1, inf]", v));
  }
  if (v == 1.0) return Exponent::Infinity();
  return Exponent::Finite(v / (v - 1.0));
}

absl::StatusOr<SpaceSpec> Regularity(Exponent p, int d) {
  if (p.is_infinite() || !(p.value() > 1.0 && p.value() <= 2.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "unsupported geometry p=%s: regularity needs 1 < p <= 2 (use the "
        "polyhedral path for p=1)",
        p.ToString()));
  }
  if (d < 2) {
    return absl::InvalidArgumentError(
        absl::StrFormat("regularity needs dimension d >= 2, got %d", d));
  }
  absl::StatusOr<Exponent> q = DualExponent(p);
  if (!q.ok()) return q.status();
  const double log_d = std::log(static_cast<double>(d));
  SpaceSpec spec;
  spec.p = p;
  spec.q = *q;
  spec.d = d;
  spec.kappa = std::min(q->value() - 1.0, 2.0 * std::numbers::e * log_d);
  spec.r = std::min(q->value(), 2.0 * log_d + 1.0);
  spec.kappa_plus = spec.r - 1.0;
  return spec;
}

absl::StatusOr<PolyhedralRegularityConstants> PolyhedralRegularity(
    double vertex_count) {
  if (!(vertex_count >= 2.0) || std::floor(vertex_count) != vertex_count ||
      !std::isfinite(vertex_count)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid polytope: vertex count must be an integer >= 2, got %g",
        vertex_count));
  }
  const double log_k = std::log(vertex_count);
  PolyhedralRegularityConstants out;
  out.kappa = 2.0 * std::numbers::e * log_k;
  out.smoothing_exponent = 2.0 * log_k + 1.0;
  out.kappa_plus = out.smoothing_exponent - 1.0;
  return out;
}

double LpNormUnchecked(std::span<const double> x, Exponent p) {
  const double m = MaxAbs(x);
  if (m == 0.0 || p.is_infinite()) return m;
  const double pv = p.value();
  double sum = 0.0;
  if (pv == 1.0) {
    for (double v : x) sum += std::abs(v);
    return sum;
  }
  if (pv == 2.0) {
    for (double v : x) {
      const double t = v / m;
      sum += t * t;
    }
    return m * std::sqrt(sum);
  }
  for (double v : x) {
    if (v != 0.0) sum += std::pow(std::abs(v) / m, pv);
  }
  return m * std::pow(sum, 1.0 / pv);
}

absl::StatusOr<double> LpNorm(std::span<const double> x, Exponent p) {
  if (!p.is_infinite() && !(p.value() >= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("invalid exponent p=%s", p.ToString()));
  }
  for (double v : x) {
    if (std::isnan(v)) return absl::InvalidArgumentError("NaN entry in vector");
  }
  return LpNormUnchecked(x, p);
}

std::vector<double> SmoothNormGradSq(std::span<const double> x, double r) {
  std::vector<double> grad(x.size(), 0.0);
  const double norm = LpNormUnchecked(x, Exponent::Finite(r));
  if (norm == 0.0) return grad;
  // 2 ||x||^{2-r} |x_j|^{r-1} = 2 ||x|| (|x_j| / ||x||)^{r-1}.
  for (size_t j = 0; j < x.size(); ++j) {
    if (x[j] == 0.0) continue;
    grad[j] =
        2.0 * norm * std::pow(std::abs(x[j]) / norm, r - 1.0) * Sign(x[j]);
  }
  return grad;
}

std::vector<double> LmoLpBall(std::span<const double> g, Exponent p,
                              double radius) {
  std::vector<double> v(g.size(), 0.0);
  const double m = MaxAbs(g);
  if (m == 0.0) return v;
  if (p.is_infinite()) {
    for (size_t j = 0; j < g.size(); ++j) v[j] = -radius * Sign(g[j]);
    return v;
  }
  if (p.value() == 1.0) {
    size_t best = 0;
    for (size_t j = 1; j < g.size(); ++j) {
      if (std::abs(g[j]) > std::abs(g[best])) best = j;
    }
    v[best] = -radius * Sign(g[best]);
    return v;
  }
  const double q = p.value() / (p.value() - 1.0);
  const double log_norm = LogLqNorm(g, q, m);
  for (size_t j = 0; j < g.size(); ++j) {
    if (g[j] == 0.0) continue;
    v[j] = -radius * Sign(g[j]) *
           std::exp((q - 1.0) * (std::log(std::abs(g[j])) - log_norm));
  }
  return v;
}

absl::StatusOr<PolytopeLmoResult> LmoPolytope(std::span<const double> g,
                                              const Polytope& polytope) {
  if (static_cast<int>(g.size()) != polytope.dim()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dimension mismatch: gradient has %d entries, "
                        "polytope lives in dimension %d",
                        g.size(), polytope.dim()));
  }
  int best = 0;
  double best_value = Dot(g, polytope.vertex(0));
  for (int k = 1; k < polytope.size(); ++k) {
    const double value = Dot(g, polytope.vertex(k));
    if (value < best_value) {
      best = k;
      best_value = value;
    }
  }
  return PolytopeLmoResult{best, polytope.vertex(best)};
}

absl::StatusOr<double> UniformConvexityGap(std::span<const double> x,
                                           std::span<const double> y,
                                           Exponent p) {
  if (p.is_infinite() || !(p.value() > 1.0 && p.value() <= 2.0)) {
    return absl::InvalidArgumentError("uniform convexity needs 1 < p <= 2");
  }
  if (x.size() != y.size()) {
    return absl::InvalidArgumentError("dimension mismatch");
  }
  absl::StatusOr<double> nx = LpNorm(x, p);
  if (!nx.ok()) return nx.status();
  absl::StatusOr<double> ny = LpNorm(y, p);
  if (!ny.ok()) return ny.status();
  if (*nx > 1.0 + kUnitBallSlack || *ny > 1.0 + kUnitBallSlack) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "inputs must lie in the unit ball (||x||=%g, ||y||=%g)", *nx, *ny));
  }
  std::vector<double> diff(x.size()), mid(x.size());
  for (size_t j = 0; j < x.size(); ++j) {
    diff[j] = x[j] - y[j];
    mid[j] = 0.5 * (x[j] + y[j]);
  }
  const double dn = LpNormUnchecked(diff, p);
  return 1.0 - (p.value() - 1.0) / 8.0 * dn * dn - LpNormUnchecked(mid, p);
}

absl::StatusOr<std::pair<double, double>> NormConversionFactors(Exponent p,
                                                                int d) {
  if (!p.is_infinite() && !(p.value() >= 2.0)) {
    return absl::InvalidArgumentError(
        "norm conversion to l2 is only supported for p >= 2");
  }
  if (d < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  const double inv_p = p.is_infinite() ? 0.0 : 1.0 / p.value();
  return std::make_pair(std::pow(static_cast<double>(d), 0.5 - inv_p), 1.0);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

absl::StatusOr<Polytope> Polytope::Create(
    std::vector<std::vector<double>> vertices, Exponent ambient) {
  if (vertices.empty()) {
    return absl::InvalidArgumentError("invalid polytope: no vertices");
  }
  const size_t dim = vertices.front().size();
  if (dim == 0) {
    return absl::InvalidArgumentError("invalid polytope: zero dimension");
  }
  for (const auto& v : vertices) {
    if (v.size() != dim) {
      return absl::InvalidArgumentError("invalid polytope: ragged vertices");
    }
    for (double c : v) {
      if (!std::isfinite(c)) {
        return absl::InvalidArgumentError(
            "invalid polytope: non-finite vertex coordinate");
      }
    }
  }
  Polytope out;
  out.dim_ = static_cast<int>(dim);
  out.ambient_ = ambient;
  std::vector<double> diff(dim);
  for (size_t a = 0; a < vertices.size(); ++a) {
    for (size_t b = a + 1; b < vertices.size(); ++b) {
      for (size_t j = 0; j < dim; ++j)
        diff[j] = vertices[a][j] - vertices[b][j];
      out.diameter_ = std::max(out.diameter_, LpNormUnchecked(diff, ambient));
    }
  }
  out.vertices_ = std::move(vertices);
  return out;
}

Polytope Polytope::CrossPolytope(int d, double radius) {
  std::vector<std::vector<double>> vertices;
  vertices.reserve(2 * d);
  for (int sign : {1, -1}) {
    for (int j = 0; j < d; ++j) {
      std::vector<double> v(d, 0.0);
      v[j] = sign * radius;
      vertices.push_back(std::move(v));
    }
  }
  Polytope out;
  out.dim_ = d;
  out.ambient_ = Exponent::Finite(1.0);
  out.diameter_ = 2.0 * radius;
  out.vertices_ = std::move(vertices);
  return out;
}

}  // namespace dpfw
