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

#include "dpfw/solvers.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <variant>

#include "absl/strings/str_format.h"

namespace dpfw {
namespace {

constexpr double kFeasibilitySlack = 1e-9;

int64_t ElapsedNs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

// x <- (1 - eta) x + eta v, with the matching update of the vertex weights.
void FrankWolfeStep(double eta, std::span<const double> v, int vertex,
                    std::vector<double>& x, std::vector<double>& weights) {
  for (size_t j = 0; j < x.size(); ++j) x[j] = (1.0 - eta) * x[j] + eta * v[j];
  if (weights.empty()) return;
  for (double& w : weights) w *= (1.0 - eta);
  weights[vertex] += eta;
}

double DualGap(std::span<const double> a, std::span<const double> b,
               Exponent q) {
  std::vector<double> diff(a.size());
  for (size_t j = 0; j < a.size(); ++j) diff[j] = a[j] - b[j];
  return LpNormUnchecked(diff, q);
}

// Starting point and vertex-weight certificate.
absl::Status InitialPoint(const Problem& problem, const std::vector<double>& x0,
                          std::vector<double>& x,
                          std::vector<double>& weights) {
  const int d = problem.dim();
  const auto* poly = std::get_if<Polytope>(&problem.set());
  if (x0.empty()) {
    if (poly != nullptr) {
      x = poly->vertex(0);
      weights.assign(poly->size(), 0.0);
      weights[0] = 1.0;
    } else {
      x.assign(d, 0.0);
    }
    return absl::OkStatus();
  }
  if (static_cast<int>(x0.size()) != d) {
    return absl::InvalidArgumentError("x0 has the wrong dimension");
  }
  if (const auto* ball = std::get_if<LpBall>(&problem.set());
      ball != nullptr && !InBall(x0, *ball, kFeasibilitySlack)) {
    return absl::InvalidArgumentError("x0 lies outside the feasible ball");
  }
  x = x0;
  weights.clear();
  return absl::OkStatus();
}

}  // namespace

absl::Status CheckNoiseControls(const NoiseControls& noise) {
  if (noise.disable_noise && !noise.unsafe_override) {
    return absl::FailedPreconditionError(
        "noise can only be disabled together with the unsafe override; "
        "such runs are not differentially private");
  }
  return absl::OkStatus();
}

int64_t TreeSampleDraws(int T, int64_t b) {
  int64_t total = 0;
  for (int t = 1; t <= T; ++t) {
    total += b;
    for (int k = 1; k <= t; ++k) {
      total += (int64_t{1} << (k - 1)) * (b >> k);
    }
  }
  return total;
}

absl::StatusOr<TreeSchedule> TreeSfwSchedule(int64_t n, double kappa, double L0,
                                             double L1, double M,
                                             const PrivacyBudget& budget) {
  if (n < kTreeMinSamples) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "insufficient data: the tree schedule needs n >= %d, got %d",
        kTreeMinSamples, n));
  }
  const double lg = std::log2(static_cast<double>(n));
  TreeSchedule out;
  out.T = static_cast<int>(std::floor(lg / 2.0));
  out.b_uncapped = static_cast<int64_t>(std::floor(4.0 * n / (lg * lg)));
  for (; out.T >= 1; --out.T) {
    const int64_t T = out.T;
    // T b + T (T+1) b / 4 <= n  <=>  b <= 4n / (4T + T(T+1)).
    const int64_t cap = (4 * n) / (4 * T + T * (T + 1));
    out.b = std::min(out.b_uncapped, cap);
    if (out.b >= (int64_t{1} << T)) break;
  }
  if (out.T < 1) {
    return absl::InvalidArgumentError("insufficient data for one phase");
  }
  const double T = out.T;
  out.demand_bound = T * out.b + T * (T + 1.0) * out.b / 4.0;
  out.draws = TreeSampleDraws(out.T, out.b);
  out.sigma2_root = GgCalibrate(2.0 * L0 / out.b, kappa, budget);
  out.sigma2_delta = GgCalibrate(8.0 * L1 * M / out.b, kappa, budget);
  return out;
}

absl::StatusOr<std::vector<DfsNode>> DfsSchedule(int t) {
  if (t < 1) return absl::InvalidArgumentError("phase must be >= 1");
  if (t > 40) return absl::InvalidArgumentError("phase too deep");
  std::vector<DfsNode> order;
  order.reserve((size_t{2} << t) - 2);
  // Iterative preorder; children pushed right first so left pops first.
  std::vector<std::string> stack = {"1", "0"};
  while (!stack.empty()) {
    std::string s = std::move(stack.back());
    stack.pop_back();
    DfsNode node;
    node.depth = static_cast<int>(s.size());
    for (char c : s) node.ell = 2 * node.ell + (c == '1');
    node.is_leaf = node.depth == t;
    node.is_right = s.back() == '1';
    node.batch_fraction = std::ldexp(1.0, -node.depth);
    if (node.is_leaf) {
      node.eta = 2.0 / (std::ldexp(1.0, t - 1) + node.ell + 1.0);
    } else {
      stack.push_back(s + "1");
      stack.push_back(s + "0");
    }
    node.s = std::move(s);
    order.push_back(std::move(node));
  }
  return order;
}

absl::StatusOr<RunReport> NoisyTreeSfw(const Dataset& dataset,
                                       const Problem& problem,
                                       const TreeSfwConfig& cfg, Rng& rng) {
  const auto start = std::chrono::steady_clock::now();
  if (absl::Status s = CheckNoiseControls(cfg.noise); !s.ok()) return s;
  if (cfg.T < 1 || cfg.T > 30) {
    return absl::InvalidArgumentError("T must lie in [1, 30]");
  }
  if (cfg.b < (int64_t{1} << cfg.T)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "batch size b=%d is below 2^T=%d", cfg.b, int64_t{1} << cfg.T));
  }
  if (dataset.width() != problem.sample_width()) {
    return absl::InvalidArgumentError("dataset width does not match problem");
  }
  const int64_t draws = TreeSampleDraws(cfg.T, cfg.b);
  if (draws > dataset.n()) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "configuration error: schedule needs %d samples, dataset has %d", draws,
        dataset.n()));
  }
  const int d = problem.dim();
  const Exponent q = problem.q();

  RunReport report;
  report.solver = "tree_sfw";
  report.seed = cfg.seed;
  report.bias_trace.beta = cfg.beta;
  report.config_echo = absl::StrFormat(
      "tree_sfw T=%d b=%d eps=%.17g delta=%.17g L0=%.17g L1=%.17g M=%.17g "
      "kappa=%.17g r=%.17g noise=%s",
      cfg.T, cfg.b, cfg.budget.eps(), cfg.budget.delta(), cfg.L0, cfg.L1, cfg.M,
      cfg.space.kappa, cfg.space.r, cfg.noise.disable_noise ? "off" : "on");

  std::vector<double> x, weights;
  if (absl::Status s = InitialPoint(problem, cfg.x0, x, weights); !s.ok()) {
    return s;
  }

  Rng perm_rng(rng());
  Rng noise_rng(rng());
  std::vector<int64_t> perm(dataset.n());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), perm_rng);
  int64_t cursor = 0;

  const bool quiet = cfg.noise.disable_noise;
  const double sigma2_root =
      quiet ? 0.0
            : GgCalibrate(2.0 * cfg.L0 / cfg.b, cfg.space.kappa, cfg.budget);
  const double sigma2_delta = quiet ? 0.0
                                    : GgCalibrate(8.0 * cfg.L1 * cfg.M / cfg.b,
                                                  cfg.space.kappa, cfg.budget);
  const GGParams root_noise{d, cfg.space.r, sigma2_root, {}};
  const GGParams delta_noise{d, cfg.space.r, sigma2_delta, {}};
  const double nu_root = GgLightTailNu(d, sigma2_root);
  const double nu_delta = GgLightTailNu(d, sigma2_delta);

  const int T = cfg.T;
  // Per-depth state along the current root-to-node path.
  std::vector<std::vector<double>> est(T + 1), xs(T + 1);
  std::vector<bool> right(T + 1, false);
  std::vector<double> batch(T + 1, 0.0), eta_mark(T + 1, 0.0),
      motion(T + 1, 0.0);
  double eta_total = 0.0;
  std::vector<double> noise(d);
  GradientBatch grads_new(d), grads_old(d);

  auto take = [&]() -> std::span<const double> {
    const int64_t idx = perm[cursor++];
    if (cfg.record_indices) report.consumed_indices.push_back(idx);
    return dataset.row(idx);
  };
  auto fail = [](int t, const std::string& s) {
    return absl::InternalError(absl::StrFormat(
        "numerical error: non-finite gradient estimate at phase %d node '%s'",
        t, s));
  };

  for (int t = 1; t <= T; ++t) {
    absl::StatusOr<std::vector<DfsNode>> order = DfsSchedule(t);
    if (!order.ok()) return order.status();

    xs[0] = x;
    grads_new.Clear();
    for (int64_t i = 0; i < cfg.b; ++i) {
      problem.Gradient(x, take(), grads_new.AppendRow());
    }
    est[0] = BatchMean(grads_new);
    SampleGeneralizedGaussianInto(root_noise, noise_rng, noise);
    for (int j = 0; j < d; ++j) est[0][j] += noise[j];
    if (!AllFinite(est[0])) return fail(t, "");
    batch[0] = static_cast<double>(cfg.b);
    eta_mark[0] = eta_total;

    for (const DfsNode& node : *order) {
      const int k = node.depth;
      right[k] = node.is_right;
      if (!node.is_right) {
        est[k] = est[k - 1];
        xs[k] = xs[k - 1];
      } else {
        xs[k] = x;
        const int64_t size = cfg.b >> k;
        grads_new.Clear();
        grads_old.Clear();
        for (int64_t i = 0; i < size; ++i) {
          const auto z = take();
          problem.Gradient(xs[k], z, grads_new.AppendRow());
          problem.Gradient(xs[k - 1], z, grads_old.AppendRow());
        }
        SampleGeneralizedGaussianInto(delta_noise, noise_rng, noise);
        EstimatorState parent;
        parent.current = est[k - 1];
        absl::StatusOr<EstimatorState> next =
            SpiderUpdate(parent, grads_new, grads_old, 0.0, noise);
        if (!next.ok()) return next.status();
        est[k] = std::move(next->current);
        if (!AllFinite(est[k])) return fail(t, node.s);
        batch[k] = static_cast<double>(size);
        motion[k] = eta_total - eta_mark[k - 1];
      }
      eta_mark[k] = eta_total;
      if (!node.is_leaf) continue;

      const int64_t m = (int64_t{1} << (t - 1)) + node.ell;
      const std::vector<double> grad_pop = problem.PopulationGradient(x);
      const double gap = DualGap(est[k], grad_pop, q);
      double bound = 0.0;
      if (cfg.record_bounds) {
        // One update at the root plus one per right child on the path.
        BiasBoundInputs in;
        in.alpha = 0.0;
        in.horizon = std::ldexp(1.0, t);
        in.batch_sizes = {batch[0]};
        in.nu = {nu_root};
        double max_motion = 0.0;
        for (int j = 1; j <= k; ++j) {
          if (!right[j]) continue;
          in.batch_sizes.push_back(batch[j]);
          in.nu.push_back(nu_delta);
          max_motion = std::max(max_motion, motion[j]);
        }
        in.t = static_cast<int>(in.nu.size());
        in.eta.assign(in.t + 1, 0.0);
        in.eta[in.t] = max_motion;
        in.L0 = cfg.L0;
        in.L1 = cfg.L1;
        in.M = cfg.M;
        in.kappa = cfg.space.kappa;
        in.beta = cfg.beta;
        absl::StatusOr<double> b = BiasBound(in);
        if (!b.ok()) return b.status();
        bound = *b;
      }
      report.max_bias_gap = std::max(report.max_bias_gap, gap);
      if (cfg.record_traces) {
        report.bias_trace.entries.push_back({m, gap, bound});
      }
      const LmoResult v = Lmo(est[k], problem.set());
      FrankWolfeStep(node.eta, v.point, v.vertex, x, weights);
      eta_total += node.eta;
      if (!AllFinite(x)) return fail(t, node.s);
      report.max_iterate_norm =
          std::max(report.max_iterate_norm, LpNormUnchecked(x, problem.p()));
    }
  }

  report.samples_consumed = cursor;
  report.x_out = x;
  report.vertex_weights = std::move(weights);
  report.empirical_risk = problem.EmpiricalRisk(x, dataset);
  absl::StatusOr<double> risk = problem.ExcessRisk(x);
  if (!risk.ok()) return risk.status();
  report.has_excess_risk = true;
  report.excess_risk = *risk;
  report.wall_time_ns = ElapsedNs(start);
  return report;
}

absl::StatusOr<double> PolySfwStepSize(int64_t n, int K) {
  if (n < 4) return absl::InvalidArgumentError("insufficient data: n < 4");
  if (K < 1) return absl::InvalidArgumentError("polytope has no vertices");
  const double log_k = std::log(static_cast<double>(std::max(K, 2)));
  const double eta = std::log(static_cast<double>(n) / log_k) / n;
  if (!(eta > 0.0 && eta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("step size %g outside (0, 1)", eta));
  }
  return eta;
}

double PolySensitivitySchedule(int64_t t, double eta, double L0, double L1,
                               double M, int64_t n) {
  const double decayed =
      std::pow(1.0 - eta, static_cast<double>(t)) * 2.0 * L0 * M / n;
  return std::max(decayed, 2.0 * eta * (L1 * M * M + L0 * M));
}

namespace {

struct PolyInputs {
  const Polytope* poly = nullptr;
  int64_t n_half = 0;
};

absl::StatusOr<PolyInputs> CheckPolyInputs(const Dataset& dataset,
                                           const Problem& problem,
                                           const PolySfwConfig& cfg) {
  const auto* poly = std::get_if<Polytope>(&problem.set());
  if (poly == nullptr) {
    return absl::InvalidArgumentError(
        "the polytope solver needs a polytope feasible set");
  }
  if (dataset.n() < 4) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "insufficient data: the polytope solver needs n >= 4, got %d",
        dataset.n()));
  }
  if (dataset.width() != problem.sample_width()) {
    return absl::InvalidArgumentError("dataset width does not match problem");
  }
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) {
    return absl::InvalidArgumentError("eta must lie in (0, 1)");
  }
  if (cfg.x0_vertex < 0 || cfg.x0_vertex >= poly->size()) {
    return absl::InvalidArgumentError("x0_vertex out of range");
  }
  return PolyInputs{poly, dataset.n() / 2};
}

void VertexScores(const Polytope& poly, std::span<const double> d,
                  std::vector<double>& scores) {
  scores.resize(poly.size());
  for (int k = 0; k < poly.size(); ++k) scores[k] = Dot(poly.vertex(k), d);
}

}  // namespace

absl::StatusOr<RunReport> PolySfw(const Dataset& dataset,
                                  const Problem& problem,
                                  const PolySfwConfig& cfg, Rng& rng) {
  const auto start = std::chrono::steady_clock::now();
  if (absl::Status s = CheckNoiseControls(cfg.noise); !s.ok()) return s;
  absl::StatusOr<PolyInputs> inputs = CheckPolyInputs(dataset, problem, cfg);
  if (!inputs.ok()) return inputs.status();
  const Polytope& poly = *inputs->poly;
  const int64_t n_half = inputs->n_half;
  const int64_t n = dataset.n();
  const int d = problem.dim();
  const int K = poly.size();
  const Exponent q = problem.q();
  const double eta = cfg.eta;
  const double log_inv_delta = std::log(1.0 / cfg.budget.delta());
  const bool quiet = cfg.noise.disable_noise;

  RunReport report;
  report.solver = "poly_sfw";
  report.seed = cfg.seed;
  report.bias_trace.beta = cfg.beta;
  report.config_echo = absl::StrFormat(
      "poly_sfw eta=%.17g eps=%.17g delta=%.17g L0=%.17g L1=%.17g M=%.17g "
      "K=%d noise=%s",
      eta, cfg.budget.eps(), cfg.budget.delta(), cfg.L0, cfg.L1, cfg.M, K,
      quiet ? "off" : "on");

  Rng noise_rng(rng());
  std::vector<double> weights(K, 0.0);
  weights[cfg.x0_vertex] = 1.0;
  std::vector<double> x = poly.vertex(cfg.x0_vertex);
  std::vector<double> scores;
  auto record_index = [&](int64_t i) {
    if (cfg.record_indices) report.consumed_indices.push_back(i);
  };

  const double c_bias =
      2.0 * (std::numbers::e * std::sqrt(2.0 * std::log(std::max(K, 2))) +
             std::sqrt(3.0 * std::log(n / cfg.beta)));
  auto bias_bound = [&](int64_t t) {
    return c_bias *
           (std::numbers::sqrt2 * std::pow(1.0 - eta, static_cast<double>(t)) *
                cfg.L0 / std::sqrt(static_cast<double>(n)) +
            eta * std::sqrt(static_cast<double>(t)) *
                (cfg.L1 * cfg.M + cfg.L0));
  };

  // Shared bookkeeping after d_t is known: trace, selection, Gamma log, step.
  auto select_and_step = [&](int64_t t, std::span<const double> dt,
                             double scale) -> absl::Status {
    const std::vector<double> grad_pop = problem.PopulationGradient(x);
    const double gap = DualGap(dt, grad_pop, q);
    report.max_bias_gap = std::max(report.max_bias_gap, gap);
    VertexScores(poly, dt, scores);
    absl::StatusOr<NoisyMinResult> pick =
        ReportNoisyMin(scores, quiet ? 0.0 : scale, noise_rng);
    if (!pick.ok()) return pick.status();
    report.max_nu_t = std::max(report.max_nu_t, pick->suboptimality);
    const double gamma = problem.PopulationRisk(x) - problem.optimum();
    FrankWolfeStep(eta, poly.vertex(pick->index), pick->index, x, weights);
    if (!AllFinite(x)) {
      return absl::InternalError(
          absl::StrFormat("numerical error: non-finite iterate at step %d", t));
    }
    if (cfg.record_traces) {
      report.bias_trace.entries.push_back({t, gap, bias_bound(t)});
      report.nu_trace.push_back(pick->suboptimality);
      GammaLogEntry entry;
      entry.t = t;
      entry.gamma_next = problem.PopulationRisk(x) - problem.optimum();
      entry.rhs = (1.0 - eta) * gamma + 2.0 * eta * cfg.M * gap +
                  eta * pick->suboptimality +
                  cfg.L1 * eta * eta * cfg.M * cfg.M / 2.0;
      report.gamma_log.push_back(entry);
    }
    return absl::OkStatus();
  };

  GradientBatch grads_new(d), grads_old(d);
  for (int64_t i = 0; i < n_half; ++i) {
    record_index(i);
    problem.Gradient(x, dataset.row(i), grads_new.AppendRow());
  }
  EstimatorState state;
  state.current = BatchMean(grads_new);
  state.consumed = n_half;
  if (!AllFinite(state.current)) {
    return absl::InternalError("numerical error: non-finite initial estimate");
  }
  std::vector<double> x_prev = x;
  const double scale0 = 4.0 * cfg.L0 * cfg.M * std::sqrt(log_inv_delta) /
                        (cfg.budget.eps() * std::sqrt(static_cast<double>(n)));
  if (absl::Status s = select_and_step(0, state.current, scale0); !s.ok()) {
    return s;
  }

  for (int64_t t = 1; t <= n_half; ++t) {
    const int64_t idx = n_half + t - 1;
    record_index(idx);
    const auto z = dataset.row(idx);
    grads_new.Clear();
    grads_old.Clear();
    problem.Gradient(x, z, grads_new.AppendRow());
    problem.Gradient(x_prev, z, grads_old.AppendRow());
    absl::StatusOr<EstimatorState> next =
        SpiderUpdate(state, grads_new, grads_old, eta);
    if (!next.ok()) return next.status();
    state = *std::move(next);
    if (!AllFinite(state.current)) {
      return absl::InternalError(absl::StrFormat(
          "numerical error: non-finite gradient estimate at step %d", t));
    }
    const double s_t =
        PolySensitivitySchedule(t, eta, cfg.L0, cfg.L1, cfg.M, n);
    const double scale =
        2.0 * s_t * std::sqrt(n * log_inv_delta) / cfg.budget.eps();
    x_prev = x;
    if (absl::Status s = select_and_step(t, state.current, scale); !s.ok()) {
      return s;
    }
  }

  report.samples_consumed = 2 * n_half;
  report.x_out = x;
  report.vertex_weights = std::move(weights);
  report.empirical_risk = problem.EmpiricalRisk(x, dataset);
  absl::StatusOr<double> risk = problem.ExcessRisk(x);
  if (!risk.ok()) return risk.status();
  report.has_excess_risk = true;
  report.excess_risk = *risk;
  report.wall_time_ns = ElapsedNs(start);
  return report;
}

absl::StatusOr<double> ReplaySensitivityCheck(
    const Dataset& dataset, const Dataset& neighbor, const Problem& problem,
    const PolySfwConfig& cfg, const std::vector<int>& forced_vertices) {
  absl::StatusOr<PolyInputs> inputs = CheckPolyInputs(dataset, problem, cfg);
  if (!inputs.ok()) return inputs.status();
  if (neighbor.n() != dataset.n() || neighbor.width() != dataset.width()) {
    return absl::InvalidArgumentError("neighbor has a different shape");
  }
  int64_t differing = 0;
  for (int64_t i = 0; i < dataset.n(); ++i) {
    const auto a = dataset.row(i);
    const auto b = neighbor.row(i);
    if (!std::equal(a.begin(), a.end(), b.begin())) ++differing;
  }
  if (differing > 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid input: datasets differ in %d entries, expected at most 1",
        differing));
  }
  const Polytope& poly = *inputs->poly;
  const int64_t n_half = inputs->n_half;
  const int64_t n = dataset.n();
  if (static_cast<int64_t>(forced_vertices.size()) < n_half + 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need %d forced vertices, got %d", n_half + 1, forced_vertices.size()));
  }
  for (int v : forced_vertices) {
    if (v < 0 || v >= poly.size()) {
      return absl::InvalidArgumentError("forced vertex out of range");
    }
  }
  const int d = problem.dim();
  const double eta = cfg.eta;

  // Both runs share the trajectory because every selection is forced.
  std::vector<std::vector<double>> xs(n_half + 2);
  xs[0] = poly.vertex(cfg.x0_vertex);
  std::vector<double> unused;
  for (int64_t t = 0; t <= n_half; ++t) {
    xs[t + 1] = xs[t];
    FrankWolfeStep(eta, poly.vertex(forced_vertices[t]), 0, xs[t + 1], unused);
  }

  auto estimates = [&](const Dataset& data) {
    std::vector<std::vector<double>> out(n_half + 1);
    GradientBatch g(d), h(d);
    for (int64_t i = 0; i < n_half; ++i) {
      problem.Gradient(xs[0], data.row(i), g.AppendRow());
    }
    EstimatorState state;
    state.current = BatchMean(g);
    out[0] = state.current;
    for (int64_t t = 1; t <= n_half; ++t) {
      const auto z = data.row(n_half + t - 1);
      g.Clear();
      h.Clear();
      problem.Gradient(xs[t], z, g.AppendRow());
      problem.Gradient(xs[t - 1], z, h.AppendRow());
      state = *SpiderUpdate(state, g, h, eta);
      out[t] = state.current;
    }
    return out;
  };
  const auto da = estimates(dataset);
  const auto db = estimates(neighbor);

  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> diff(d);
  for (int64_t t = 0; t <= n_half; ++t) {
    for (int j = 0; j < d; ++j) diff[j] = da[t][j] - db[t][j];
    double inner = 0.0;
    for (int k = 0; k < poly.size(); ++k) {
      inner = std::max(inner, std::abs(Dot(poly.vertex(k), diff)));
    }
    const double s_t =
        PolySensitivitySchedule(t, eta, cfg.L0, cfg.L1, cfg.M, n);
    worst = std::max(worst, inner - s_t);
  }
  return worst;
}

}  // namespace dpfw
