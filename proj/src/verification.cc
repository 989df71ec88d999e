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

#include "dpfw/verification.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "absl/strings/str_format.h"
#include "dpfw/accounting.h"
#include "dpfw/dataset.h"
#include "dpfw/estimators.h"
#include "dpfw/geometry.h"
#include "dpfw/mechanisms.h"
#include "dpfw/problems.h"
#include "dpfw/renyi_quadrature.h"
#include "dpfw/solvers.h"
#include "json.hpp"

namespace dpfw {
namespace {

constexpr double kMachineTol = 4.0 * std::numeric_limits<double>::epsilon();

bool RelClose(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

std::vector<double> NormalVector(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  return v;
}

// Point of the unit lp ball; on the sphere half of the time, where the
// convexity inequalities are tightest.
std::vector<double> UnitBallPoint(int d, Exponent p, Rng& rng) {
  std::vector<double> v = NormalVector(d, rng);
  const double norm = LpNormUnchecked(v, p);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double radius = unif(rng) < 0.5 ? 1.0 : unif(rng);
  for (double& x : v) x *= radius / norm;
  return v;
}

}  // namespace

void VerificationReport::AddUpper(std::string description, double measured,
                                  double bound) {
  const bool pass = measured <= bound;
  records.push_back(
      {std::move(description), measured, bound, bound - measured, pass});
  overall = overall && pass;
}

void VerificationReport::AddLower(std::string description, double measured,
                                  double bound) {
  const bool pass = measured >= bound;
  records.push_back(
      {std::move(description), measured, bound, measured - bound, pass});
  overall = overall && pass;
}

void VerificationReport::AddClose(std::string description, double measured,
                                  double target, double tol) {
  const double err = std::abs(measured - target);
  const bool pass = err <= tol;
  records.push_back(
      {std::move(description), measured, target, tol - err, pass});
  overall = overall && pass;
}

void VerificationReport::AddFlag(std::string description, bool ok) {
  records.push_back(
      {std::move(description), ok ? 1.0 : 0.0, 1.0, ok ? 0.0 : -1.0, ok});
  overall = overall && ok;
}

void VerificationReport::AddInfo(std::string description, double measured) {
  records.push_back(
      {"[info] " + std::move(description), measured, 0.0, 0.0, true});
}

void VerificationReport::Merge(const VerificationReport& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  overall = overall && other.overall;
}

std::string VerificationReport::ToJson() const {
  nlohmann::json out;
  out["suite"] = suite;
  out["overall_pass"] = overall;
  out["records"] = nlohmann::json::array();
  for (const CheckRecord& r : records) {
    out["records"].push_back({{"description", r.description},
                              {"measured", r.measured},
                              {"bound", r.bound},
                              {"margin", r.margin},
                              {"pass", r.pass}});
  }
  return out.dump(2);
}

VerificationReport VerifyGgMoments(int draws, uint64_t seed) {
  VerificationReport report;
  report.suite = "gg-moments";
  struct Case {
    int d;
    double r, sigma2;
  };
  int index = 0;
  for (const Case c :
       {Case{2, 2.0, 1.0}, Case{8, 4.0, 2.25}, Case{50, 3.0, 1.0}}) {
    Rng rng(StableHash({seed, 1, static_cast<uint64_t>(index++)}));
    const GGParams params{c.d, c.r, c.sigma2, {}};
    std::vector<double> z(c.d);
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) {
      SampleGeneralizedGaussianInto(params, rng, z);
      const double n = LpNormUnchecked(z, Exponent::Finite(c.r));
      sum += n * n;
    }
    const double exact = GgMomentExact(2, c.d, c.sigma2);
    report.AddUpper(
        absl::StrFormat("E||Z||_r^2 relative error, d=%d r=%g sigma2=%g "
                        "(%d draws, exact %.6g)",
                        c.d, c.r, c.sigma2, draws, exact),
        std::abs(sum / draws / exact - 1.0), 0.02);
  }
  return report;
}

VerificationReport VerifyGgLightTail(int draws, uint64_t seed) {
  VerificationReport report;
  report.suite = "gg-moments";
  struct Case {
    int d;
    double r, sigma2;
  };
  int index = 0;
  for (const Case c :
       {Case{2, 2.0, 1.0}, Case{8, 4.0, 2.25}, Case{50, 3.0, 1.0}}) {
    Rng rng(StableHash({seed, 2, static_cast<uint64_t>(index++)}));
    const GGParams params{c.d, c.r, c.sigma2, {}};
    const double nu = GgLightTailNu(c.d, c.sigma2);
    std::vector<double> z(c.d);
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) {
      SampleGeneralizedGaussianInto(params, rng, z);
      const double n = LpNormUnchecked(z, Exponent::Finite(c.r));
      sum += std::exp(n * n / (nu * nu));
    }
    report.AddUpper(absl::StrFormat("E exp(||Z||^2/nu^2), d=%d r=%g sigma2=%g",
                                    c.d, c.r, c.sigma2),
                    sum / draws, std::numbers::e * 1.05);
  }
  return report;
}

VerificationReport VerifyRenyi() {
  VerificationReport report;
  report.suite = "renyi";
  const double sigma2 = 1.0;
  for (double alpha : {1.5, 2.0, 4.0}) {
    for (double shift : {0.1, 0.5}) {
      // d = 1: every lr norm is |.| and the dual space is 1-regular.
      const double numeric =
          NumericRenyiDivergence1D(alpha, shift, sigma2, 1.0);
      const double bound = GgRdp(alpha, shift, sigma2, 1.0)->rho;
      report.AddUpper(absl::StrFormat("d=1 alpha=%g shift=%g: D_alpha <= bound",
                                      alpha, shift),
                      numeric, bound);
      report.AddClose(
          absl::StrFormat("d=1 r=2 alpha=%g shift=%g: Gaussian closed form",
                          alpha, shift),
          numeric, GaussianRenyiDivergence(alpha, shift * shift, sigma2), 1e-6);
      for (double r : {2.0, 4.0}) {
        // On d = 2 the space is l_r itself, which is min{r-1, 2e ln 2}-regular.
        const double kappa = std::max(
            1.0, std::min(r - 1.0, 2.0 * std::numbers::e * std::log(2.0)));
        const Exponent q = Exponent::Finite(r);
        for (int dir = 0; dir < 2; ++dir) {
          std::array<double, 2> mu = dir == 0 ? std::array<double, 2>{1.0, 0.0}
                                              : std::array<double, 2>{1.0, 1.0};
          const double norm = LpNormUnchecked(mu, q);
          for (double& m : mu) m *= shift / norm;
          const double d2 = NumericRenyiDivergence2D(alpha, mu, r, sigma2);
          const double b2 = GgRdp(alpha, shift, sigma2, kappa)->rho;
          report.AddUpper(
              absl::StrFormat("d=2 r=%g alpha=%g shift=%g dir=%s: D_alpha <= "
                              "bound",
                              r, alpha, shift, dir == 0 ? "axis" : "diagonal"),
              d2, b2);
        }
      }
    }
  }
  return report;
}

VerificationReport VerifyAccounting() {
  VerificationReport report;
  report.suite = "accounting";
  // Calibration against the formula, machine precision.
  for (double s : {0.02, 0.5, 1.0, 3.0}) {
    for (double kappa : {1.0, 2.0, 25.03}) {
      for (double eps : {0.1, 0.5, 1.0, 4.0}) {
        for (double delta : {1e-8, 1e-6, std::exp(-1.0)}) {
          const PrivacyBudget budget = *PrivacyBudget::Create(eps, delta);
          const double got = GgCalibrate(s, kappa, budget);
          const double want =
              2.0 * kappa * std::log(1.0 / delta) * s * s / (eps * eps);
          if (!RelClose(got, want, kMachineTol)) {
            report.AddClose(absl::StrFormat("calibration s=%g kappa=%g eps=%g "
                                            "delta=%g",
                                            s, kappa, eps, delta),
                            got, want, kMachineTol * want);
          }
        }
      }
    }
  }
  report.AddClose(
      "calibration s=1 kappa=1 eps=1 delta=1/e",
      GgCalibrate(1.0, 1.0, *PrivacyBudget::Create(1.0, std::exp(-1.0))), 2.0,
      2.0 * kMachineTol);
  report.AddClose("RDP kappa=1 alpha=2 s=1 sigma2=1", GgRdp(2, 1, 1, 1)->rho,
                  2.0, 2.0 * kMachineTol);
  report.AddClose("RDP kappa=2 alpha=4 s=0.5 sigma2=2",
                  GgRdp(4, 0.5, 2, 2)->rho, 2.0 / 3.0, kMachineTol);
  report.AddClose("RDP->DP rho=2 alpha=2 delta=e^-2",
                  RdpToDp({2.0, 2.0}, std::exp(-2.0)), 4.0, 4.0 * kMachineTol);
  // Advanced composition against the formula.
  for (double eps : {0.01, 0.1, 0.5}) {
    for (int k : {1, 10, 100, 1000}) {
      for (double slack : {1e-6, 1e-9}) {
        const ComposedBudget got = *AdvancedComposition(eps, 1e-8, k, slack);
        const double want = eps * std::sqrt(2.0 * k * std::log(1.0 / slack)) +
                            k * eps * (std::exp(eps) - 1.0);
        if (!RelClose(got.eps, want, 8 * kMachineTol) ||
            !RelClose(got.delta, k * 1e-8 + slack, kMachineTol)) {
          report.AddClose(absl::StrFormat("composition eps=%g k=%d slack=%g",
                                          eps, k, slack),
                          got.eps, want, 8 * kMachineTol * want);
        }
      }
    }
  }
  report.AddClose(
      "composition eps=0.1 k=100 delta'=1e-6",
      AdvancedComposition(0.1, 0.0, 100, 1e-6)->eps,
      0.1 * std::sqrt(200.0 * std::log(1e6)) + 10.0 * std::expm1(0.1), 1e-12);
  report.AddFlag("formula sweeps (calibration, composition) exact to 4-8 ulp",
                 report.overall);
  // Round trip: calibrate, then convert back through RDP over the alpha grid.
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    for (double delta : {1e-5, 1e-6, 1e-8}) {
      for (double kappa : {1.0, 2.0}) {
        const double s = 1.0;
        const PrivacyBudget budget = *PrivacyBudget::Create(eps, delta);
        const double sigma2 = GgCalibrate(s, kappa, budget);
        const OptimizedEpsilon back = OptimalRdpToDp(
            [&](double alpha) { return GgRdp(alpha, s, sigma2, kappa)->rho; },
            delta);
        report.AddUpper(
            absl::StrFormat("round trip eps=%g delta=%g kappa=%g (best "
                            "alpha=%.4g)",
                            eps, delta, kappa, back.alpha),
            back.eps, eps);
      }
    }
  }
  return report;
}

VerificationReport VerifySensitivity(int instances, uint64_t seed) {
  VerificationReport report;
  report.suite = "sensitivity";
  constexpr int kN = 16, kD = 3, kK = 4;
  double worst = -std::numeric_limits<double>::infinity();
  int checks = 0;
  std::string failure;
  for (int inst = 0; inst < instances; ++inst) {
    Rng rng(StableHash({seed, 5, static_cast<uint64_t>(inst)}));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    // Four distinct vertices of the unit cross-polytope.
    const Polytope cross = Polytope::CrossPolytope(kD);
    std::vector<int> pick(cross.size());
    std::iota(pick.begin(), pick.end(), 0);
    std::shuffle(pick.begin(), pick.end(), rng);
    std::vector<std::vector<double>> verts;
    for (int k = 0; k < kK; ++k) verts.push_back(cross.vertex(pick[k]));
    LeastSquaresSpec spec;
    spec.feature_bound = 1.0;
    spec.label_noise = 0.1;
    for (int j = 0; j < kD; ++j) {
      spec.feature_bias.push_back(unif(rng));
      spec.weights.push_back(unif(rng));
    }
    const double wn = LpNormUnchecked(spec.weights, Exponent::Finite(1.0));
    const double wr = 0.5 * (1.0 + unif(rng));
    for (double& w : spec.weights) w *= wr / wn;
    absl::StatusOr<Problem> problem =
        Problem::LeastSquares(*Polytope::Create(verts), spec);
    if (!problem.ok()) {
      report.AddFlag(
          "instance construction: " + std::string(problem.status().message()),
          false);
      return report;
    }
    const Dataset data = problem->Sample(kN, rng);
    PolySfwConfig cfg;
    cfg.eta = *PolySfwStepSize(kN, kK);
    cfg.L0 = problem->L0();
    cfg.L1 = problem->L1();
    cfg.M = problem->M();
    std::uniform_int_distribution<int> vertex(0, kK - 1);
    std::vector<int> forced(kN / 2 + 1);
    for (int& v : forced) v = vertex(rng);
    for (int i = 0; i < kN; ++i) {
      Dataset neighbor = data;
      const Dataset fresh = problem->Sample(1, rng);
      std::copy(fresh.row(0).begin(), fresh.row(0).end(),
                neighbor.mutable_row(i).begin());
      absl::StatusOr<double> v =
          ReplaySensitivityCheck(data, neighbor, *problem, cfg, forced);
      if (!v.ok()) {
        report.AddFlag("replay: " + std::string(v.status().message()), false);
        return report;
      }
      ++checks;
      if (*v > worst) {
        worst = *v;
        failure = absl::StrFormat("instance %d swap %d", inst, i);
      }
    }
  }
  report.AddUpper(absl::StrFormat("max violation over %d single-entry swaps "
                                  "(%d instances, n=16 d=3 K=4, worst at %s)",
                                  checks, instances, failure),
                  worst, 0.0);
  return report;
}

VerificationReport VerifyBias(int runs, uint64_t seed) {
  VerificationReport report;
  report.suite = "bias";
  const ExperimentConfig cfg = TrendConfig(SolverKind::kTreeSfw, 1, false);
  const Problem problem = *BuildProblem(cfg);
  const int64_t n = 4096;
  const PrivacyBudget budget = *PrivacyBudget::Create(1.0, 1e-6);
  const SpaceSpec space = *Regularity(problem.p(), problem.dim());
  const TreeSchedule schedule = *TreeSfwSchedule(
      n, space.kappa, problem.L0(), problem.L1(), problem.M(), budget);
  TreeSfwConfig tc;
  tc.T = schedule.T;
  tc.b = schedule.b;
  tc.budget = budget;
  tc.L0 = problem.L0();
  tc.L1 = problem.L1();
  tc.M = problem.M();
  tc.space = space;
  tc.beta = 0.05;
  std::vector<std::vector<double>> gaps;
  std::vector<double> bounds;
  for (int run = 0; run < runs; ++run) {
    Rng data_rng(StableHash({seed, 6, static_cast<uint64_t>(run), 0}));
    Rng rng(StableHash({seed, 6, static_cast<uint64_t>(run), 1}));
    const Dataset data = problem.Sample(n, data_rng);
    tc.seed = run;
    absl::StatusOr<RunReport> rep = NoisyTreeSfw(data, problem, tc, rng);
    if (!rep.ok()) {
      report.AddFlag("tree run: " + std::string(rep.status().message()), false);
      return report;
    }
    const auto& entries = rep->bias_trace.entries;
    if (gaps.empty()) {
      gaps.resize(entries.size());
      for (const auto& e : entries) bounds.push_back(e.bound);
    }
    for (size_t i = 0; i < entries.size(); ++i) {
      gaps[i].push_back(entries[i].gap);
    }
  }
  double worst_ratio = 0.0;
  int exceeding = 0;
  size_t worst_leaf = 0;
  for (size_t i = 0; i < gaps.size(); ++i) {
    const double p95 = Quantile(gaps[i], 0.95);
    if (p95 > bounds[i]) ++exceeding;
    if (p95 / bounds[i] > worst_ratio) {
      worst_ratio = p95 / bounds[i];
      worst_leaf = i;
    }
  }
  report.AddInfo(absl::StrFormat("leaves visited per run (T=%d, b=%d)",
                                 schedule.T, schedule.b),
                 static_cast<double>(gaps.size()));
  report.AddUpper("leaves whose 95th-percentile gap exceeds the bound",
                  exceeding, 0);
  report.AddUpper(
      absl::StrFormat("max over leaves of p95(gap)/bound (%d runs, worst leaf "
                      "#%d)",
                      runs, worst_leaf),
      worst_ratio, 1.0);
  return report;
}

VerificationReport VerifyMartingale(int trials, uint64_t seed) {
  VerificationReport report;
  report.suite = "martingale";
  constexpr int kD = 64, kSteps = 50;
  const double kappa =
      2.0 * std::numbers::e * std::log(static_cast<double>(kD));
  std::vector<double> psi(kSteps);
  for (int i = 0; i < kSteps; ++i) psi[i] = 1.0 + 0.5 * (i % 4);
  Rng rng(StableHash({seed, 7}));
  std::bernoulli_distribution coin(0.5);
  std::vector<double> norms(trials);
  std::vector<double> sum(kD);
  for (int trial = 0; trial < trials; ++trial) {
    std::fill(sum.begin(), sum.end(), 0.0);
    // Rademacher increments: ||d_i||_inf = psi_i exactly, so
    // E exp(||d_i||^2 / psi_i^2) = e, the boundary of the assumption.
    for (int i = 0; i < kSteps; ++i) {
      for (double& s : sum) s += coin(rng) ? psi[i] : -psi[i];
    }
    norms[trial] = LpNormUnchecked(sum, Exponent::Infinity());
  }
  for (double tau : {2.0, 3.0}) {
    const MartingaleTail tail = *MartingaleTailBound(kappa, psi, tau);
    const double freq =
        std::count_if(norms.begin(), norms.end(),
                      [&](double v) { return v >= tail.threshold; }) /
        static_cast<double>(trials);
    report.AddUpper(absl::StrFormat("exceedance frequency at tau=%g "
                                    "(threshold %.4g, %d trials)",
                                    tau, tail.threshold, trials),
                    freq, tail.probability);
  }
  return report;
}

VerificationReport VerifyConvexity(int checks, uint64_t seed) {
  VerificationReport report;
  report.suite = "convexity";
  Rng rng(StableHash({seed, 8}));
  std::uniform_int_distribution<int> dim(2, 10);
  for (double pv : {1.1, 1.3, 1.5, 1.9}) {
    const Exponent p = Exponent::Finite(pv);
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < checks; ++i) {
      const int d = dim(rng);
      const auto x = UnitBallPoint(d, p, rng);
      const auto y = UnitBallPoint(d, p, rng);
      min_gap = std::min(min_gap, *UniformConvexityGap(x, y, p));
    }
    report.AddLower(absl::StrFormat("min uniform-convexity gap p=%g (%d pairs)",
                                    pv, checks),
                    min_gap, -1e-12);
  }
  for (double pv : {1.2, 1.5, 1.9}) {
    const Exponent p = Exponent::Finite(pv);
    const Exponent q = *DualExponent(p);
    double worst_opt = 0.0, worst_value = 0.0, worst_norm = 0.0;
    for (int i = 0; i < checks; ++i) {
      const int d = dim(rng);
      const auto z = NormalVector(d, rng);
      const ClosedFormMinimum cf = *ClosedFormMinimizer(z, p);
      const double best = Dot(cf.x_star, z);
      const double zq = LpNormUnchecked(z, q);
      const auto x = UnitBallPoint(d, p, rng);
      worst_opt = std::max(worst_opt, Dot(x, z) - best);
      worst_value = std::max(worst_value, std::abs(best - zq) / zq);
      worst_norm =
          std::max(worst_norm, std::abs(LpNormUnchecked(cf.x_star, p) - 1.0));
    }
    report.AddUpper(absl::StrFormat("closed-form optimality p=%g: max "
                                    "<x,z>-<x*,z> over %d feasible x",
                                    pv, checks),
                    worst_opt, 1e-12);
    report.AddUpper(absl::StrFormat("closed-form value p=%g: max "
                                    "|<x*,z>-||z||_q|/||z||_q",
                                    pv),
                    worst_value, 1e-12);
    report.AddUpper(absl::StrFormat("closed-form norm p=%g: max "
                                    "| ||x*||_p - 1 |",
                                    pv),
                    worst_norm, 1e-12);
  }
  {
    // Risk-to-distance bound on random feasible points, p = 1.5, d = 5.
    const Exponent p = Exponent::Finite(1.5);
    const Exponent q = *DualExponent(p);
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
      const auto z = NormalVector(5, rng);
      const ClosedFormMinimum cf = *ClosedFormMinimizer(z, p);
      const auto x = UnitBallPoint(5, p, rng);
      const double zq = LpNormUnchecked(z, q);
      const double gap = std::max(0.0, zq - Dot(x, z));
      std::vector<double> diff(5);
      for (int j = 0; j < 5; ++j) diff[j] = x[j] - cf.x_star[j];
      worst = std::max(
          worst, LpNormUnchecked(diff, p) - *RiskToDistanceBound(gap, p, zq));
    }
    report.AddUpper("distance minus risk-to-distance bound (1000 points)",
                    worst, 1e-12);
  }
  return report;
}

VerificationReport VerifyGeometry(int checks, uint64_t seed) {
  VerificationReport report;
  report.suite = "geometry";
  Rng rng(StableHash({seed, 9}));
  std::uniform_int_distribution<int> dim(2, 10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Regularity invariants.
  bool regular_ok = true;
  double worst_equiv = -std::numeric_limits<double>::infinity();
  for (double pv : {1.01, 1.1, 1.3, 1.5, 1.7, 2.0}) {
    for (int d : {2, 3, 10, 100, 1000}) {
      const SpaceSpec s = *Regularity(Exponent::Finite(pv), d);
      const double qv = s.q.value();
      regular_ok =
          regular_ok && std::abs(1.0 / pv + 1.0 / qv - 1.0) < 1e-12 &&
          s.kappa_plus == s.r - 1.0 && s.kappa_plus >= 1.0 &&
          s.kappa_plus <= s.kappa &&
          s.kappa <=
              std::min(qv - 1.0, 2.0 * std::numbers::e * std::log(d)) + 1e-12;
      if (d > 100) continue;
      // Norm equivalence ||x||_q^2 <= ||x||_r^2 <= (kappa/kappa_+)||x||_q^2.
      for (int i = 0; i < checks / 20; ++i) {
        std::vector<double> x = NormalVector(d, rng);
        if (i % 2 == 1) {
          for (double& v : x) v = v * v * v;  // heavier-tailed coordinates
        }
        const double nq = LpNormUnchecked(x, s.q);
        const double nr = LpNormUnchecked(x, Exponent::Finite(s.r));
        const double lo = nq * nq, mid = nr * nr,
                     hi = s.kappa / s.kappa_plus * nq * nq;
        worst_equiv =
            std::max({worst_equiv, (lo - mid) / mid, (mid - hi) / hi});
      }
    }
  }
  report.AddFlag(
      "regularity invariants (kappa_+ = r-1, 1 <= kappa_+ <= "
      "kappa <= min{q-1, 2e ln d}, 1/p+1/q=1)",
      regular_ok);
  report.AddUpper("norm equivalence: max relative violation", worst_equiv,
                  1e-12);

  // Smoothness inequality of ||.||_r^2.
  for (double r : {2.0, 3.0, 4.0}) {
    const Exponent re = Exponent::Finite(r);
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < checks; ++i) {
      const int d = dim(rng);
      const auto x = NormalVector(d, rng);
      auto y = NormalVector(d, rng);
      const double scale = std::exp(4.0 * unif(rng) - 2.0);
      for (double& v : y) v *= scale;
      std::vector<double> xy(d);
      for (int j = 0; j < d; ++j) xy[j] = x[j] + y[j];
      const double nx = LpNormUnchecked(x, re), ny = LpNormUnchecked(y, re),
                   nxy = LpNormUnchecked(xy, re);
      const double rhs =
          nx * nx + Dot(SmoothNormGradSq(x, r), y) + (r - 1.0) * ny * ny;
      worst = std::max(worst,
                       (nxy * nxy - rhs) / std::max(nx * nx + ny * ny, 1e-300));
    }
    report.AddUpper(absl::StrFormat("smoothness r=%g: max relative excess of "
                                    "||x+y||^2 over the quadratic bound",
                                    r),
                    worst, 1e-9);
  }

  // Finite differences of the squared-norm gradient, away from the axes.
  {
    double worst = 0.0;
    for (int i = 0; i < checks / 10; ++i) {
      const int d = dim(rng);
      const double r = 2.0 + 3.0 * unif(rng);
      const Exponent re = Exponent::Finite(r);
      std::vector<double> x(d);
      for (double& v : x) {
        v = (0.2 + unif(rng)) * (unif(rng) < 0.5 ? -1.0 : 1.0);
      }
      const auto grad = SmoothNormGradSq(x, r);
      std::vector<double> fd(d);
      const double h = 1e-5;
      for (int j = 0; j < d; ++j) {
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double np = LpNormUnchecked(xp, re), nm = LpNormUnchecked(xm, re);
        fd[j] = (np * np - nm * nm) / (2.0 * h);
      }
      std::vector<double> diff(d);
      for (int j = 0; j < d; ++j) diff[j] = grad[j] - fd[j];
      worst = std::max(worst, LpNormUnchecked(diff, Exponent::Finite(2.0)) /
                                  LpNormUnchecked(grad, Exponent::Finite(2.0)));
    }
    report.AddUpper("gradient vs central differences: max relative error",
                    worst, 1e-5);
  }

  // LMO optimality and scale invariance.
  for (double pv : {1.0, 1.3, 1.5, 2.0}) {
    const Exponent p = Exponent::Finite(pv);
    const Exponent q = *DualExponent(p);
    double worst_value = 0.0, worst_feasible = 0.0, worst_norm = 0.0,
           worst_scale = 0.0;
    for (int i = 0; i < checks; ++i) {
      const int d = dim(rng);
      const auto g = NormalVector(d, rng);
      const double radius = 0.5 + 1.5 * unif(rng);
      const auto v = LmoLpBall(g, p, radius);
      const double target = -radius * LpNormUnchecked(g, q);
      const double scale = std::max(1.0, std::abs(target));
      worst_value = std::max(worst_value, std::abs(Dot(g, v) - target) / scale);
      worst_norm = std::max(worst_norm, LpNormUnchecked(v, p) / radius - 1.0);
      if (i % 100 == 0) {
        for (int k = 0; k < 100; ++k) {
          auto w = UnitBallPoint(d, p, rng);
          for (double& c : w) c *= radius;
          worst_feasible =
              std::max(worst_feasible, (target - Dot(g, w)) / scale);
        }
      }
      for (double c : {1e-3, 7.0, 1e5}) {
        std::vector<double> gs(g);
        for (double& e : gs) e *= c;
        const auto vs = LmoLpBall(gs, p, radius);
        for (int j = 0; j < d; ++j) {
          worst_scale = std::max(worst_scale, std::abs(vs[j] - v[j]) / radius);
        }
      }
    }
    report.AddUpper(
        absl::StrFormat("LMO p=%g: |<g,v> + M||g||_q| (relative)", pv),
        worst_value, 1e-9);
    report.AddUpper(
        absl::StrFormat("LMO p=%g: feasible points beating the LMO", pv),
        worst_feasible, 1e-9);
    report.AddUpper(absl::StrFormat("LMO p=%g: ||v||_p / M - 1", pv),
                    worst_norm, 1e-12);
    report.AddUpper(
        absl::StrFormat("LMO p=%g: change under positive rescaling of g", pv),
        worst_scale, 1e-12);
  }

  // Polytope LMO against brute force.
  {
    bool ok = true;
    for (int i = 0; i < checks / 10; ++i) {
      const int d = dim(rng);
      std::vector<std::vector<double>> verts(3 + i % 7);
      for (auto& v : verts) v = NormalVector(d, rng);
      const Polytope poly = *Polytope::Create(verts);
      const auto g = NormalVector(d, rng);
      const PolytopeLmoResult res = *LmoPolytope(g, poly);
      for (int k = 0; k < poly.size(); ++k) {
        ok = ok && Dot(g, poly.vertex(k)) >= Dot(g, res.vertex);
      }
    }
    report.AddFlag("polytope LMO attains the vertex minimum", ok);
  }
  {
    // Convexity gap on a smaller sample (full run in the convexity suite).
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < checks; ++i) {
      const Exponent p = Exponent::Finite(1.0 + unif(rng));
      const int d = dim(rng);
      min_gap =
          std::min(min_gap, *UniformConvexityGap(UnitBallPoint(d, p, rng),
                                                 UnitBallPoint(d, p, rng), p));
    }
    report.AddLower("uniform-convexity gap over random p in (1,2]", min_gap,
                    -1e-12);
  }
  return report;
}

ExperimentConfig TrendConfig(SolverKind solver, int trials,
                             bool disable_noise) {
  nlohmann::json bias = nlohmann::json::array();
  for (int j = 0; j < 20; ++j) {
    bias.push_back(0.8 * (j % 2 == 0 ? 1.0 : -1.0) * (j + 1) / 20.0);
  }
  nlohmann::json cfg = {
      {"solver", SolverName(solver)},
      {"problem", {{"loss", "linear"}, {"d", 20}, {"bias", bias}}},
      {"n_grid", {1024, 4096, 16384, 65536}},
      {"eps_grid", {1.0}},
      {"delta", 1e-6},
      {"trials", trials},
      {"seed_root", 2026},
      {"disable_noise", disable_noise}};
  if (solver == SolverKind::kTreeSfw) {
    cfg["geometry"] = {{"kind", "lp_ball"}, {"p", 1.5}, {"radius", 1.0}};
  } else {
    cfg["geometry"] = {{"kind", "cross_polytope"}, {"radius", 1.0}};
  }
  return *ParseExperimentConfig(cfg.dump());
}

absl::StatusOr<TrendOutcome> VerifyTrend(SolverKind solver, int trials,
                                         bool disable_noise) {
  const ExperimentConfig cfg = TrendConfig(solver, trials, disable_noise);
  RunOptions options;
  options.unsafe_disable_noise = disable_noise;
  absl::StatusOr<std::vector<RunRow>> rows = RunExperiment(cfg, options);
  if (!rows.ok()) return rows.status();
  absl::StatusOr<std::vector<SweepTrend>> trends = SweepTrends(cfg, *rows);
  if (!trends.ok()) return trends.status();
  const SweepTrend& trend = trends->front();

  TrendOutcome out;
  out.report.suite = absl::StrFormat("trend-%s%s", SolverName(solver),
                                     disable_noise ? "-noiseless" : "");
  for (size_t i = 0; i < trend.n.size(); ++i) {
    out.report.AddInfo(
        absl::StrFormat("median excess risk at n=%g", trend.n[i]),
        trend.medians[i]);
  }
  bool decreasing = true;
  for (size_t i = 1; i < trend.medians.size(); ++i) {
    decreasing = decreasing && trend.medians[i] < trend.medians[i - 1];
  }
  out.report.AddFlag("median excess risk strictly decreasing in n", decreasing);
  out.report.AddUpper(
      absl::StrFormat("log-log slope (bootstrap 95%% CI [%.3f, %.3f])",
                      trend.fit.ci_low, trend.fit.ci_high),
      trend.fit.slope, -0.3);
  if (solver == SolverKind::kPolySfw) {
    out.report.AddUpper("median(n=2^16) / median(n=2^10)",
                        trend.medians.back() / trend.medians.front(), 0.25);
  }
  out.rows = *std::move(rows);
  return out;
}

VerificationReport VerifyBudgetAndTime(const std::vector<RunRow>& rows,
                                       const std::string& label) {
  VerificationReport report;
  report.suite = "budget";
  int64_t worst = std::numeric_limits<int64_t>::min();
  std::map<int64_t, std::vector<double>> times;
  for (const RunRow& r : rows) {
    worst = std::max(worst, r.samples_consumed - r.n);
    times[r.n].push_back(static_cast<double>(r.measured_wall_time_ns));
  }
  report.AddUpper(label + ": max(samples_consumed - n) over all runs",
                  static_cast<double>(worst), 0.0);
  std::vector<double> x, y;
  for (const auto& [n, t] : times) {
    x.push_back(static_cast<double>(n));
    y.push_back(Quantile(t, 0.5));
  }
  absl::StatusOr<AffineFit> fit = FitAffine(x, y);
  if (!fit.ok()) {
    report.AddFlag(label + ": affine fit failed", false);
    return report;
  }
  report.AddInfo(label + ": wall time slope (ns per sample)", fit->slope);
  report.AddLower(label + ": R^2 of affine fit of median wall time vs n",
                  fit->r2, 0.95);
  return report;
}

std::vector<std::string> SuiteNames() {
  return {"gg-moments", "renyi",      "sensitivity", "bias",
          "convexity",  "martingale", "accounting",  "geometry"};
}

absl::StatusOr<VerificationReport> RunSuite(const std::string& name) {
  constexpr uint64_t kSeed = 20260101;
  VerificationReport report;
  if (name == "gg-moments") {
    report = VerifyGgMoments(200000, kSeed);
    report.Merge(VerifyGgLightTail(100000, kSeed));
  } else if (name == "renyi") {
    report = VerifyRenyi();
  } else if (name == "sensitivity") {
    report = VerifySensitivity(200, kSeed);
  } else if (name == "bias") {
    report = VerifyBias(200, kSeed);
  } else if (name == "convexity") {
    report = VerifyConvexity(100000, kSeed);
  } else if (name == "martingale") {
    report = VerifyMartingale(10000, kSeed);
  } else if (name == "accounting") {
    report = VerifyAccounting();
  } else if (name == "geometry") {
    report = VerifyGeometry(10000, kSeed);
  } else {
    return absl::InvalidArgumentError("unknown suite '" + name + "'");
  }
  report.suite = name;
  return report;
}

}  // namespace dpfw
