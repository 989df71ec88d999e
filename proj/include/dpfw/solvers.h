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

#ifndef DPFW_SOLVERS_H_
#define DPFW_SOLVERS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpfw/accounting.h"
#include "dpfw/dataset.h"
#include "dpfw/estimators.h"
#include "dpfw/geometry.h"
#include "dpfw/mechanisms.h"
#include "dpfw/problems.h"

namespace dpfw {

// Smallest n accepted by the tree schedule.
inline constexpr int64_t kTreeMinSamples = 64;

// Switches shared by both solvers.
struct NoiseControls {
  // Zeroes every noise scale. Refused unless unsafe_override is also set.
  bool disable_noise = false;
  bool unsafe_override = false;
};

struct TreeSfwConfig {
  int T = 1;
  int64_t b = 2;
  PrivacyBudget budget = *PrivacyBudget::Create(1.0, 1e-6);
  double L0 = 1.0;
  double L1 = 0.0;
  double M = 2.0;
  // kappa and the smoothing exponent r of the dual norm drive the noise.
  SpaceSpec space;
  // Empty means: origin for balls, first vertex for polytopes.
  std::vector<double> x0;
  uint64_t seed = 0;
  NoiseControls noise;
  // Keep per-leaf trace entries (max gap is tracked regardless).
  bool record_traces = true;
  // Evaluate the high-probability bound at every leaf.
  bool record_bounds = true;
  double beta = 0.05;
  // Keep every consumed dataset index in order (for disjointness checks).
  bool record_indices = false;
};

struct TreeSchedule {
  int T = 0;
  int64_t b = 0;
  // floor(4n / log2(n)^2) before capping.
  int64_t b_uncapped = 0;
  // T b + T (T+1) b / 4, the budget the cap enforces.
  double demand_bound = 0.0;
  // Exact draw count with per-node flooring.
  int64_t draws = 0;
  double sigma2_root = 0.0;
  double sigma2_delta = 0.0;
};

// Exact number of samples drawn by T phases with root batch b: the root
// batch each phase plus floor(b / 2^k) for every right child at depth k.
int64_t TreeSampleDraws(int T, int64_t b);

// T = floor(log2(n)/2), b = floor(4n / log2(n)^2) capped so that
// T b + T(T+1) b / 4 <= n; if the cap leaves b < 2^T, T is lowered.
// Noise variances are gg_calibrate at sensitivities 2 L0 / b and 8 L1 M / b.
absl::StatusOr<TreeSchedule> TreeSfwSchedule(int64_t n, double kappa, double L0,
                                             double L1, double M,
                                             const PrivacyBudget& budget);

struct DfsNode {
  // Path from the root, e.g. "01".
  std::string s;
  int depth = 0;
  // Integer whose binary representation is s.
  int64_t ell = 0;
  bool is_leaf = false;
  bool is_right = false;
  // 2 / (2^{t-1} + ell + 1) at leaves, 0 elsewhere.
  double eta = 0.0;
  // 2^{-depth}; only right children draw samples.
  double batch_fraction = 1.0;
};

// Depth-first order of {0,1}^{<=t} minus the root, left child first.
absl::StatusOr<std::vector<DfsNode>> DfsSchedule(int t);

struct GammaLogEntry {
  int64_t t = 0;
  // F(x^{t+1}) - F*.
  double gamma_next = 0.0;
  // (1-eta) Gamma_t + 2 eta M ||grad F - d_t||_* + eta nu_t
  //   + L1 eta^2 M^2 / 2.
  double rhs = 0.0;
};

struct RunReport {
  std::string solver;
  std::vector<double> x_out;
  // Population excess risk; present when the problem exposes F*.
  bool has_excess_risk = false;
  double excess_risk = 0.0;
  double empirical_risk = 0.0;
  int64_t samples_consumed = 0;
  BiasTrace bias_trace;
  double max_bias_gap = 0.0;
  // Realized report-noisy-min suboptimality per step (polytope solver).
  std::vector<double> nu_trace;
  double max_nu_t = 0.0;
  std::vector<GammaLogEntry> gamma_log;
  // Convex-combination certificate over polytope vertices (empty for balls).
  std::vector<double> vertex_weights;
  // Largest ||x||_p over all iterates (ball backend).
  double max_iterate_norm = 0.0;
  std::vector<int64_t> consumed_indices;
  int64_t wall_time_ns = 0;
  uint64_t seed = 0;
  std::string config_echo;
};

absl::Status CheckNoiseControls(const NoiseControls& noise);

// Tree-based noisy stochastic Frank-Wolfe. Batches are taken in
// order from a seeded permutation of the dataset, so they are disjoint.
absl::StatusOr<RunReport> NoisyTreeSfw(const Dataset& dataset,
                                       const Problem& problem,
                                       const TreeSfwConfig& cfg, Rng& rng);

struct PolySfwConfig {
  double eta = 0.01;
  PrivacyBudget budget = *PrivacyBudget::Create(1.0, 1e-6);
  double L0 = 1.0;
  double L1 = 0.0;
  double M = 2.0;
  // Index of the starting vertex.
  int x0_vertex = 0;
  uint64_t seed = 0;
  NoiseControls noise;
  bool record_traces = true;
  double beta = 0.05;
  bool record_indices = false;
};

// eta = ln(n / ln K) / n with natural logs; K = 1 is treated as K = 2.
absl::StatusOr<double> PolySfwStepSize(int64_t n, int K);

// s_t = max{(1-eta)^t 2 L0 M / n, 2 eta (L1 M^2 + L0 M)}.
double PolySensitivitySchedule(int64_t t, double eta, double L0, double L1,
                               double M, int64_t n);

// Polyhedral stochastic Frank-Wolfe with report-noisy-min. The
// first floor(n/2) rows form the initial batch and the next floor(n/2) rows
// are consumed one per step.
absl::StatusOr<RunReport> PolySfw(const Dataset& dataset,
                                  const Problem& problem,
                                  const PolySfwConfig& cfg, Rng& rng);

// Replays the polyhedral solver's estimator on two datasets with every
// vertex choice forced, and returns max_t max_v |<v, d_t - d'_t>| - s_t.
// Nonpositive means the sensitivity schedule held. forced_vertices needs
// floor(n/2) + 1 entries.
absl::StatusOr<double> ReplaySensitivityCheck(
    const Dataset& dataset, const Dataset& neighbor, const Problem& problem,
    const PolySfwConfig& cfg, const std::vector<int>& forced_vertices);

}  // namespace dpfw

#endif  // DPFW_SOLVERS_H_
