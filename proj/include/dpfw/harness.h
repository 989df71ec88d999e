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

#ifndef DPFW_HARNESS_H_
#define DPFW_HARNESS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpfw/geometry.h"
#include "dpfw/problems.h"
#include "dpfw/solvers.h"

namespace dpfw {

inline constexpr char kCodeVersion[] = "dpfw 0.1.0";
inline constexpr char kOutDirEnv[] = "DPFW_OUT_DIR";

enum class SolverKind { kTreeSfw, kPolySfw };

std::string SolverName(SolverKind kind);

struct ProblemDescriptor {
  LossKind loss = LossKind::kLinear;
  int d = 2;
  // Per-coordinate bias of the cube alphabet (features for least squares).
  std::vector<double> bias;
  // Least squares only.
  double feature_bound = 1.0;
  std::vector<double> weights;
  double label_noise = 0.1;
};

enum class GeometryKind { kLpBall, kCrossPolytope, kPolytope };

struct GeometryDescriptor {
  GeometryKind kind = GeometryKind::kLpBall;
  Exponent p = Exponent::Finite(2.0);
  double radius = 1.0;
  // Explicit vertices (kPolytope), measured in the l1 norm.
  std::vector<std::vector<double>> vertices;
};

// Parsed experiment configuration. Unknown keys are rejected.
struct ExperimentConfig {
  SolverKind solver = SolverKind::kTreeSfw;
  ProblemDescriptor problem;
  GeometryDescriptor geometry;
  std::vector<int64_t> n_grid;
  std::vector<double> eps_grid;
  double delta = 1e-6;
  int trials = 1;
  uint64_t seed_root = 0;
  std::string output_dir = "dpfw_out";
  bool disable_noise = false;
  // Wall time is machine dependent, so it is only written when asked for;
  // otherwise the column holds 0 and reruns are byte-identical.
  bool record_wall_time = false;
  // Canonical JSON text of the parsed config, used for manifest hashes.
  std::string canonical;
};

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const std::string& text);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);

// Stable 64-bit mixing (splitmix64 finalizer chained over the words).
uint64_t StableHash(std::initializer_list<uint64_t> words);
// Seed of one (n, eps, trial) cell.
uint64_t CellSeed(uint64_t seed_root, int n_idx, int eps_idx, int trial);
// Seed of the dataset shared by every eps of one (n, trial) pair.
uint64_t DataSeed(uint64_t seed_root, int n_idx, int trial);

absl::StatusOr<Problem> BuildProblem(const ExperimentConfig& cfg);

struct RunRow {
  std::string run_id;
  std::string solver;
  int64_t n = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::string p_or_K;
  int trial = 0;
  uint64_t seed = 0;
  double excess_risk = 0.0;
  int64_t samples_consumed = 0;
  int64_t wall_time_ns = 0;
  double max_bias_gap = 0.0;
  double max_nu_t = 0.0;
  // Not part of the CSV schema.
  int n_idx = 0;
  int eps_idx = 0;
  double empirical_risk = 0.0;
  int64_t measured_wall_time_ns = 0;
};

struct RunOptions {
  int workers = 1;
  // Mirrors --unsafe-disable-noise: disables noise and acknowledges it.
  bool unsafe_disable_noise = false;
};

// Runs one cell: draws the dataset, runs the solver, and fills a row.
absl::StatusOr<RunRow> RunCell(const ExperimentConfig& cfg,
                               const Problem& problem, int n_idx, int eps_idx,
                               int trial, const RunOptions& options);

// Every (n, eps, trial) cell, in grid order regardless of worker count.
absl::StatusOr<std::vector<RunRow>> RunExperiment(const ExperimentConfig& cfg,
                                                  const RunOptions& options);

struct CellSummary {
  int64_t n = 0;
  double eps = 0.0;
  int runs = 0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double median_empirical_risk = 0.0;
};

// Type-7 (linear interpolation) sample quantile; `values` need not be sorted.
double Quantile(std::vector<double> values, double prob);

std::vector<CellSummary> Summarize(const std::vector<RunRow>& rows);

inline constexpr char kRunsCsvHeader[] =
    "run_id,solver,n,eps,delta,p_or_K,trial,seed,excess_risk,"
    "samples_consumed,wall_time_ns,max_bias_gap,max_nu_t";

std::string RowsToCsv(const std::vector<RunRow>& rows);
std::string SummaryToCsv(const std::vector<CellSummary>& summary);
absl::StatusOr<std::vector<RunRow>> ParseRunsCsv(const std::string& text);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Set when the bootstrap interval straddles zero or |slope| < 0.05.
  bool flat = false;
  int points = 0;
};

// Least-squares slope of log(median risk) against log(n). `risks[i]` holds
// the per-trial risks at n[i]; the interval resamples trials within each n.
// Medians at or below zero are floored at 1e-300 before taking logs.
absl::StatusOr<SlopeFit> FitLogLogSlope(
    const std::vector<double>& n, const std::vector<std::vector<double>>& risks,
    int bootstrap_reps, uint64_t seed);

struct AffineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y ~ a + b x with the coefficient of determination.
absl::StatusOr<AffineFit> FitAffine(const std::vector<double>& x,
                                    const std::vector<double>& y);

// Trend of the median excess risk for one eps value of a finished sweep.
struct SweepTrend {
  double eps = 0.0;
  SlopeFit fit;
  std::vector<double> n;
  std::vector<double> medians;
};

absl::StatusOr<std::vector<SweepTrend>> SweepTrends(
    const ExperimentConfig& cfg, const std::vector<RunRow>& rows);

// Sweep precondition: at least 4 grid points, max/min >= 10.
absl::Status CheckSweepGrid(const std::vector<int64_t>& n_grid);

// FNV-1a over the canonical config text, as 16 hex digits.
std::string ConfigHash(const ExperimentConfig& cfg);

// Writes `contents` to `path` and a `<path>.manifest.json` sidecar carrying
// the config hash, seed root and code version.
absl::Status WriteWithManifest(const std::string& path,
                               const std::string& contents,
                               const std::string& config_hash,
                               uint64_t seed_root);

// --out beats the environment override, which beats the config value.
std::string ResolveOutputDir(const std::string& cli_out,
                             const std::string& config_out);

}  // namespace dpfw

#endif  // DPFW_HARNESS_H_
