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

#ifndef DPFW_VERIFICATION_H_
#define DPFW_VERIFICATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpfw/harness.h"

namespace dpfw {

struct CheckRecord {
  std::string description;
  double measured = 0.0;
  double bound = 0.0;
  // Distance to failure in the direction of the check; >= 0 passes unless
  // the record says otherwise (e.g. informational records always pass).
  double margin = 0.0;
  bool pass = true;
};

struct VerificationReport {
  std::string suite;
  std::vector<CheckRecord> records;
  bool overall = true;

  // measured <= bound.
  void AddUpper(std::string description, double measured, double bound);
  // measured >= bound.
  void AddLower(std::string description, double measured, double bound);
  // |measured - target| <= tol.
  void AddClose(std::string description, double measured, double target,
                double tol);
  void AddFlag(std::string description, bool ok);
  // Recorded for context; never affects the outcome.
  void AddInfo(std::string description, double measured);
  void Merge(const VerificationReport& other);

  std::string ToJson() const;
};

// Suites exposed by `verify`.
std::vector<std::string> SuiteNames();
absl::StatusOr<VerificationReport> RunSuite(const std::string& name);

// Individual checks, parameterized so tests can run them at reduced size.
VerificationReport VerifyGgMoments(int draws, uint64_t seed);
VerificationReport VerifyGgLightTail(int draws, uint64_t seed);
VerificationReport VerifyRenyi();
VerificationReport VerifyAccounting();
VerificationReport VerifySensitivity(int instances, uint64_t seed);
VerificationReport VerifyBias(int runs, uint64_t seed);
VerificationReport VerifyMartingale(int trials, uint64_t seed);
VerificationReport VerifyConvexity(int checks, uint64_t seed);
VerificationReport VerifyGeometry(int checks, uint64_t seed);

// The fixed linear instance used by the trend checks: d = 20, biases
// 0.8 (-1)^j (j+1)/20, and either the l_1.5 unit ball (tree solver) or the
// l1 ball as a cross-polytope (polytope solver).
ExperimentConfig TrendConfig(SolverKind solver, int trials, bool disable_noise);

struct TrendOutcome {
  VerificationReport report;
  std::vector<RunRow> rows;
};

// Runs the grid n in {2^10, 2^12, 2^14, 2^16} at eps = 1, delta = 1e-6 and
// checks strictly decreasing medians plus slope <= -0.3; the polytope
// solver also needs median(2^16) <= median(2^10) / 4.
absl::StatusOr<TrendOutcome> VerifyTrend(SolverKind solver, int trials,
                                         bool disable_noise);

// samples_consumed <= n for every row, and an affine fit of the median wall
// time per n with R^2 >= 0.95.
VerificationReport VerifyBudgetAndTime(const std::vector<RunRow>& rows,
                                       const std::string& label);

}  // namespace dpfw

#endif  // DPFW_VERIFICATION_H_
