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

// dpfw command-line harness: run, sweep, verify, sample.
//
// Exit codes: 0 success, 1 runtime failure or failed verification, 2 invalid
// input (bad config, unknown suite, bad parameters).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "dpfw/harness.h"
#include "dpfw/mechanisms.h"
#include "dpfw/solvers.h"
#include "dpfw/verification.h"
#include "json.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

struct GlobalFlags {
  std::string out;
  int workers = 1;
  bool unsafe_disable_noise = false;
};

int Fail(int code, const absl::Status& status) {
  std::cerr << "dpfw: " << status << "\n";
  return code;
}

absl::StatusOr<dpfw::ExperimentConfig> LoadChecked(const std::string& path,
                                                   const GlobalFlags& flags) {
  absl::StatusOr<dpfw::ExperimentConfig> cfg = dpfw::LoadExperimentConfig(path);
  if (!cfg.ok()) return cfg.status();
  dpfw::NoiseControls controls;
  controls.disable_noise = cfg->disable_noise || flags.unsafe_disable_noise;
  controls.unsafe_override = flags.unsafe_disable_noise;
  if (absl::Status s = dpfw::CheckNoiseControls(controls); !s.ok()) return s;
  if (flags.workers < 1) {
    return absl::InvalidArgumentError("--workers must be >= 1");
  }
  return cfg;
}

// Runs every cell and writes runs.csv and summary.csv. Returns the exit code;
// fills `rows` and `dir` on success.
int RunAndWrite(const dpfw::ExperimentConfig& cfg, const GlobalFlags& flags,
                std::vector<dpfw::RunRow>& rows, std::string& dir) {
  dpfw::RunOptions options;
  options.workers = flags.workers;
  options.unsafe_disable_noise = flags.unsafe_disable_noise;
  absl::StatusOr<std::vector<dpfw::RunRow>> result =
      dpfw::RunExperiment(cfg, options);
  if (!result.ok()) return Fail(kExitRuntime, result.status());
  rows = *std::move(result);
  dir = dpfw::ResolveOutputDir(flags.out, cfg.output_dir);
  const std::string hash = dpfw::ConfigHash(cfg);
  absl::Status s = dpfw::WriteWithManifest(
      dir + "/runs.csv", dpfw::RowsToCsv(rows), hash, cfg.seed_root);
  if (s.ok()) {
    s = dpfw::WriteWithManifest(dir + "/summary.csv",
                                dpfw::SummaryToCsv(dpfw::Summarize(rows)), hash,
                                cfg.seed_root);
  }
  if (!s.ok()) return Fail(kExitRuntime, s);
  return 0;
}

int CmdRun(const std::string& path, const GlobalFlags& flags) {
  absl::StatusOr<dpfw::ExperimentConfig> cfg = LoadChecked(path, flags);
  if (!cfg.ok()) return Fail(kExitInvalid, cfg.status());
  std::vector<dpfw::RunRow> rows;
  std::string dir;
  if (int code = RunAndWrite(*cfg, flags, rows, dir); code != 0) return code;
  for (const dpfw::CellSummary& c : dpfw::Summarize(rows)) {
    std::cout << absl::StrFormat(
        "n=%d eps=%g runs=%d median_excess_risk=%.6g [q10 %.6g, q90 %.6g]\n",
        c.n, c.eps, c.runs, c.median, c.q10, c.q90);
  }
  std::cout << "wrote " << dir << "/runs.csv and " << dir << "/summary.csv\n";
  return 0;
}

int CmdSweep(const std::string& path, const GlobalFlags& flags) {
  absl::StatusOr<dpfw::ExperimentConfig> cfg = LoadChecked(path, flags);
  if (!cfg.ok()) return Fail(kExitInvalid, cfg.status());
  if (absl::Status s = dpfw::CheckSweepGrid(cfg->n_grid); !s.ok()) {
    return Fail(kExitInvalid, s);
  }
  std::vector<dpfw::RunRow> rows;
  std::string dir;
  if (int code = RunAndWrite(*cfg, flags, rows, dir); code != 0) return code;
  absl::StatusOr<std::vector<dpfw::SweepTrend>> trends =
      dpfw::SweepTrends(*cfg, rows);
  if (!trends.ok()) return Fail(kExitRuntime, trends.status());
  nlohmann::json out = nlohmann::json::array();
  for (const dpfw::SweepTrend& t : *trends) {
    out.push_back({{"eps", t.eps},
                   {"slope", t.fit.slope},
                   {"intercept", t.fit.intercept},
                   {"ci_low", t.fit.ci_low},
                   {"ci_high", t.fit.ci_high},
                   {"flat", t.fit.flat},
                   {"n", t.n},
                   {"median_excess_risk", t.medians}});
    std::cout << absl::StrFormat("eps=%g slope=%.4f 95%% CI [%.4f, %.4f]%s\n",
                                 t.eps, t.fit.slope, t.fit.ci_low,
                                 t.fit.ci_high, t.fit.flat ? " FLAT" : "");
  }
  if (absl::Status s =
          dpfw::WriteWithManifest(dir + "/trend.json", out.dump(2) + "\n",
                                  dpfw::ConfigHash(*cfg), cfg->seed_root);
      !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  return 0;
}

int CmdVerify(const std::string& suite, const GlobalFlags& flags) {
  absl::StatusOr<dpfw::VerificationReport> report = dpfw::RunSuite(suite);
  if (!report.ok()) return Fail(kExitInvalid, report.status());
  const std::string json = report->ToJson() + "\n";
  std::cout << json;
  const std::string dir = dpfw::ResolveOutputDir(flags.out, "");
  if (!dir.empty()) {
    if (absl::Status s = dpfw::WriteWithManifest(
            dir + "/verify_" + suite + ".json", json, "verify:" + suite, 0);
        !s.ok()) {
      return Fail(kExitRuntime, s);
    }
  }
  for (const dpfw::CheckRecord& r : report->records) {
    if (!r.pass) std::cerr << "FAIL: " << r.description << "\n";
  }
  std::cerr << "suite " << suite << ": " << (report->overall ? "PASS" : "FAIL")
            << "\n";
  return report->overall ? 0 : kExitRuntime;
}

int CmdSample(int d, double r, double sigma2, int64_t count, uint64_t seed,
              const GlobalFlags& flags) {
  if (d < 1 || !(r >= 1.0) || !std::isfinite(r) || !(sigma2 >= 0.0) ||
      !std::isfinite(sigma2) || count < 0) {
    return Fail(kExitInvalid,
                absl::InvalidArgumentError(
                    "sample needs d >= 1, finite r >= 1, sigma2 >= 0, "
                    "count >= 0"));
  }
  std::string csv;
  for (int j = 0; j < d; ++j) csv += absl::StrFormat(j ? ",z%d" : "z%d", j);
  csv += "\n";
  dpfw::Rng rng(seed);
  const dpfw::GGParams params{d, r, sigma2, {}};
  std::vector<double> z(d);
  for (int64_t i = 0; i < count; ++i) {
    dpfw::SampleGeneralizedGaussianInto(params, rng, z);
    for (int j = 0; j < d; ++j) {
      csv += absl::StrFormat(j ? ",%.17g" : "%.17g", z[j]);
    }
    csv += "\n";
  }
  const std::string dir = dpfw::ResolveOutputDir(flags.out, "");
  if (dir.empty()) {
    std::cout << csv;
    return 0;
  }
  const std::string tag = absl::StrFormat(
      "sample:d=%d,r=%.17g,sigma2=%.17g,count=%d", d, r, sigma2, count);
  if (absl::Status s =
          dpfw::WriteWithManifest(dir + "/samples.csv", csv, tag, seed);
      !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private stochastic Frank-Wolfe harness"};
  app.set_version_flag("--version", std::string(dpfw::kCodeVersion));
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--out", flags.out,
                 "Output directory (overrides $DPFW_OUT_DIR and the config)");
  app.add_option("--workers", flags.workers, "Parallel workers for cells");
  app.add_flag("--unsafe-disable-noise", flags.unsafe_disable_noise,
               "Run without privacy noise (testing only; NOT private)");

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run every cell of a config");
  run->add_option("config", config_path, "JSON config")->required();
  CLI::App* sweep =
      app.add_subcommand("sweep", "Run a config and fit the excess-risk trend");
  sweep->add_option("config", config_path, "JSON config")->required();

  std::string suite;
  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suites;
  for (const std::string& s : dpfw::SuiteNames()) {
    suites += (suites.empty() ? "" : ", ") + s;
  }
  verify->add_option("suite", suite, "One of: " + suites)->required();

  int d = 0;
  double r = 2.0, sigma2 = 1.0;
  int64_t count = 0;
  uint64_t seed = 0;
  CLI::App* sample =
      app.add_subcommand("sample", "Write generalized Gaussian draws as CSV");
  sample->add_option("d", d)->required();
  sample->add_option("r", r)->required();
  sample->add_option("sigma2", sigma2)->required();
  sample->add_option("count", count)->required();
  sample->add_option("seed", seed)->required();
  for (CLI::App* sub : {run, sweep, verify, sample}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }
  if (*run) return CmdRun(config_path, flags);
  if (*sweep) return CmdSweep(config_path, flags);
  if (*verify) return CmdVerify(suite, flags);
  return CmdSample(d, r, sigma2, count, seed, flags);
}
