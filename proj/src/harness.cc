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

#include "dpfw/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"

namespace dpfw {
namespace {

using nlohmann::json;

absl::Status Invalid(const std::string& message) {
  return absl::InvalidArgumentError("invalid config: " + message);
}

absl::Status CheckKeys(const json& object, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!object.is_object()) return Invalid(where + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      return Invalid(absl::StrFormat("unknown key '%s' in %s", key, where));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> GetNumber(const json& object, const char* key,
                                 double fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number()) {
    return Invalid(absl::StrFormat("'%s' must be a number", key));
  }
  return object[key].get<double>();
}

// A number broadcast to length d, or an explicit array of length d.
absl::StatusOr<std::vector<double>> GetVector(const json& object,
                                              const char* key, int d,
                                              double fallback) {
  if (!object.contains(key)) return std::vector<double>(d, fallback);
  const json& v = object[key];
  if (v.is_number()) return std::vector<double>(d, v.get<double>());
  if (!v.is_array() || static_cast<int>(v.size()) != d) {
    return Invalid(absl::StrFormat(
        "'%s' must be a number or an array of length d=%d", key, d));
  }
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) return Invalid(absl::StrFormat("'%s' entries", key));
    out.push_back(e.get<double>());
  }
  return out;
}

absl::StatusOr<Exponent> ParseExponent(const json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") {
    return Exponent::Infinity();
  }
  if (!v.is_number()) return Invalid("'p' must be a number or \"inf\"");
  const double p = v.get<double>();
  if (!(p >= 1.0) || !std::isfinite(p)) return Invalid("'p' must be >= 1");
  return Exponent::Finite(p);
}

json ExponentJson(Exponent p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

json Canonical(const ExperimentConfig& cfg) {
  json problem = {
      {"loss",
       cfg.problem.loss == LossKind::kLinear ? "linear" : "least_squares"},
      {"d", cfg.problem.d},
      {"bias", cfg.problem.bias}};
  if (cfg.problem.loss == LossKind::kLeastSquares) {
    problem["feature_bound"] = cfg.problem.feature_bound;
    problem["weights"] = cfg.problem.weights;
    problem["label_noise"] = cfg.problem.label_noise;
  }
  json geometry;
  switch (cfg.geometry.kind) {
    case GeometryKind::kLpBall:
      geometry = {{"kind", "lp_ball"},
                  {"p", ExponentJson(cfg.geometry.p)},
                  {"radius", cfg.geometry.radius}};
      break;
    case GeometryKind::kCrossPolytope:
      geometry = {{"kind", "cross_polytope"}, {"radius", cfg.geometry.radius}};
      break;
    case GeometryKind::kPolytope:
      geometry = {{"kind", "polytope"}, {"vertices", cfg.geometry.vertices}};
      break;
  }
  return json{{"solver", SolverName(cfg.solver)},
              {"problem", problem},
              {"geometry", geometry},
              {"n_grid", cfg.n_grid},
              {"eps_grid", cfg.eps_grid},
              {"delta", cfg.delta},
              {"trials", cfg.trials},
              {"seed_root", cfg.seed_root},
              {"output_dir", cfg.output_dir},
              {"disable_noise", cfg.disable_noise},
              {"record_wall_time", cfg.record_wall_time}};
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string G17(double v) { return absl::StrFormat("%.17g", v); }

int PolytopeSize(const Problem& problem) {
  const auto* poly = std::get_if<Polytope>(&problem.set());
  return poly == nullptr ? 0 : poly->size();
}

}  // namespace

std::string SolverName(SolverKind kind) {
  return kind == SolverKind::kTreeSfw ? "tree_sfw" : "poly_sfw";
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    return Invalid(std::string("malformed JSON: ") + e.what());
  }
  if (absl::Status s =
          CheckKeys(root, "config",
                    {"solver", "problem", "geometry", "n_grid", "eps_grid",
                     "delta", "trials", "seed_root", "output_dir",
                     "disable_noise", "record_wall_time"});
      !s.ok()) {
    return s;
  }
  for (const char* key :
       {"solver", "problem", "geometry", "n_grid", "eps_grid"}) {
    if (!root.contains(key)) {
      return Invalid(absl::StrFormat("missing required key '%s'", key));
    }
  }
  ExperimentConfig cfg;

  if (!root["solver"].is_string()) return Invalid("'solver' must be a string");
  const std::string solver = root["solver"].get<std::string>();
  if (solver == "tree_sfw") {
    cfg.solver = SolverKind::kTreeSfw;
  } else if (solver == "poly_sfw") {
    cfg.solver = SolverKind::kPolySfw;
  } else {
    return Invalid("unknown solver '" + solver + "'");
  }

  const json& pj = root["problem"];
  if (absl::Status s = CheckKeys(
          pj, "problem",
          {"loss", "d", "bias", "feature_bound", "weights", "label_noise"});
      !s.ok()) {
    return s;
  }
  const std::string loss = pj.value("loss", std::string("linear"));
  if (loss == "linear") {
    cfg.problem.loss = LossKind::kLinear;
  } else if (loss == "least_squares") {
    cfg.problem.loss = LossKind::kLeastSquares;
  } else {
    return Invalid("unknown loss '" + loss + "'");
  }
  if (!pj.contains("d") || !pj["d"].is_number_integer() ||
      pj["d"].get<int>() < 1) {
    return Invalid("problem.d must be a positive integer");
  }
  cfg.problem.d = pj["d"].get<int>();
  const int d = cfg.problem.d;
  absl::StatusOr<std::vector<double>> bias = GetVector(pj, "bias", d, 0.0);
  if (!bias.ok()) return bias.status();
  cfg.problem.bias = *bias;
  for (double b : cfg.problem.bias) {
    if (!(b >= -1.0 && b <= 1.0))
      return Invalid("bias entries must be in [-1, 1]");
  }
  if (cfg.problem.loss == LossKind::kLeastSquares) {
    absl::StatusOr<double> a = GetNumber(pj, "feature_bound", 1.0);
    absl::StatusOr<std::vector<double>> w = GetVector(pj, "weights", d, 0.0);
    absl::StatusOr<double> h = GetNumber(pj, "label_noise", 0.1);
    if (!a.ok()) return a.status();
    if (!w.ok()) return w.status();
    if (!h.ok()) return h.status();
    if (!(*a > 0.0) || !(*h >= 0.0)) {
      return Invalid("feature_bound must be > 0 and label_noise >= 0");
    }
    cfg.problem.feature_bound = *a;
    cfg.problem.weights = *w;
    cfg.problem.label_noise = *h;
  } else if (pj.contains("feature_bound") || pj.contains("weights") ||
             pj.contains("label_noise")) {
    return Invalid("least-squares keys given for a linear problem");
  }

  const json& gj = root["geometry"];
  if (absl::Status s =
          CheckKeys(gj, "geometry", {"kind", "p", "radius", "vertices"});
      !s.ok()) {
    return s;
  }
  const std::string kind = gj.value("kind", std::string(""));
  if (kind == "lp_ball") {
    cfg.geometry.kind = GeometryKind::kLpBall;
    if (!gj.contains("p")) return Invalid("lp_ball needs 'p'");
    absl::StatusOr<Exponent> p = ParseExponent(gj["p"]);
    if (!p.ok()) return p.status();
    cfg.geometry.p = *p;
  } else if (kind == "cross_polytope") {
    cfg.geometry.kind = GeometryKind::kCrossPolytope;
    cfg.geometry.p = Exponent::Finite(1.0);
  } else if (kind == "polytope") {
    cfg.geometry.kind = GeometryKind::kPolytope;
    cfg.geometry.p = Exponent::Finite(1.0);
    if (!gj.contains("vertices") || !gj["vertices"].is_array()) {
      return Invalid("polytope needs a 'vertices' array");
    }
    try {
      cfg.geometry.vertices =
          gj["vertices"].get<std::vector<std::vector<double>>>();
    } catch (const json::exception&) {
      return Invalid("'vertices' must be an array of numeric arrays");
    }
    for (const auto& v : cfg.geometry.vertices) {
      if (static_cast<int>(v.size()) != d) {
        return Invalid("vertex dimension differs from problem.d");
      }
    }
  } else {
    return Invalid("geometry.kind must be lp_ball, cross_polytope or polytope");
  }
  if (kind != "lp_ball" && gj.contains("p")) {
    return Invalid("'p' only applies to lp_ball");
  }
  if (kind == "polytope" && gj.contains("radius")) {
    return Invalid("'radius' does not apply to explicit polytopes");
  }
  absl::StatusOr<double> radius = GetNumber(gj, "radius", 1.0);
  if (!radius.ok()) return radius.status();
  if (!(*radius > 0.0)) return Invalid("radius must be positive");
  cfg.geometry.radius = *radius;

  const json& ng = root["n_grid"];
  if (!ng.is_array() || ng.empty()) return Invalid("n_grid must be nonempty");
  for (const json& v : ng) {
    if (!v.is_number_integer() || v.get<int64_t>() < 1) {
      return Invalid("n_grid entries must be positive integers");
    }
    cfg.n_grid.push_back(v.get<int64_t>());
  }
  const json& eg = root["eps_grid"];
  if (!eg.is_array() || eg.empty()) return Invalid("eps_grid must be nonempty");
  for (const json& v : eg) {
    if (!v.is_number() || !(v.get<double>() > 0.0)) {
      return Invalid("eps_grid entries must be positive numbers");
    }
    cfg.eps_grid.push_back(v.get<double>());
  }
  absl::StatusOr<double> delta = GetNumber(root, "delta", 1e-6);
  if (!delta.ok()) return delta.status();
  if (!(*delta > 0.0 && *delta < 1.0))
    return Invalid("delta must be in (0, 1)");
  cfg.delta = *delta;
  if (root.contains("trials")) {
    if (!root["trials"].is_number_integer() || root["trials"].get<int>() < 1) {
      return Invalid("trials must be an integer >= 1");
    }
    cfg.trials = root["trials"].get<int>();
  }
  if (root.contains("seed_root")) {
    if (!root["seed_root"].is_number_unsigned() &&
        !(root["seed_root"].is_number_integer() &&
          root["seed_root"].get<int64_t>() >= 0)) {
      return Invalid("seed_root must be a nonnegative integer");
    }
    cfg.seed_root = root["seed_root"].get<uint64_t>();
  }
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) return Invalid("output_dir: string");
    cfg.output_dir = root["output_dir"].get<std::string>();
  }
  for (const char* key : {"disable_noise", "record_wall_time"}) {
    if (root.contains(key) && !root[key].is_boolean()) {
      return Invalid(absl::StrFormat("'%s' must be a boolean", key));
    }
  }
  cfg.disable_noise = root.value("disable_noise", false);
  cfg.record_wall_time = root.value("record_wall_time", false);

  // Solver / geometry compatibility and sample-size floors.
  if (cfg.solver == SolverKind::kPolySfw) {
    if (cfg.geometry.kind == GeometryKind::kLpBall) {
      return Invalid("poly_sfw needs a polytope or cross_polytope geometry");
    }
    for (int64_t n : cfg.n_grid) {
      if (n < 4) return Invalid("poly_sfw needs every n >= 4");
    }
  } else {
    if (cfg.geometry.kind == GeometryKind::kLpBall) {
      if (absl::StatusOr<SpaceSpec> s = Regularity(cfg.geometry.p, d);
          !s.ok()) {
        return Invalid(std::string(s.status().message()));
      }
    }
    for (int64_t n : cfg.n_grid) {
      if (n < kTreeMinSamples) {
        return Invalid(
            absl::StrFormat("tree_sfw needs every n >= %d", kTreeMinSamples));
      }
    }
  }
  cfg.canonical = Canonical(cfg).dump();
  // Building the problem validates the remaining numeric ranges.
  if (absl::StatusOr<Problem> p = BuildProblem(cfg); !p.ok()) {
    return Invalid(std::string(p.status().message()));
  }
  return cfg;
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::InvalidArgumentError("cannot read config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseExperimentConfig(buffer.str());
}

uint64_t StableHash(std::initializer_list<uint64_t> words) {
  uint64_t h = 0x243f6a8885a308d3ULL;
  for (uint64_t w : words) h = SplitMix64(h ^ SplitMix64(w));
  return h;
}

uint64_t CellSeed(uint64_t seed_root, int n_idx, int eps_idx, int trial) {
  return StableHash({seed_root, 0x63656c6cULL, static_cast<uint64_t>(n_idx),
                     static_cast<uint64_t>(eps_idx),
                     static_cast<uint64_t>(trial)});
}

uint64_t DataSeed(uint64_t seed_root, int n_idx, int trial) {
  return StableHash({seed_root, 0x64617461ULL, static_cast<uint64_t>(n_idx),
                     static_cast<uint64_t>(trial)});
}

absl::StatusOr<Problem> BuildProblem(const ExperimentConfig& cfg) {
  FeasibleSet set;
  switch (cfg.geometry.kind) {
    case GeometryKind::kLpBall:
      set = LpBall{cfg.geometry.p, cfg.geometry.radius};
      break;
    case GeometryKind::kCrossPolytope:
      set = Polytope::CrossPolytope(cfg.problem.d, cfg.geometry.radius);
      break;
    case GeometryKind::kPolytope: {
      absl::StatusOr<Polytope> poly = Polytope::Create(cfg.geometry.vertices);
      if (!poly.ok()) return poly.status();
      set = *std::move(poly);
      break;
    }
  }
  if (cfg.problem.loss == LossKind::kLinear) {
    return Problem::Linear(std::move(set), cfg.problem.bias);
  }
  LeastSquaresSpec spec;
  spec.feature_bound = cfg.problem.feature_bound;
  spec.feature_bias = cfg.problem.bias;
  spec.weights = cfg.problem.weights;
  spec.label_noise = cfg.problem.label_noise;
  return Problem::LeastSquares(std::move(set), std::move(spec));
}

absl::StatusOr<RunRow> RunCell(const ExperimentConfig& cfg,
                               const Problem& problem, int n_idx, int eps_idx,
                               int trial, const RunOptions& options) {
  const int64_t n = cfg.n_grid[n_idx];
  const double eps = cfg.eps_grid[eps_idx];
  auto where = [&](const absl::Status& s) {
    return absl::Status(s.code(),
                        absl::StrFormat("cell n=%d eps=%g trial=%d: %s", n, eps,
                                        trial, s.message()));
  };
  absl::StatusOr<PrivacyBudget> budget = PrivacyBudget::Create(eps, cfg.delta);
  if (!budget.ok()) return where(budget.status());

  Rng data_rng(DataSeed(cfg.seed_root, n_idx, trial));
  const Dataset data = problem.Sample(n, data_rng);
  const uint64_t seed = CellSeed(cfg.seed_root, n_idx, eps_idx, trial);
  Rng rng(seed);
  NoiseControls noise;
  noise.disable_noise = cfg.disable_noise || options.unsafe_disable_noise;
  noise.unsafe_override = options.unsafe_disable_noise;

  RunRow row;
  row.run_id = absl::StrFormat("n%d-e%d-t%d", n_idx, eps_idx, trial);
  row.solver = SolverName(cfg.solver);
  row.n = n;
  row.eps = eps;
  row.delta = cfg.delta;
  row.trial = trial;
  row.seed = seed;
  row.n_idx = n_idx;
  row.eps_idx = eps_idx;
  const int K = PolytopeSize(problem);
  row.p_or_K = K > 0 ? absl::StrCat(K) : problem.p().ToString();

  absl::StatusOr<RunReport> report;
  if (cfg.solver == SolverKind::kTreeSfw) {
    SpaceSpec space;
    if (K > 0) {
      absl::StatusOr<PolyhedralRegularityConstants> reg =
          PolyhedralRegularity(K);
      if (!reg.ok()) return where(reg.status());
      space.p = Exponent::Finite(1.0);
      space.q = Exponent::Infinity();
      space.d = problem.dim();
      space.kappa = reg->kappa;
      space.r = reg->smoothing_exponent;
      space.kappa_plus = reg->kappa_plus;
    } else {
      absl::StatusOr<SpaceSpec> reg = Regularity(problem.p(), problem.dim());
      if (!reg.ok()) return where(reg.status());
      space = *reg;
    }
    absl::StatusOr<TreeSchedule> schedule = TreeSfwSchedule(
        n, space.kappa, problem.L0(), problem.L1(), problem.M(), *budget);
    if (!schedule.ok()) return where(schedule.status());
    TreeSfwConfig tc;
    tc.T = schedule->T;
    tc.b = schedule->b;
    tc.budget = *budget;
    tc.L0 = problem.L0();
    tc.L1 = problem.L1();
    tc.M = problem.M();
    tc.space = space;
    tc.seed = seed;
    tc.noise = noise;
    tc.record_traces = false;
    tc.record_bounds = false;
    report = NoisyTreeSfw(data, problem, tc, rng);
  } else {
    absl::StatusOr<double> eta = PolySfwStepSize(n, K);
    if (!eta.ok()) return where(eta.status());
    PolySfwConfig pc;
    pc.eta = *eta;
    pc.budget = *budget;
    pc.L0 = problem.L0();
    pc.L1 = problem.L1();
    pc.M = problem.M();
    pc.seed = seed;
    pc.noise = noise;
    pc.record_traces = false;
    report = PolySfw(data, problem, pc, rng);
  }
  if (!report.ok()) return where(report.status());
  if (report->samples_consumed > n) {
    return where(absl::InternalError(
        absl::StrFormat("sample budget exceeded: consumed %d of %d",
                        report->samples_consumed, n)));
  }
  row.excess_risk = report->excess_risk;
  row.samples_consumed = report->samples_consumed;
  row.measured_wall_time_ns = report->wall_time_ns;
  row.wall_time_ns = cfg.record_wall_time ? report->wall_time_ns : 0;
  row.max_bias_gap = report->max_bias_gap;
  row.max_nu_t = report->max_nu_t;
  row.empirical_risk = report->empirical_risk;
  return row;
}

absl::StatusOr<std::vector<RunRow>> RunExperiment(const ExperimentConfig& cfg,
                                                  const RunOptions& options) {
  if (cfg.disable_noise && !options.unsafe_disable_noise) {
    return absl::FailedPreconditionError(
        "config disables noise but --unsafe-disable-noise was not given");
  }
  absl::StatusOr<Problem> problem = BuildProblem(cfg);
  if (!problem.ok()) return problem.status();

  struct Cell {
    int n_idx, eps_idx, trial;
  };
  std::vector<Cell> cells;
  for (int i = 0; i < static_cast<int>(cfg.n_grid.size()); ++i) {
    for (int j = 0; j < static_cast<int>(cfg.eps_grid.size()); ++j) {
      for (int t = 0; t < cfg.trials; ++t) cells.push_back({i, j, t});
    }
  }
  std::vector<absl::StatusOr<RunRow>> results(cells.size(),
                                              absl::UnknownError("not run"));
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t c = next++; c < cells.size(); c = next++) {
      results[c] = RunCell(cfg, *problem, cells[c].n_idx, cells[c].eps_idx,
                           cells[c].trial, options);
    }
  };
  const int workers =
      std::clamp(options.workers, 1, static_cast<int>(cells.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  std::vector<RunRow> rows;
  rows.reserve(cells.size());
  for (auto& r : results) {
    if (!r.ok()) return r.status();
    rows.push_back(*std::move(r));
  }
  return rows;
}

double Quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * prob;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

std::vector<CellSummary> Summarize(const std::vector<RunRow>& rows) {
  std::map<std::pair<int64_t, double>, std::vector<const RunRow*>> groups;
  std::vector<std::pair<int64_t, double>> order;
  for (const RunRow& r : rows) {
    auto key = std::make_pair(r.n, r.eps);
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<CellSummary> out;
  for (const auto& key : order) {
    std::vector<double> risk, emp;
    for (const RunRow* r : groups[key]) {
      risk.push_back(r->excess_risk);
      emp.push_back(r->empirical_risk);
    }
    CellSummary s;
    s.n = key.first;
    s.eps = key.second;
    s.runs = static_cast<int>(risk.size());
    s.median = Quantile(risk, 0.5);
    s.q10 = Quantile(risk, 0.1);
    s.q90 = Quantile(risk, 0.9);
    s.median_empirical_risk = Quantile(emp, 0.5);
    out.push_back(s);
  }
  return out;
}

std::string RowsToCsv(const std::vector<RunRow>& rows) {
  std::string out = std::string(kRunsCsvHeader) + "\n";
  for (const RunRow& r : rows) {
    out += absl::StrCat(r.run_id, ",", r.solver, ",", r.n, ",", G17(r.eps), ",",
                        G17(r.delta), ",", r.p_or_K, ",", r.trial, ",", r.seed,
                        ",", G17(r.excess_risk), ",", r.samples_consumed, ",",
                        r.wall_time_ns, ",", G17(r.max_bias_gap), ",",
                        G17(r.max_nu_t), "\n");
  }
  return out;
}

std::string SummaryToCsv(const std::vector<CellSummary>& summary) {
  std::string out =
      "n,eps,runs,median_excess_risk,q10_excess_risk,q90_excess_risk,"
      "median_empirical_risk\n";
  for (const CellSummary& s : summary) {
    out += absl::StrCat(s.n, ",", G17(s.eps), ",", s.runs, ",", G17(s.median),
                        ",", G17(s.q10), ",", G17(s.q90), ",",
                        G17(s.median_empirical_risk), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<RunRow>> ParseRunsCsv(const std::string& text) {
  std::vector<std::string> lines =
      absl::StrSplit(text, '\n', absl::SkipEmpty());
  if (lines.empty() || lines[0] != kRunsCsvHeader) {
    return absl::InvalidArgumentError("unexpected CSV header");
  }
  std::vector<RunRow> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = absl::StrSplit(lines[i], ',');
    if (f.size() != 13) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: expected 13 fields", i + 1));
    }
    RunRow r;
    r.run_id = f[0];
    r.solver = f[1];
    r.p_or_K = f[5];
    bool ok = absl::SimpleAtoi(f[2], &r.n) && absl::SimpleAtod(f[3], &r.eps) &&
              absl::SimpleAtod(f[4], &r.delta) &&
              absl::SimpleAtoi(f[6], &r.trial) &&
              absl::SimpleAtoi(f[7], &r.seed) &&
              absl::SimpleAtod(f[8], &r.excess_risk) &&
              absl::SimpleAtoi(f[9], &r.samples_consumed) &&
              absl::SimpleAtoi(f[10], &r.wall_time_ns) &&
              absl::SimpleAtod(f[11], &r.max_bias_gap) &&
              absl::SimpleAtod(f[12], &r.max_nu_t);
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: malformed field", i + 1));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

// Slope and intercept of y on x by ordinary least squares.
std::pair<double, double> Ols(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

double SafeLog(double v) { return std::log(std::max(v, 1e-300)); }

}  // namespace

absl::StatusOr<SlopeFit> FitLogLogSlope(
    const std::vector<double>& n, const std::vector<std::vector<double>>& risks,
    int bootstrap_reps, uint64_t seed) {
  if (n.size() != risks.size() || n.size() < 2) {
    return absl::InvalidArgumentError("slope fit needs >= 2 matched points");
  }
  for (const auto& r : risks) {
    if (r.empty()) return absl::InvalidArgumentError("empty risk cell");
  }
  std::vector<double> lx(n.size()), ly(n.size());
  for (size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0)) return absl::InvalidArgumentError("n must be positive");
    lx[i] = std::log(n[i]);
    ly[i] = SafeLog(Quantile(risks[i], 0.5));
  }
  SlopeFit fit;
  fit.points = static_cast<int>(n.size());
  std::tie(fit.slope, fit.intercept) = Ols(lx, ly);

  Rng rng(seed);
  std::vector<double> slopes;
  slopes.reserve(bootstrap_reps);
  std::vector<double> resample;
  for (int rep = 0; rep < bootstrap_reps; ++rep) {
    std::vector<double> by(n.size());
    for (size_t i = 0; i < n.size(); ++i) {
      std::uniform_int_distribution<size_t> pick(0, risks[i].size() - 1);
      resample.resize(risks[i].size());
      for (double& v : resample) v = risks[i][pick(rng)];
      by[i] = SafeLog(Quantile(resample, 0.5));
    }
    slopes.push_back(Ols(lx, by).first);
  }
  if (slopes.empty()) {
    fit.ci_low = fit.ci_high = fit.slope;
  } else {
    fit.ci_low = Quantile(slopes, 0.025);
    fit.ci_high = Quantile(slopes, 0.975);
  }
  fit.flat =
      std::abs(fit.slope) < 0.05 || (fit.ci_low <= 0.0 && fit.ci_high >= 0.0);
  return fit;
}

absl::StatusOr<AffineFit> FitAffine(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    return absl::InvalidArgumentError("affine fit needs >= 2 matched points");
  }
  AffineFit fit;
  std::tie(fit.slope, fit.intercept) = Ols(x, y);
  double my = 0.0;
  for (double v : y) my += v;
  my /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - my) * (y[i] - my);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

absl::Status CheckSweepGrid(const std::vector<int64_t>& n_grid) {
  if (n_grid.size() < 4) {
    return absl::InvalidArgumentError(
        "invalid config: a sweep needs at least 4 n-grid points");
  }
  const auto [lo, hi] = std::minmax_element(n_grid.begin(), n_grid.end());
  if (static_cast<double>(*hi) < 10.0 * static_cast<double>(*lo)) {
    return absl::InvalidArgumentError(
        "invalid config: the sweep n-grid must span at least a factor of 10");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<SweepTrend>> SweepTrends(
    const ExperimentConfig& cfg, const std::vector<RunRow>& rows) {
  std::vector<SweepTrend> trends;
  for (int j = 0; j < static_cast<int>(cfg.eps_grid.size()); ++j) {
    SweepTrend trend;
    trend.eps = cfg.eps_grid[j];
    std::vector<std::vector<double>> risks(cfg.n_grid.size());
    for (const RunRow& r : rows) {
      if (r.eps_idx == j) risks[r.n_idx].push_back(r.excess_risk);
    }
    for (size_t i = 0; i < cfg.n_grid.size(); ++i) {
      trend.n.push_back(static_cast<double>(cfg.n_grid[i]));
      trend.medians.push_back(Quantile(risks[i], 0.5));
    }
    absl::StatusOr<SlopeFit> fit = FitLogLogSlope(
        trend.n, risks, 1000,
        StableHash({cfg.seed_root, 0x626f6f74ULL, static_cast<uint64_t>(j)}));
    if (!fit.ok()) return fit.status();
    trend.fit = *fit;
    trends.push_back(std::move(trend));
  }
  return trends;
}

std::string ConfigHash(const ExperimentConfig& cfg) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : cfg.canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return absl::StrFormat("%016x", h);
}

absl::Status WriteWithManifest(const std::string& path,
                               const std::string& contents,
                               const std::string& config_hash,
                               uint64_t seed_root) {
  std::error_code ec;
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::filesystem::create_directories(target.parent_path(), ec);
    if (ec) {
      return absl::UnavailableError("cannot create " +
                                    target.parent_path().string());
    }
  }
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return absl::UnavailableError("cannot write " + path);
    out << contents;
    if (!out) return absl::DataLossError("short write to " + path);
  }
  const json manifest = {{"file", target.filename().string()},
                         {"config_hash", config_hash},
                         {"seed_root", seed_root},
                         {"code_version", kCodeVersion}};
  std::ofstream out(path + ".manifest.json", std::ios::trunc);
  if (!out) return absl::UnavailableError("cannot write manifest for " + path);
  out << manifest.dump(2) << "\n";
  return absl::OkStatus();
}

std::string ResolveOutputDir(const std::string& cli_out,
                             const std::string& config_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env) {
    return env;
  }
  return config_out;
}

}  // namespace dpfw
