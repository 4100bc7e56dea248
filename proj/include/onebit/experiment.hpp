#pragma once

// Seeded Monte Carlo driver: single trials, lambda sweeps, the
// hyperplane-tessellation probe and the convergence-bound diagnostic.
//
// Every random object of a trial is generated from
//   trial_seed = derive_trial_seed(master_seed, lambda, trial_index)
// through independent sub-streams (stream_seed):
//   0 ground truth, 1 sensing ensemble, 2 measurement noise,
//   3 dithers, 4 SVP-RKA row selection.
// Results therefore do not depend on how trials are scheduled.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "onebit/error.hpp"
#include "onebit/linalg.hpp"
#include "onebit/quantizer.hpp"
#include "onebit/random.hpp"
#include "onebit/sensing.hpp"
#include "onebit/solvers.hpp"
#include "onebit/stats.hpp"

namespace onebit {

enum class DitherRule { beta_over_3, fixed };
enum class DitherCalibration { clean, noisy };

struct SolverSettings {
  double budget_epochs = 50.0;  // max_iters = round(budget_epochs * n * m)
  double violation_tol = 1e-6;
  std::size_t trace_every = 0;  // 0: one epoch (n * m iterations)
};

struct ExperimentConfig {
  Index n1 = 30;
  Index n2 = 30;
  Index rank = 2;
  std::vector<double> lambda_grid = {8.0, 16.0, 32.0, 64.0};
  Index m = 1;
  std::size_t trials = 100;
  DitherRule dither_rule = DitherRule::beta_over_3;
  double dither_sigma = 1.0;  // used by DitherRule::fixed
  DynamicRangeRule dynamic_range = DynamicRangeRule::max_abs;
  DitherCalibration dither_calibration = DitherCalibration::clean;
  double noise_std = 0.0;
  bool normalize_truth = true;
  bool record_kappa = true;
  SolverSettings solver;
  std::uint64_t master_seed = 20240101;
};

// n = round(lambda * n1 * rank).
inline Index measurements_for(const ExperimentConfig& cfg, double lambda) {
  return static_cast<Index>(std::llround(lambda * static_cast<double>(cfg.n1 * cfg.rank)));
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.n1 < 1 || cfg.n2 < 1) throw ConfigError("n1 and n2 must be >= 1");
  if (cfg.rank < 1 || cfg.rank > std::min(cfg.n1, cfg.n2)) {
    throw ConfigError("rank must lie in [1, min(n1, n2)]");
  }
  if (cfg.lambda_grid.empty()) throw ConfigError("lambda_grid must not be empty");
  for (const double lambda : cfg.lambda_grid) {
    if (!(lambda > 0.0) || !std::isfinite(lambda) || measurements_for(cfg, lambda) < 1) {
      throw ConfigError("lambda " + std::to_string(lambda) + " yields no measurements");
    }
  }
  if (cfg.m < 1) throw ConfigError("m must be >= 1");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (!(cfg.dither_sigma >= 0.0) || !std::isfinite(cfg.dither_sigma)) {
    throw ConfigError("dither_sigma must be finite and >= 0");
  }
  if (!(cfg.noise_std >= 0.0) || !std::isfinite(cfg.noise_std)) {
    throw ConfigError("noise_std must be finite and >= 0");
  }
  if (!(cfg.solver.budget_epochs >= 0.0) || !std::isfinite(cfg.solver.budget_epochs)) {
    throw ConfigError("solver.budget_epochs must be finite and >= 0");
  }
  if (!(cfg.solver.violation_tol >= 0.0)) throw ConfigError("solver.violation_tol must be >= 0");
}

// Everything a trial needs before any solver runs.
struct TrialInstance {
  double lambda = 0.0;
  Index n = 0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  GroundTruth truth;
  SensingEnsemble ensemble;
  Vector measurements;  // observed y (noisy when noise_std > 0)
  double dynamic_range = 0.0;
  DitherScale dither;
  OneBitRecord record;
};

inline TrialInstance build_instance(const ExperimentConfig& cfg, double lambda,
                                    std::uint64_t trial) {
  validate(cfg);
  TrialInstance inst;
  inst.lambda = lambda;
  inst.n = measurements_for(cfg, lambda);
  inst.trial = trial;
  inst.seed = derive_trial_seed(cfg.master_seed, lambda, trial);

  inst.truth = generate_low_rank(cfg.n1, cfg.n2, cfg.rank, cfg.normalize_truth,
                                 stream_seed(inst.seed, 0));
  inst.ensemble = generate_gaussian_ensemble(inst.n, cfg.n1, cfg.n2, stream_seed(inst.seed, 1));
  const Vector clean = apply_operator(inst.ensemble, inst.truth.X);
  inst.measurements = clean;
  if (cfg.noise_std > 0.0) {
    Rng noise(stream_seed(inst.seed, 2));
    for (Index j = 0; j < inst.n; ++j) inst.measurements(j) += cfg.noise_std * noise.normal();
  }
  inst.dynamic_range = dynamic_range(
      cfg.dither_calibration == DitherCalibration::clean ? clean : inst.measurements,
      cfg.dynamic_range);
  inst.dither = cfg.dither_rule == DitherRule::fixed
                    ? DitherScale{cfg.dither_sigma, false}
                    : dither_scale_beta_over_3(inst.dynamic_range);
  const Matrix gamma =
      generate_dithers({cfg.m, inst.dither.sigma, stream_seed(inst.seed, 3)}, inst.n);
  inst.record = quantize(inst.measurements, gamma);
  return inst;
}

inline RkaConfig solver_config(const ExperimentConfig& cfg, const TrialInstance& inst) {
  const double epoch = static_cast<double>(inst.n * cfg.m);
  RkaConfig rka;
  rka.max_iters = static_cast<std::size_t>(std::llround(cfg.solver.budget_epochs * epoch));
  rka.violation_tol = cfg.solver.violation_tol;
  rka.seed = stream_seed(inst.seed, 4);
  rka.trace_every =
      cfg.solver.trace_every > 0 ? cfg.solver.trace_every : static_cast<std::size_t>(epoch);
  return rka;
}

struct AlgorithmOutcome {
  double rel_error = 0.0;
  double fro_error = 0.0;
  std::size_t iterations = 0;
  double final_violation = 0.0;
  double runtime_ms = 0.0;
};

inline constexpr const char* kSvpRka = "svp_rka";
inline constexpr const char* kHsvt = "hsvt";

struct TrialResult {
  double lambda = 0.0;
  Index n = 0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double kappa_v = std::numeric_limits<double>::quiet_NaN();  // NaN when not recorded
  double dither_sigma = 0.0;
  bool sigma_floored = false;
  AlgorithmOutcome svp_rka;
  AlgorithmOutcome hsvt;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace detail

inline TrialResult run_trial(const ExperimentConfig& cfg, double lambda, std::uint64_t trial) {
  const TrialInstance inst = build_instance(cfg, lambda, trial);
  const Matrix& truth = inst.truth.X;
  const double truth_norm = inst.truth.frob_norm;

  TrialResult out;
  out.lambda = lambda;
  out.n = inst.n;
  out.trial = trial;
  out.seed = inst.seed;
  out.dither_sigma = inst.dither.sigma;
  out.sigma_floored = inst.dither.floored;

  auto started = std::chrono::steady_clock::now();
  const auto solved = svp_rka(inst.record, inst.ensemble, cfg.rank,
                              Matrix::Zero(cfg.n1, cfg.n2), solver_config(cfg, inst));
  out.svp_rka.runtime_ms = detail::elapsed_ms(started);
  out.svp_rka.fro_error = (solved.solution - truth).norm();
  out.svp_rka.rel_error = out.svp_rka.fro_error / truth_norm;
  out.svp_rka.iterations = solved.trace.iterations;
  out.svp_rka.final_violation = solved.trace.final_violation;

  started = std::chrono::steady_clock::now();
  const Matrix hsvt = hsvt_baseline(inst.record, inst.ensemble, cfg.rank,
                                    hsvt_oracle_scale(truth_norm, inst.dither.sigma));
  out.hsvt.runtime_ms = detail::elapsed_ms(started);
  out.hsvt.fro_error = (hsvt - truth).norm();
  out.hsvt.rel_error = out.hsvt.fro_error / truth_norm;
  out.hsvt.final_violation = max_violation(inst.record, inst.ensemble, hsvt);

  if (cfg.record_kappa) out.kappa_v = scaled_condition_number(assemble_v(inst.ensemble));
  return out;
}

// Runs trials for every lambda; the result is ordered by (lambda index,
// trial) whatever the thread count.
inline std::vector<TrialResult> run_sweep(const ExperimentConfig& cfg, unsigned threads = 1) {
  validate(cfg);
  const std::size_t per_lambda = cfg.trials;
  const std::size_t total = cfg.lambda_grid.size() * per_lambda;
  std::vector<TrialResult> results(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        results[k] = run_trial(cfg, cfg.lambda_grid[k / per_lambda], k % per_lambda);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
        return;
      }
    }
  };

  const unsigned count = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

struct SummaryRow {
  double lambda = 0.0;
  Index n = 0;
  std::string algorithm;
  std::string stat;  // "mean" or "median"
  double rel_error = 0.0;
  double fro_error = 0.0;
  double iterations = 0.0;
  double final_violation = 0.0;
  double kappa_v = std::numeric_limits<double>::quiet_NaN();
  double runtime_ms = 0.0;
};

inline const AlgorithmOutcome& outcome(const TrialResult& r, const std::string& algorithm) {
  return algorithm == kHsvt ? r.hsvt : r.svp_rka;
}

// Mean and median rows per (lambda, algorithm), in grid order.
inline std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results) {
  std::vector<double> lambdas;
  for (const TrialResult& r : results) {
    if (std::find(lambdas.begin(), lambdas.end(), r.lambda) == lambdas.end()) {
      lambdas.push_back(r.lambda);
    }
  }
  std::vector<SummaryRow> rows;
  for (const double lambda : lambdas) {
    for (const std::string algorithm : {kSvpRka, kHsvt}) {
      std::vector<double> rel, fro, iters, viol, kappa, ms;
      Index n = 0;
      for (const TrialResult& r : results) {
        if (r.lambda != lambda) continue;
        const AlgorithmOutcome& o = outcome(r, algorithm);
        n = r.n;
        rel.push_back(o.rel_error);
        fro.push_back(o.fro_error);
        iters.push_back(static_cast<double>(o.iterations));
        viol.push_back(o.final_violation);
        kappa.push_back(r.kappa_v);
        ms.push_back(o.runtime_ms);
      }
      for (const std::string stat : {"mean", "median"}) {
        auto reduce = [&](const std::vector<double>& v) {
          return stat == "mean" ? mean(v) : median(v);
        };
        const bool has_kappa = std::none_of(kappa.begin(), kappa.end(),
                                            [](double k) { return std::isnan(k); });
        rows.push_back({lambda, n, algorithm, stat, reduce(rel), reduce(fro), reduce(iters),
                        reduce(viol),
                        has_kappa ? reduce(kappa) : std::numeric_limits<double>::quiet_NaN(),
                        reduce(ms)});
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Tessellation probe

struct ConsistencyCheck {
  bool consistent = false;
  double distance = 0.0;  // ||candidate - truth||_F
};

inline ConsistencyCheck check_consistency(const OneBitRecord& rec, const SensingEnsemble& ens,
                                          const Matrix& truth, const Matrix& candidate) {
  return {sign_consistent(rec, ens, candidate), (candidate - truth).norm()};
}

struct ProbeOptions {
  Index n1 = 8;
  Index n2 = 8;
  Index rank = 1;
  std::vector<Index> n_grid = {120, 480, 1920};
  std::size_t trials = 50;
  std::uint64_t master_seed = 20240101;
  double dither_sigma = 1.0;    // thresholds ~ N(0, dither_sigma^2)
  double budget_epochs = 200.0;
  double violation_tol = 1e-6;
  double margin = 1e-5;         // SVP-RKA runs on thresholds tightened by this much
};

struct ProbeCell {
  Index n = 0;
  std::size_t trials = 0;
  std::size_t consistent = 0;
  double consistent_fraction = 0.0;
  std::optional<double> median_distance;  // empty when no trial was consistent
  std::optional<double> max_distance;
};

struct ProbeReport {
  std::vector<ProbeCell> cells;
  bool median_non_increasing = false;
  bool max_non_increasing = false;
};

namespace detail {

// Non-increasing across cells that have data.
inline bool non_increasing(const std::vector<std::optional<double>>& values) {
  std::optional<double> last;
  for (const auto& v : values) {
    if (!v) continue;
    if (last && *v > *last) return false;
    last = v;
  }
  return true;
}

}  // namespace detail

// For every n: plant a unit-norm rank-r X, take n dithered sign
// measurements, run SVP-RKA against slightly tightened thresholds and
// keep the trials whose output reproduces every original sign.
inline ProbeReport tessellation_probe(const ProbeOptions& opt, unsigned threads = 1) {
  if (opt.n1 < 1 || opt.n2 < 1 || opt.rank < 1 || opt.rank > std::min(opt.n1, opt.n2)) {
    throw ConfigError("probe: bad dimensions or rank");
  }
  if (opt.n_grid.empty() || opt.trials < 1) throw ConfigError("probe: empty grid or no trials");
  for (std::size_t k = 0; k < opt.n_grid.size(); ++k) {
    if (opt.n_grid[k] < 1 || (k > 0 && opt.n_grid[k] <= opt.n_grid[k - 1])) {
      throw ConfigError("probe: n_grid must be positive and increasing");
    }
  }

  const std::size_t total = opt.n_grid.size() * opt.trials;
  std::vector<ConsistencyCheck> checks(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        const Index n = opt.n_grid[k / opt.trials];
        const std::uint64_t seed =
            derive_trial_seed(opt.master_seed, static_cast<double>(n), k % opt.trials);
        const GroundTruth truth =
            generate_low_rank(opt.n1, opt.n2, opt.rank, true, stream_seed(seed, 0));
        const SensingEnsemble ens =
            generate_gaussian_ensemble(n, opt.n1, opt.n2, stream_seed(seed, 1));
        const OneBitRecord rec =
            quantize(apply_operator(ens, truth.X),
                     generate_dithers({1, opt.dither_sigma, stream_seed(seed, 3)}, n));
        RkaConfig rka;
        rka.max_iters =
            static_cast<std::size_t>(std::llround(opt.budget_epochs * static_cast<double>(n)));
        rka.violation_tol = opt.violation_tol;
        rka.seed = stream_seed(seed, 4);
        rka.trace_every = static_cast<std::size_t>(n);
        const auto solved = svp_rka(tightened(rec, opt.margin), ens, opt.rank,
                                    Matrix::Zero(opt.n1, opt.n2), rka);
        checks[k] = check_consistency(rec, ens, truth.X, solved.solution);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
        return;
      }
    }
  };
  const unsigned count = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ProbeReport report;
  std::vector<std::optional<double>> medians, maxima;
  for (std::size_t g = 0; g < opt.n_grid.size(); ++g) {
    ProbeCell cell;
    cell.n = opt.n_grid[g];
    cell.trials = opt.trials;
    std::vector<double> distances;
    for (std::size_t t = 0; t < opt.trials; ++t) {
      const ConsistencyCheck& c = checks[g * opt.trials + t];
      if (c.consistent) distances.push_back(c.distance);
    }
    cell.consistent = distances.size();
    cell.consistent_fraction =
        static_cast<double>(cell.consistent) / static_cast<double>(cell.trials);
    if (!distances.empty()) {
      cell.median_distance = median(distances);
      cell.max_distance = *std::max_element(distances.begin(), distances.end());
    }
    medians.push_back(cell.median_distance);
    maxima.push_back(cell.max_distance);
    report.cells.push_back(cell);
  }
  report.median_non_increasing = detail::non_increasing(medians);
  report.max_non_increasing = detail::non_increasing(maxima);
  return report;
}

// ---------------------------------------------------------------------------
// Convergence-bound diagnostic

inline constexpr double kStepTolerance = 1e-10;

struct BoundStep {
  std::size_t iteration = 0;
  double distance = 0.0;                 // ||X_i - X||_F
  double step_start_distance = 0.0;      // ||X_{i-1} - X||_F
  double pre_projection_distance = 0.0;  // ||Z_i - X||_F
  double bound = 0.0;                    // lemma1_bound(kappa_v, i, e0, 0)
  bool non_expansive = true;
};

struct BoundReport {
  double lambda = 0.0;
  Index n = 0;
  std::uint64_t seed = 0;
  double kappa_v = 0.0;
  double e0 = 0.0;  // ||X_0 - X_final||_F
  double final_distance = 0.0;
  std::size_t violations = 0;  // steps breaking non-expansiveness
  std::vector<BoundStep> steps;
};

// Runs SVP-RKA on the trial instance with a sample at every iteration.
inline BoundReport bound_diagnostic(const ExperimentConfig& cfg, double lambda,
                                    std::uint64_t trial) {
  const TrialInstance inst = build_instance(cfg, lambda, trial);
  RkaConfig rka = solver_config(cfg, inst);
  rka.trace_every = 1;
  const Matrix x0 = Matrix::Zero(cfg.n1, cfg.n2);
  const auto solved = svp_rka(inst.record, inst.ensemble, cfg.rank, x0, rka, &inst.truth.X);

  BoundReport report;
  report.lambda = lambda;
  report.n = inst.n;
  report.seed = inst.seed;
  report.kappa_v = scaled_condition_number(assemble_v(inst.ensemble));
  report.e0 = (x0 - solved.solution).norm();
  report.final_distance = (solved.solution - inst.truth.X).norm();
  report.steps.reserve(solved.trace.points.size());
  for (const TracePoint& p : solved.trace.points) {
    BoundStep s;
    s.iteration = p.iteration;
    s.distance = p.distance;
    s.step_start_distance = p.step_start_distance;
    s.pre_projection_distance = p.pre_projection_distance;
    s.bound = lemma1_bound(report.kappa_v, static_cast<double>(p.iteration), report.e0, 0.0);
    s.non_expansive = p.pre_projection_distance <= p.step_start_distance + kStepTolerance;
    if (!s.non_expansive) ++report.violations;
    report.steps.push_back(s);
  }
  return report;
}

}  // namespace onebit
