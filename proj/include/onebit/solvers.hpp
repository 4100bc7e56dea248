#pragma once

// Randomized Kaczmarz for mixed equality / inequality systems, its
// combination with rank-r singular value projection (SVP-RKA) for the
// one-bit polyhedron, the HSVT baseline, and the linear-convergence
// bound (1 - 1/kappa^2)^(i/2) e0 + rho.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "onebit/linalg.hpp"
#include "onebit/quantizer.hpp"
#include "onebit/random.hpp"
#include "onebit/sensing.hpp"

namespace onebit {

struct RkaConfig {
  std::size_t max_iters = 1000;  // 0 runs no iterations
  double violation_tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t trace_every = 1;
};

struct RowChoice {
  Index j = -1;
  Index ell = -1;
};

// One telemetry sample. Distances are filled only when a reference
// point is supplied to the solver.
struct TracePoint {
  std::size_t iteration = 0;
  double max_violation = 0.0;
  RowChoice row;                        // row that produced this iterate; -1 at iteration 0
  double distance = 0.0;                // ||x_i - ref||
  double step_start_distance = 0.0;     // ||x_{i-1} - ref||
  double pre_projection_distance = 0.0; // ||z_i - ref||, before the rank projection
};

struct SolveTrace {
  std::vector<TracePoint> points;
  bool has_reference = false;
  std::size_t iterations = 0;  // iterations actually executed
  bool converged = false;      // stopped on the violation tolerance
  double final_violation = 0.0;
};

template <typename Solution>
struct SolveResult {
  Solution solution;
  SolveTrace trace;
};

// Draws row k with probability weights[k] / sum(weights).
class RowSampler {
 public:
  explicit RowSampler(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("RowSampler: no rows");
    cumulative_.reserve(weights.size());
    double total = 0.0;
    for (const double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("RowSampler: row weights must be finite and positive");
      }
      total += w;
      cumulative_.push_back(total);
    }
  }

  Index operator()(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto k = static_cast<Index>(it - cumulative_.begin());
    return std::min<Index>(k, static_cast<Index>(cumulative_.size()) - 1);
  }

  double probability(Index k) const {
    const auto i = static_cast<std::size_t>(k);
    const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
    return (cumulative_[i] - lo) / cumulative_.back();
  }

  Index size() const noexcept { return static_cast<Index>(cumulative_.size()); }

 private:
  std::vector<double> cumulative_;
};

namespace detail {

inline bool traced(std::size_t i, const RkaConfig& cfg) {
  return cfg.trace_every > 0 && i % cfg.trace_every == 0;
}

}  // namespace detail

// Solves c_k^T x >= b_k (k in ineq_rows) and c_k^T x = b_k (k in eq_rows).
// Each iteration projects onto one row drawn with probability
// ||c_k||^2 / ||C||_F^2. Stops after max_iters or once the largest
// residual (violation for inequalities, |residual| for equalities) is
// <= violation_tol; the residual is checked at every telemetry stride.
inline SolveResult<Vector> rka_feasibility(const Matrix& c, const Vector& b,
                                           std::span<const Index> ineq_rows,
                                           std::span<const Index> eq_rows, const Vector& x0,
                                           const RkaConfig& cfg,
                                           const Vector* reference = nullptr) {
  const Index rows = c.rows();
  if (rows == 0 || c.cols() == 0) throw std::invalid_argument("rka_feasibility: empty system");
  if (b.size() != rows || x0.size() != c.cols()) {
    throw std::invalid_argument("rka_feasibility: dimension mismatch");
  }
  if (reference != nullptr && reference->size() != c.cols()) {
    throw std::invalid_argument("rka_feasibility: reference has wrong length");
  }
  std::vector<std::int8_t> is_inequality(static_cast<std::size_t>(rows), -1);
  auto assign = [&](std::span<const Index> set, std::int8_t kind) {
    for (const Index k : set) {
      if (k < 0 || k >= rows || is_inequality[static_cast<std::size_t>(k)] != -1) {
        throw std::invalid_argument("rka_feasibility: row sets must partition the rows");
      }
      is_inequality[static_cast<std::size_t>(k)] = kind;
    }
  };
  assign(ineq_rows, 1);
  assign(eq_rows, 0);
  if (std::find(is_inequality.begin(), is_inequality.end(), -1) != is_inequality.end()) {
    throw std::invalid_argument("rka_feasibility: row sets must partition the rows");
  }

  std::vector<double> row_norms(static_cast<std::size_t>(rows));
  for (Index k = 0; k < rows; ++k) {
    row_norms[static_cast<std::size_t>(k)] = c.row(k).squaredNorm();
    if (row_norms[static_cast<std::size_t>(k)] == 0.0) {
      throw std::invalid_argument("rka_feasibility: row " + std::to_string(k) + " is zero");
    }
  }
  const RowSampler sampler(row_norms);

  auto max_residual = [&](const Vector& x) {
    const Vector r = b - c * x;
    double worst = 0.0;
    for (Index k = 0; k < rows; ++k) {
      const double v = is_inequality[static_cast<std::size_t>(k)] ? std::max(r(k), 0.0)
                                                                  : std::abs(r(k));
      worst = std::max(worst, v);
    }
    return worst;
  };

  SolveResult<Vector> out{x0, {}};
  SolveTrace& trace = out.trace;
  trace.has_reference = reference != nullptr;
  Vector& x = out.solution;
  Rng rng(cfg.seed);

  auto record = [&](std::size_t i, RowChoice row, double start, double violation) {
    TracePoint p;
    p.iteration = i;
    p.max_violation = violation;
    p.row = row;
    if (reference != nullptr) {
      p.distance = (x - *reference).norm();
      p.pre_projection_distance = p.distance;
      p.step_start_distance = i == 0 ? p.distance : start;
    }
    trace.points.push_back(p);
  };

  double violation = max_residual(x);
  record(0, {}, 0.0, violation);
  if (violation <= cfg.violation_tol) {
    trace.converged = true;
    trace.final_violation = violation;
    return out;
  }

  std::size_t i = 0;
  while (i < cfg.max_iters) {
    const Index k = sampler(rng);
    ++i;
    const bool sample = detail::traced(i, cfg) || i == cfg.max_iters;
    const double start = sample && reference != nullptr ? (x - *reference).norm() : 0.0;
    double beta = b(k) - c.row(k).dot(x);
    if (is_inequality[static_cast<std::size_t>(k)]) beta = std::max(beta, 0.0);
    if (beta != 0.0) x += (beta / row_norms[static_cast<std::size_t>(k)]) * c.row(k).transpose();
    if (sample) {
      violation = max_residual(x);
      record(i, {k, 0}, start, violation);
      if (violation <= cfg.violation_tol) {
        trace.converged = true;
        break;
      }
    }
  }
  trace.iterations = i;
  trace.final_violation = trace.points.back().max_violation;
  return out;
}

// SVP-RKA on the one-bit polyhedron of (rec, ens):
//   Z = X_i + ((t - <p, vec X_i>)^+ / ||A_j||_F^2) r_j^(l) A_j
//   X_{i+1} = P_r(Z)
// with (j, l) drawn as j ~ ||A_j||_F^2, l uniform. Stops after max_iters
// or when max_violation <= violation_tol (checked every trace_every
// iterations and at iteration 0) with rank(X_i) <= r.
inline SolveResult<Matrix> svp_rka(const OneBitRecord& rec, const SensingEnsemble& ens, Index rank,
                                   const Matrix& x0, const RkaConfig& cfg,
                                   const Matrix* reference = nullptr) {
  require_compatible(rec, ens, "svp_rka");
  require_shape(ens, x0, "svp_rka");
  if (reference != nullptr) require_shape(ens, *reference, "svp_rka");
  if (rank < 1 || rank > std::min(ens.rows, ens.cols)) {
    throw std::invalid_argument("svp_rka: rank " + std::to_string(rank) +
                                " outside [1, min(rows, cols)]");
  }
  const std::vector<double> norms = squared_norms(ens);
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] == 0.0) {
      throw std::invalid_argument("svp_rka: sensing matrix " + std::to_string(j) + " is zero");
    }
  }
  const RowSampler sampler(norms);
  RankProjector project(rank);

  SolveResult<Matrix> out{x0, {}};
  SolveTrace& trace = out.trace;
  trace.has_reference = reference != nullptr;
  Matrix& x = out.solution;
  Rng rng(cfg.seed);

  bool low_rank = numerical_rank(x0) <= rank;
  auto record = [&](std::size_t i, RowChoice row, double start, double pre, double violation) {
    TracePoint p;
    p.iteration = i;
    p.max_violation = violation;
    p.row = row;
    if (reference != nullptr) {
      p.distance = (x - *reference).norm();
      p.step_start_distance = i == 0 ? p.distance : start;
      p.pre_projection_distance = i == 0 ? p.distance : pre;
    }
    trace.points.push_back(p);
  };

  double violation = max_violation(rec, ens, x);
  record(0, {}, 0.0, 0.0, violation);
  if (low_rank && violation <= cfg.violation_tol) {
    trace.converged = true;
    trace.final_violation = violation;
    return out;
  }

  Matrix z;
  std::size_t i = 0;
  while (i < cfg.max_iters) {
    const Index j = sampler(rng);
    const Index ell = rec.m() > 1 ? static_cast<Index>(rng.below(static_cast<std::uint64_t>(rec.m()))) : 0;
    ++i;
    const bool sample = detail::traced(i, cfg) || i == cfg.max_iters;
    const double start = sample && reference != nullptr ? (x - *reference).norm() : 0.0;

    const Matrix& a = ens.matrices[static_cast<std::size_t>(j)];
    const double sign = rec.signs(j, ell);
    const double beta =
        std::max(sign * rec.thresholds(j, ell) - sign * frobenius_inner(a, x), 0.0);
    double pre = start;
    if (beta > 0.0 || !low_rank) {
      z = x;
      if (beta > 0.0) z += (sign * beta / norms[static_cast<std::size_t>(j)]) * a;
      if (sample && reference != nullptr) pre = (z - *reference).norm();
      x = project(z);
      low_rank = true;
    }
    if (sample) {
      violation = max_violation(rec, ens, x);
      record(i, {j, ell}, start, pre, violation);
      if (violation <= cfg.violation_tol) {
        trace.converged = true;
        break;
      }
    }
  }
  trace.iterations = i;
  trace.final_violation = trace.points.back().max_violation;
  return out;
}

// X_hat = P_r( scale / (n m) * sum_{j,l} R[j,l] A_j ).
inline Matrix hsvt_baseline(const OneBitRecord& rec, const SensingEnsemble& ens, Index rank,
                            double scale) {
  require_compatible(rec, ens, "hsvt_baseline");
  if (!std::isfinite(scale)) throw std::invalid_argument("hsvt_baseline: scale must be finite");
  Matrix acc = Matrix::Zero(ens.rows, ens.cols);
  for (Index j = 0; j < rec.n(); ++j) {
    const double weight = rec.signs.row(j).cast<double>().sum();
    if (weight != 0.0) acc += weight * ens.matrices[static_cast<std::size_t>(j)];
  }
  acc *= scale / static_cast<double>(rec.n() * rec.m());
  return rank_r_project(acc, rank);
}

// Scale that makes the HSVT back-projection unbiased for Gaussian A_j
// and N(0, sigma^2) dithers: E[r_j A_j] = sqrt(2/pi) X / sqrt(||X||_F^2 + sigma^2).
inline double hsvt_oracle_scale(double truth_frob_norm, double sigma) {
  return std::sqrt(std::numbers::pi / 2.0) *
         std::sqrt(truth_frob_norm * truth_frob_norm + sigma * sigma);
}

inline double lemma1_bound(double kappa, double iteration, double e0, double rho) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("lemma1_bound: kappa must be >= 1");
  if (e0 < 0.0 || rho < 0.0 || iteration < 0.0) {
    throw std::invalid_argument("lemma1_bound: negative argument");
  }
  return std::pow(1.0 - 1.0 / (kappa * kappa), iteration / 2.0) * e0 + rho;
}

// (n m) x (rows cols) matrix with row l*n + j equal to r_j^(l) vec(A_j).
// Only for diagnostics on small instances.
inline Matrix stacked_constraints(const OneBitRecord& rec, const SensingEnsemble& ens) {
  require_compatible(rec, ens, "stacked_constraints");
  Matrix p(rec.n() * rec.m(), ens.rows * ens.cols);
  for (Index l = 0; l < rec.m(); ++l) {
    for (Index j = 0; j < rec.n(); ++j) {
      p.row(l * rec.n() + j) = polyhedron_row(rec, ens, j, l).p.transpose();
    }
  }
  return p;
}

}  // namespace onebit
