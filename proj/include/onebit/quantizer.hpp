#pragma once

// Dithered one-bit acquisition and the half-space view of the resulting
// one-bit polyhedron {X : r_j^(l) Tr(A_j^T X) >= r_j^(l) tau_j^(l)}.
//
// The record (R, Gamma) is the canonical representation; the stacked
// constraint matrix is never formed; polyhedron_row() builds single rows
// on demand.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "onebit/linalg.hpp"
#include "onebit/random.hpp"
#include "onebit/sensing.hpp"

namespace onebit {

using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct DitherPlan {
  Index m = 1;         // number of threshold sequences
  double sigma = 0.0;  // dither standard deviation
  std::uint64_t seed = 0;
};

struct OneBitRecord {
  SignMatrix signs;   // n x m, entries exactly +1 / -1
  Matrix thresholds;  // n x m, column l is tau^(l)

  Index n() const noexcept { return signs.rows(); }
  Index m() const noexcept { return signs.cols(); }
};

struct PolyhedronRow {
  Vector p;  // r_j^(l) vec(A_j)
  double t = 0.0;  // r_j^(l) tau_j^(l)
  Index j = 0;
  Index ell = 0;
};

enum class DynamicRangeRule {
  max_abs,            // max_j |y_j|
  half_peak_to_peak,  // (max_j y_j - min_j y_j) / 2
};

inline double dynamic_range(const Vector& y, DynamicRangeRule rule = DynamicRangeRule::max_abs) {
  if (y.size() == 0) throw std::invalid_argument("dynamic_range: empty measurement vector");
  switch (rule) {
    case DynamicRangeRule::half_peak_to_peak:
      return 0.5 * (y.maxCoeff() - y.minCoeff());
    case DynamicRangeRule::max_abs:
    default:
      return y.cwiseAbs().maxCoeff();
  }
}

struct DitherScale {
  double sigma = 1.0;
  bool floored = false;  // the dynamic range was zero and sigma fell back to 1
};

// sigma = beta / 3, with sigma = 1 when beta == 0.
inline DitherScale dither_scale_beta_over_3(double beta) {
  if (!(beta > 0.0)) return {1.0, true};
  return {beta / 3.0, false};
}

// n x m matrix of i.i.d. N(0, sigma^2) thresholds, filled column by column.
inline Matrix generate_dithers(const DitherPlan& plan, Index n) {
  if (n < 1) throw std::invalid_argument("generate_dithers: n must be >= 1");
  if (plan.m < 1) throw std::invalid_argument("generate_dithers: m must be >= 1");
  if (!(plan.sigma >= 0.0) || !std::isfinite(plan.sigma)) {
    throw std::invalid_argument("generate_dithers: sigma must be finite and >= 0");
  }
  Matrix gamma = Matrix::Zero(n, plan.m);
  if (plan.sigma == 0.0) return gamma;
  Rng rng(plan.seed);
  for (Index k = 0; k < gamma.size(); ++k) gamma.data()[k] = plan.sigma * rng.normal();
  return gamma;
}

// R[j, l] = +1 if y_j >= tau_j^(l), else -1.
inline OneBitRecord quantize(const Vector& y, const Matrix& gamma) {
  if (y.size() != gamma.rows()) {
    throw std::invalid_argument("quantize: y has " + std::to_string(y.size()) +
                                " entries but thresholds have " +
                                std::to_string(gamma.rows()) + " rows");
  }
  OneBitRecord rec;
  rec.thresholds = gamma;
  rec.signs.resize(gamma.rows(), gamma.cols());
  for (Index l = 0; l < gamma.cols(); ++l) {
    for (Index j = 0; j < gamma.rows(); ++j) {
      rec.signs(j, l) = y(j) >= gamma(j, l) ? std::int8_t{1} : std::int8_t{-1};
    }
  }
  return rec;
}

inline void require_compatible(const OneBitRecord& rec, const SensingEnsemble& ens,
                               const char* op) {
  if (rec.n() != ens.size() || rec.thresholds.rows() != rec.n() ||
      rec.thresholds.cols() != rec.m()) {
    throw std::invalid_argument(std::string(op) + ": record has " + std::to_string(rec.n()) +
                                " measurements, ensemble has " + std::to_string(ens.size()));
  }
}

inline PolyhedronRow polyhedron_row(const OneBitRecord& rec, const SensingEnsemble& ens,
                                    Index j, Index ell) {
  require_compatible(rec, ens, "polyhedron_row");
  if (j < 0 || j >= rec.n() || ell < 0 || ell >= rec.m()) {
    throw std::out_of_range("polyhedron_row: index (" + std::to_string(j) + ", " +
                            std::to_string(ell) + ") outside " + std::to_string(rec.n()) +
                            "x" + std::to_string(rec.m()));
  }
  const double sign = rec.signs(j, ell);
  return {sign * vectorize(ens.matrices[static_cast<std::size_t>(j)]),
          sign * rec.thresholds(j, ell), j, ell};
}

// max over (j, l) of (t - <p, vec X>)^+; zero exactly on the polyhedron.
inline double max_violation(const OneBitRecord& rec, const SensingEnsemble& ens,
                            const Matrix& x) {
  require_compatible(rec, ens, "max_violation");
  const Vector y = apply_operator(ens, x);
  double worst = 0.0;
  for (Index l = 0; l < rec.m(); ++l) {
    for (Index j = 0; j < rec.n(); ++j) {
      const double sign = rec.signs(j, l);
      worst = std::max(worst, sign * rec.thresholds(j, l) - sign * y(j));
    }
  }
  return worst;
}

// True when re-quantizing the measurements of x reproduces every sign.
inline bool sign_consistent(const OneBitRecord& rec, const SensingEnsemble& ens,
                            const Matrix& x) {
  require_compatible(rec, ens, "sign_consistent");
  return quantize(apply_operator(ens, x), rec.thresholds).signs == rec.signs;
}

// Same signs, thresholds moved by `margin` into each sign's half-space:
// points feasible for the result satisfy every original row with slack
// at least `margin`.
inline OneBitRecord tightened(const OneBitRecord& rec, double margin) {
  OneBitRecord out = rec;
  out.thresholds += margin * rec.signs.cast<double>();
  return out;
}

}  // namespace onebit
