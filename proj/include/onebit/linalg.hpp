#pragma once

// Dense real-matrix primitives: thin SVD, best rank-r approximation,
// the scaled condition number and column-stacking vectorization.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "onebit/error.hpp"

namespace onebit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative cutoff below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-10;

struct SvdFactorization {
  Matrix U;   // rows x k, orthonormal columns
  Vector s;   // k values, non-increasing
  Matrix Vt;  // k x cols, orthonormal rows
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* operation) {
  if (!m.allFinite()) {
    throw NumericalError("linalg", operation, "input contains NaN or Inf");
  }
}

// Frobenius inner product <A, B> = Tr(A^T B). Every measurement in the
// library goes through this one function so that recomputing a
// measurement reproduces it bit-for-bit.
inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b).sum();
}

inline SvdFactorization svd(const Matrix& m) {
  if (m.size() == 0) throw std::invalid_argument("svd: empty matrix");
  require_finite(m, "svd");
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw NumericalError("linalg", "svd", "SVD iteration did not converge");
  }
  SvdFactorization out{dec.matrixU(), dec.singularValues(), dec.matrixV().transpose()};
  if (!out.U.allFinite() || !out.s.allFinite() || !out.Vt.allFinite()) {
    throw NumericalError("linalg", "svd", "non-finite factors");
  }
  return out;
}

inline Vector singular_values(const Matrix& m) {
  if (m.size() == 0) throw std::invalid_argument("singular_values: empty matrix");
  require_finite(m, "singular_values");
  Eigen::BDCSVD<Matrix> dec(m);
  if (dec.info() != Eigen::Success) {
    throw NumericalError("linalg", "singular_values", "SVD iteration did not converge");
  }
  return dec.singularValues();
}

// Number of singular values above tol * sigma_max.
inline Index numerical_rank(const Matrix& m, double tol = kRankTolerance) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return (s.array() > tol * s(0)).count();
}

// Sum of the r leading singular triplets of m. When sigma_r == sigma_{r+1}
// the choice among equally good approximations is whatever the SVD
// routine orders first.
inline Matrix rank_r_project(const Matrix& m, Index r) {
  if (r < 1) throw std::invalid_argument("rank_r_project: rank must be >= 1");
  if (r >= std::min(m.rows(), m.cols())) {
    require_finite(m, "rank_r_project");
    return m;
  }
  const SvdFactorization f = svd(m);
  return f.U.leftCols(r) * f.s.head(r).asDiagonal() * f.Vt.topRows(r);
}

// kappa(M) = ||M||_F * ||M^+||_2, where ||M^+||_2 is the reciprocal of the
// smallest singular value above kRankTolerance * sigma_max.
inline double scaled_condition_number(const Matrix& m) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) {
    throw std::invalid_argument("scaled_condition_number: zero matrix");
  }
  double smallest = s(0);
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) > kRankTolerance * s(0)) smallest = s(k);
  }
  return std::max(1.0, m.norm() / smallest);
}

// Column-stacking vec().
inline Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvectorize(const Vector& v, Index rows, Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols) {
    throw std::invalid_argument("unvectorize: length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// Rank-r projector for a sequence of slowly varying matrices.
//
// Keeps the previous leading right singular subspace and refines it by
// block power iteration on Z^T Z. The refined subspace is accepted only
// when
//   * the residual ||Z^T Z V - V H|| <= 1e-13 ||Z||_F^2 (H = V^T Z^T Z V),
//   * lambda_min(H) exceeds ||Z||_F^2 - tr(H), which bounds every
//     eigenvalue outside the leading r (so V is the dominant subspace),
//   * residual / gap <= 1e-11 (Davis-Kahan angle bound).
// Otherwise the projection falls back to the full SVD. The output then
// agrees with rank_r_project to roughly 1e-11 relative.
class RankProjector {
 public:
  explicit RankProjector(Index rank) : rank_(rank) {
    if (rank < 1) throw std::invalid_argument("RankProjector: rank must be >= 1");
  }

  Matrix operator()(const Matrix& z) {
    const Index k = std::min({rank_, z.rows(), z.cols()});
    if (k == std::min(z.rows(), z.cols())) {
      require_finite(z, "rank_r_project");
      return z;
    }
    if (basis_.rows() == z.cols() && basis_.cols() == k) {
      if (refine(z)) {
        ++warm_hits_;
        return product_ * basis_.transpose();
      }
    }
    ++full_svds_;
    const SvdFactorization f = svd(z);
    basis_ = f.Vt.topRows(k).transpose();
    return f.U.leftCols(k) * f.s.head(k).asDiagonal() * f.Vt.topRows(k);
  }

  void reset() { basis_.resize(0, 0); }
  std::size_t full_svds() const noexcept { return full_svds_; }
  std::size_t warm_hits() const noexcept { return warm_hits_; }

 private:
  static constexpr int kMaxSweeps = 60;

  bool refine(const Matrix& z) {
    require_finite(z, "rank_r_project");
    const double energy = z.squaredNorm();
    if (energy == 0.0) return false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      product_.noalias() = z * basis_;
      gram_.noalias() = z.transpose() * product_;
      const Matrix h = basis_.transpose() * gram_;
      const double residual = (gram_ - basis_ * h).norm();
      if (residual <= 1e-13 * energy) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
        const double gap = eig.eigenvalues()(0) - (energy - h.trace());
        return gap > 0.0 && residual <= 1e-11 * gap;
      }
      if (!orthonormalize(gram_)) return false;
      basis_ = gram_;
    }
    return false;
  }

  // Classical Gram-Schmidt with one reorthogonalization pass.
  static bool orthonormalize(Matrix& w) {
    for (Index c = 0; c < w.cols(); ++c) {
      const double before = w.col(c).norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (Index p = 0; p < c; ++p) {
          w.col(c) -= w.col(p).dot(w.col(c)) * w.col(p);
        }
      }
      const double after = w.col(c).norm();
      if (!(after > 1e-8 * before) || after == 0.0) return false;
      w.col(c) /= after;
    }
    return true;
  }

  Index rank_;
  Matrix basis_;
  Matrix product_;
  Matrix gram_;
  std::size_t full_svds_ = 0;
  std::size_t warm_hits_ = 0;
};

}  // namespace onebit
