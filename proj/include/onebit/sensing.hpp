#pragma once

// Gaussian sensing ensembles, planted low-rank ground truth and the
// linear measurement operator y_j = Tr(A_j^T X).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "onebit/linalg.hpp"
#include "onebit/random.hpp"

namespace onebit {

struct SensingEnsemble {
  std::vector<Matrix> matrices;
  Index rows = 0;
  Index cols = 0;
  std::uint64_t seed = 0;

  Index size() const noexcept { return static_cast<Index>(matrices.size()); }
};

struct GroundTruth {
  Matrix X;
  Index rank = 0;
  double frob_norm = 0.0;
};

enum class OperatorScaling {
  unit,        // y_j = Tr(A_j^T X)
  inv_sqrt_n,  // y_j = Tr(A_j^T X) / sqrt(n)
};

// Entries are drawn matrix by matrix, each in column-major order.
inline SensingEnsemble generate_gaussian_ensemble(Index n, Index rows, Index cols,
                                                  std::uint64_t seed) {
  if (n < 1 || rows < 1 || cols < 1) {
    throw std::invalid_argument("generate_gaussian_ensemble: dimensions must be >= 1");
  }
  SensingEnsemble ens;
  ens.rows = rows;
  ens.cols = cols;
  ens.seed = seed;
  ens.matrices.reserve(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (Index j = 0; j < n; ++j) {
    Matrix a(rows, cols);
    for (Index k = 0; k < a.size(); ++k) a.data()[k] = rng.normal();
    ens.matrices.push_back(std::move(a));
  }
  return ens;
}

// X = G1 G2^T with i.i.d. standard normal factors; optionally scaled to
// unit Frobenius norm.
inline GroundTruth generate_low_rank(Index rows, Index cols, Index rank, bool normalize,
                                     std::uint64_t seed) {
  if (rows < 1 || cols < 1 || rank < 1 || rank > std::min(rows, cols)) {
    throw std::invalid_argument("generate_low_rank: rank " + std::to_string(rank) +
                                " outside [1, min(rows, cols)]");
  }
  Rng rng(seed);
  Matrix left(rows, rank);
  Matrix right(cols, rank);
  for (Index k = 0; k < left.size(); ++k) left.data()[k] = rng.normal();
  for (Index k = 0; k < right.size(); ++k) right.data()[k] = rng.normal();
  GroundTruth truth;
  truth.X = left * right.transpose();
  truth.rank = rank;
  if (normalize) truth.X /= truth.X.norm();
  truth.frob_norm = truth.X.norm();
  return truth;
}

inline void require_shape(const SensingEnsemble& ens, const Matrix& x, const char* op) {
  if (x.rows() != ens.rows || x.cols() != ens.cols) {
    throw std::invalid_argument(std::string(op) + ": matrix is " + std::to_string(x.rows()) +
                                "x" + std::to_string(x.cols()) + ", ensemble expects " +
                                std::to_string(ens.rows) + "x" + std::to_string(ens.cols));
  }
}

inline Vector apply_operator(const SensingEnsemble& ens, const Matrix& x,
                             OperatorScaling scaling = OperatorScaling::unit) {
  require_shape(ens, x, "apply_operator");
  Vector y(ens.size());
  for (Index j = 0; j < ens.size(); ++j) {
    y(j) = frobenius_inner(ens.matrices[static_cast<std::size_t>(j)], x);
  }
  if (scaling == OperatorScaling::inv_sqrt_n) y /= std::sqrt(static_cast<double>(ens.size()));
  return y;
}

// n x (rows * cols) matrix whose j-th row is vec(A_j).
inline Matrix assemble_v(const SensingEnsemble& ens) {
  Matrix v(ens.size(), ens.rows * ens.cols);
  for (Index j = 0; j < ens.size(); ++j) {
    v.row(j) = vectorize(ens.matrices[static_cast<std::size_t>(j)]).transpose();
  }
  return v;
}

inline std::vector<double> squared_norms(const SensingEnsemble& ens) {
  std::vector<double> out;
  out.reserve(ens.matrices.size());
  for (const Matrix& a : ens.matrices) out.push_back(a.squaredNorm());
  return out;
}

}  // namespace onebit
