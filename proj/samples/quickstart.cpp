// Recover a rank-2 matrix from dithered sign measurements and compare
// SVP-RKA against the hard-thresholded correlation estimate.

#include <iostream>

#include "onebit/quantizer.hpp"
#include "onebit/sensing.hpp"
#include "onebit/solvers.hpp"

int main() {
  using namespace onebit;
  const Index n1 = 12, n2 = 12, rank = 2, n = 16 * n1 * rank;

  const GroundTruth truth = generate_low_rank(n1, n2, rank, true, 1);
  const SensingEnsemble ens = generate_gaussian_ensemble(n, n1, n2, 2);
  const Vector y = apply_operator(ens, truth.X);
  const double sigma = dither_scale_beta_over_3(dynamic_range(y)).sigma;
  const OneBitRecord rec = quantize(y, generate_dithers({1, sigma, 3}, n));

  RkaConfig cfg;
  cfg.max_iters = 50 * static_cast<std::size_t>(n);
  cfg.trace_every = static_cast<std::size_t>(n);
  cfg.seed = 4;
  const auto solved = svp_rka(rec, ens, rank, Matrix::Zero(n1, n2), cfg);
  const Matrix hsvt = hsvt_baseline(rec, ens, rank, hsvt_oracle_scale(truth.frob_norm, sigma));

  std::cout << "measurements      " << n << "\n"
            << "svp_rka rel error " << (solved.solution - truth.X).norm() / truth.frob_norm
            << " after " << solved.trace.iterations << " iterations\n"
            << "hsvt rel error    " << (hsvt - truth.X).norm() / truth.frob_norm << "\n"
            << "max violation     " << solved.trace.final_violation << "\n";
}
