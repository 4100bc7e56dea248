#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "onebit/linalg.hpp"
#include "test_support.hpp"

using namespace onebit;
using onebit::testing::gaussian;

namespace {

TEST(Svd, DiagonalCase) {
  Matrix m(2, 2);
  m << 3, 0, 0, 2;
  const SvdFactorization f = svd(m);
  EXPECT_NEAR(f.s(0), 3.0, 1e-14);
  EXPECT_NEAR(f.s(1), 2.0, 1e-14);
  EXPECT_TRUE(f.U.cwiseAbs().isApprox(Matrix::Identity(2, 2), 1e-14));
  EXPECT_TRUE(f.Vt.cwiseAbs().isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST(Svd, ZeroMatrix) {
  const SvdFactorization f = svd(Matrix::Zero(3, 3));
  EXPECT_EQ(f.s.size(), 3);
  EXPECT_EQ(f.s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Svd, ReconstructsRandomRectangular) {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = gaussian(5, 4, gen);
    const SvdFactorization f = svd(m);
    ASSERT_EQ(f.U.cols(), 4);
    ASSERT_EQ(f.Vt.rows(), 4);
    const Matrix back = f.U * f.s.asDiagonal() * f.Vt;
    EXPECT_LE((back - m).norm() / m.norm(), 1e-10);
    EXPECT_LE((f.U.transpose() * f.U - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((f.Vt * f.Vt.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
    for (Index k = 1; k < f.s.size(); ++k) EXPECT_GE(f.s(k - 1), f.s(k));
    EXPECT_GE(f.s.minCoeff(), 0.0);
  }
}

TEST(Svd, RejectsNonFinite) {
  Matrix m = Matrix::Ones(3, 3);
  m(1, 1) = std::nan("");
  EXPECT_THROW(svd(m), NumericalError);
  m(1, 1) = INFINITY;
  EXPECT_THROW(rank_r_project(m, 1), NumericalError);
}

TEST(RankProject, DistinctSingularValues) {
  Matrix m(2, 2);
  m << 3, 0, 0, 2;
  Matrix expected(2, 2);
  expected << 3, 0, 0, 0;
  EXPECT_LE((rank_r_project(m, 1) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RankProject, TiedSpectrumChecksResidualOnly) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  const Matrix p = rank_r_project(m, 1);
  EXPECT_EQ(numerical_rank(p), 1);
  EXPECT_NEAR(p.norm(), 1.0, 1e-12);
  EXPECT_NEAR((m - p).norm(), 1.0, 1e-12);
}

TEST(RankProject, FullRankRequestReturnsInput) {
  std::mt19937_64 gen(11);
  const Matrix m = gaussian(4, 3, gen);
  EXPECT_LE((rank_r_project(m, 3) - m).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((rank_r_project(m, 7) - m).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RankProject, RejectsZeroRank) {
  EXPECT_THROW(rank_r_project(Matrix::Identity(2, 2), 0), std::invalid_argument);
}

// Best approximation: no rank-r Y is closer to Z than P_r(Z).
TEST(RankProject, BestApproximationProperty) {
  std::mt19937_64 gen(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index r = 1 + rep % 3;
    const Matrix z = gaussian(6, 5, gen);
    Matrix y = onebit::testing::low_rank(6, 5, r, gen);
    if (rep % 4 == 0) y = rank_r_project(z + 0.05 * gaussian(6, 5, gen), r);
    EXPECT_LE((rank_r_project(z, r) - z).norm(), (y - z).norm() + 1e-10);
  }
}

TEST(RankProject, Idempotent) {
  std::mt19937_64 gen(5);
  for (Index r = 1; r <= 3; ++r) {
    const Matrix once = rank_r_project(gaussian(6, 5, gen), r);
    EXPECT_LE((rank_r_project(once, r) - once).cwiseAbs().maxCoeff(), 1e-10);
  }
}

// P_r is not globally 1-Lipschitz: near a singular-value tie a tiny
// perturbation swaps the leading direction.
TEST(RankProject, NotLipschitzAcrossTies) {
  const double eps = 1e-6;
  Matrix a = Matrix::Zero(2, 2);
  Matrix b = Matrix::Zero(2, 2);
  a.diagonal() << 1.0, 1.0 - eps;
  b.diagonal() << 1.0 - eps, 1.0;
  const double jump = (rank_r_project(a, 1) - rank_r_project(b, 1)).norm();
  EXPECT_GT(jump, 1.0);
  EXPECT_LT((a - b).norm(), 1e-5);
}

TEST(ConditionNumber, KnownValues) {
  EXPECT_NEAR(scaled_condition_number(Matrix::Identity(3, 3)), std::sqrt(3.0), 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 1.0;
  EXPECT_NEAR(scaled_condition_number(d), std::sqrt(5.0), 1e-12);
  for (const double c : {1e-8, -3.5, 2.0, 1e6}) {
    EXPECT_NEAR(scaled_condition_number(Matrix::Constant(1, 1, c)), 1.0, 1e-12);
  }
}

TEST(ConditionNumber, ZeroMatrixIsAnError) {
  EXPECT_THROW(scaled_condition_number(Matrix::Zero(3, 2)), std::invalid_argument);
}

TEST(ConditionNumber, RankDeficientUsesSmallestRetainedValue) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 4.0, 2.0, 0.0;
  EXPECT_NEAR(scaled_condition_number(d), std::sqrt(20.0) / 2.0, 1e-12);
}

TEST(ConditionNumber, OrthogonalInvariance) {
  std::mt19937_64 gen(99);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = gaussian(6, 4, gen);
    const Matrix q = onebit::testing::random_orthogonal(6, gen);
    const Matrix p = onebit::testing::random_orthogonal(4, gen);
    const double k = scaled_condition_number(m);
    EXPECT_GE(k, 1.0);
    EXPECT_NEAR(scaled_condition_number(q * m), k, 1e-8);
    EXPECT_NEAR(scaled_condition_number(m * p), k, 1e-8);
  }
}

TEST(Vectorize, ColumnStacking) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const Vector v = vectorize(m);
  ASSERT_EQ(v.size(), 4);
  EXPECT_EQ(v(0), 1);
  EXPECT_EQ(v(1), 3);
  EXPECT_EQ(v(2), 2);
  EXPECT_EQ(v(3), 4);
}

TEST(Vectorize, RoundTripAndLengthCheck) {
  std::mt19937_64 gen(3);
  const Matrix m = gaussian(3, 5, gen);
  EXPECT_EQ(unvectorize(vectorize(m), 3, 5), m);
  EXPECT_THROW(unvectorize(Vector::Zero(14), 3, 5), std::invalid_argument);
}

TEST(Vectorize, InnerProductMatchesTrace) {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix a = gaussian(4, 4, gen);
    const Matrix b = gaussian(4, 4, gen);
    double trace = 0.0;  // Tr(A^T B) by explicit summation
    for (Index k = 0; k < 4; ++k)
      for (Index i = 0; i < 4; ++i) trace += a(i, k) * b(i, k);
    EXPECT_NEAR(vectorize(a).dot(vectorize(b)), trace, 1e-12);
    EXPECT_NEAR(frobenius_inner(a, b), trace, 1e-12);
  }
}

// The warm-started projector must agree with the full-SVD projection
// along a slowly varying sequence like the one SVP-RKA produces.
TEST(RankProjector, MatchesFullProjectionAlongSequence) {
  std::mt19937_64 gen(123);
  for (const Index r : {1, 2, 3}) {
    RankProjector project(r);
    Matrix x = onebit::testing::low_rank(12, 10, r, gen);
    x /= x.norm();
    for (int step = 0; step < 300; ++step) {
      const Matrix z = x + 0.01 * gaussian(12, 10, gen) / 10.0;
      const Matrix reference = rank_r_project(z, r);
      x = project(z);
      ASSERT_LE((x - reference).norm(), 1e-9 * z.norm()) << "r=" << r << " step=" << step;
    }
    EXPECT_GT(project.warm_hits(), 250U);
  }
}

TEST(RankProjector, FallsBackWhenSubspaceJumps) {
  std::mt19937_64 gen(8);
  RankProjector project(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix z = gaussian(8, 8, gen);
    EXPECT_LE((project(z) - rank_r_project(z, 2)).norm(), 1e-9 * z.norm());
  }
  Matrix small = Matrix::Zero(3, 2);
  small(0, 0) = 1.0;
  EXPECT_EQ(RankProjector(2)(small), small);
}

}  // namespace
