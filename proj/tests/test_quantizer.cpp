#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "onebit/quantizer.hpp"
#include "onebit/record_io.hpp"
#include "onebit/stats.hpp"

using namespace onebit;

namespace {

Vector vec_of(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (const double x : v) out(k++) = x;
  return out;
}

struct Instance {
  GroundTruth truth;
  SensingEnsemble ens;
  Vector y;
  OneBitRecord rec;
};

Instance make_instance(Index n, Index rows, Index cols, Index rank, Index m, std::uint64_t seed) {
  Instance inst;
  inst.truth = generate_low_rank(rows, cols, rank, true, seed);
  inst.ens = generate_gaussian_ensemble(n, rows, cols, seed + 1);
  inst.y = apply_operator(inst.ens, inst.truth.X);
  const double sigma = dither_scale_beta_over_3(dynamic_range(inst.y)).sigma;
  inst.rec = quantize(inst.y, generate_dithers({m, sigma, seed + 2}, n));
  return inst;
}

TEST(DynamicRange, MaxAbs) {
  EXPECT_EQ(dynamic_range(vec_of({-1, 3})), 3.0);
  EXPECT_EQ(dynamic_range(vec_of({0, 0})), 0.0);
  EXPECT_EQ(dynamic_range(vec_of({-5, 2, 4})), 5.0);
  EXPECT_EQ(dynamic_range(vec_of({-5, 2, 4}), DynamicRangeRule::half_peak_to_peak), 4.5);
  EXPECT_THROW(dynamic_range(Vector()), std::invalid_argument);
}

TEST(DitherScale, BetaOverThreeWithFloor) {
  EXPECT_DOUBLE_EQ(dither_scale_beta_over_3(6.0).sigma, 2.0);
  EXPECT_FALSE(dither_scale_beta_over_3(6.0).floored);
  EXPECT_EQ(dither_scale_beta_over_3(0.0).sigma, 1.0);
  EXPECT_TRUE(dither_scale_beta_over_3(0.0).floored);
}

TEST(Dithers, ZeroSigmaGivesZeroThresholds) {
  const Matrix g = generate_dithers({3, 0.0, 5}, 7);
  EXPECT_EQ(g.rows(), 7);
  EXPECT_EQ(g.cols(), 3);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dithers, Deterministic) {
  EXPECT_EQ(generate_dithers({2, 1.5, 11}, 20), generate_dithers({2, 1.5, 11}, 20));
  EXPECT_NE(generate_dithers({2, 1.5, 11}, 20), generate_dithers({2, 1.5, 12}, 20));
}

// For N = 1e5 normals the relative standard error of the sample std is
// about 1/sqrt(2N) = 0.22%, so 2% is roughly nine standard errors.
TEST(Dithers, SampleStdMatchesSigma) {
  const Matrix g = generate_dithers({10, 2.0, 3}, 10000);
  const std::vector<double> values(g.data(), g.data() + g.size());
  EXPECT_NEAR(sample_stddev(values) / 2.0, 1.0, 0.02);
}

TEST(Dithers, InvalidPlan) {
  EXPECT_THROW(generate_dithers({0, 1.0, 1}, 3), std::invalid_argument);
  EXPECT_THROW(generate_dithers({1, -1.0, 1}, 3), std::invalid_argument);
  EXPECT_THROW(generate_dithers({1, 1.0, 1}, 0), std::invalid_argument);
}

TEST(Quantize, Examples) {
  OneBitRecord r = quantize(vec_of({0.7, -0.3}), Matrix::Zero(2, 1));
  EXPECT_EQ(r.signs(0, 0), 1);
  EXPECT_EQ(r.signs(1, 0), -1);

  Matrix tie(1, 1);
  tie << 0.25;
  EXPECT_EQ(quantize(vec_of({0.25}), tie).signs(0, 0), 1);

  r = quantize(vec_of({1, 2}), Matrix::Constant(2, 1, 1.5));
  EXPECT_EQ(r.signs(0, 0), -1);
  EXPECT_EQ(r.signs(1, 0), 1);
}

TEST(Quantize, DimensionMismatch) {
  EXPECT_THROW(quantize(vec_of({1, 2, 3}), Matrix::Zero(2, 1)), std::invalid_argument);
}

TEST(PolyhedronRow, SignFlip) {
  SensingEnsemble ens;
  ens.rows = ens.cols = 2;
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  ens.matrices = {a};
  OneBitRecord rec;
  rec.signs = SignMatrix::Constant(1, 1, -1);
  rec.thresholds = Matrix::Constant(1, 1, 0.5);
  const PolyhedronRow row = polyhedron_row(rec, ens, 0, 0);
  EXPECT_EQ(row.p, -vectorize(a));
  EXPECT_EQ(row.t, -0.5);
  EXPECT_THROW(polyhedron_row(rec, ens, 1, 0), std::out_of_range);
  EXPECT_THROW(polyhedron_row(rec, ens, 0, 1), std::out_of_range);
}

TEST(PolyhedronRow, TruthFeasibleAndNormsPreserved) {
  const Instance inst = make_instance(60, 4, 5, 2, 3, 10);
  for (Index l = 0; l < inst.rec.m(); ++l) {
    for (Index j = 0; j < inst.rec.n(); ++j) {
      const PolyhedronRow row = polyhedron_row(inst.rec, inst.ens, j, l);
      EXPECT_NEAR(row.p.norm(), inst.ens.matrices[static_cast<std::size_t>(j)].norm(), 1e-12);
      EXPECT_EQ(std::max(row.t - row.p.dot(vectorize(inst.truth.X)), 0.0), 0.0);
    }
  }
}

// Row-by-row enumeration: the sign-flipped truth breaks some half-space.
TEST(PolyhedronRow, NegatedTruthViolatesSomeRow) {
  const Instance inst = make_instance(40, 3, 3, 1, 1, 21);
  const Vector flipped = -vectorize(inst.truth.X);
  double worst = 0.0;
  for (Index j = 0; j < inst.rec.n(); ++j) {
    const PolyhedronRow row = polyhedron_row(inst.rec, inst.ens, j, 0);
    worst = std::max(worst, row.t - row.p.dot(flipped));
  }
  EXPECT_GT(worst, 0.0);
  EXPECT_NEAR(max_violation(inst.rec, inst.ens, -inst.truth.X), worst, 1e-12);
}

TEST(MaxViolation, TruthAndOrigin) {
  const Instance inst = make_instance(80, 4, 4, 1, 2, 31);
  EXPECT_EQ(max_violation(inst.rec, inst.ens, inst.truth.X), 0.0);
  double largest_t = 0.0;
  for (Index l = 0; l < inst.rec.m(); ++l)
    for (Index j = 0; j < inst.rec.n(); ++j)
      largest_t = std::max(largest_t, polyhedron_row(inst.rec, inst.ens, j, l).t);
  ASSERT_GT(largest_t, 0.0);
  EXPECT_DOUBLE_EQ(max_violation(inst.rec, inst.ens, Matrix::Zero(4, 4)), largest_t);
}

TEST(Quantizer, SignConsistencyProperty) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance inst = make_instance(50, 3 + seed % 3, 4, 1 + seed % 2, 1 + seed % 3, seed);
    EXPECT_EQ(max_violation(inst.rec, inst.ens, inst.truth.X), 0.0);
    EXPECT_TRUE(sign_consistent(inst.rec, inst.ens, inst.truth.X));
    for (Index k = 0; k < inst.rec.signs.size(); ++k) {
      const int s = inst.rec.signs.data()[k];
      EXPECT_TRUE(s == 1 || s == -1);
    }
  }
}

TEST(Quantizer, ScaleCovariance) {
  const Instance inst = make_instance(200, 5, 5, 2, 2, 77);
  for (const double eta : {0.5, 3.0, 1e3, 1.0 / 7.0}) {
    const OneBitRecord scaled = quantize(eta * inst.y, eta * inst.rec.thresholds);
    EXPECT_EQ(scaled.signs, inst.rec.signs) << eta;
  }
}

TEST(Quantizer, TightenedRecordImpliesStrictConsistency) {
  const Instance inst = make_instance(30, 3, 3, 1, 1, 5);
  const OneBitRecord tight = tightened(inst.rec, 0.1);
  EXPECT_EQ(tight.signs, inst.rec.signs);
  const Matrix diff = tight.thresholds - inst.rec.thresholds;
  EXPECT_LE((diff - 0.1 * inst.rec.signs.cast<double>()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RecordIo, RoundTrip) {
  const Instance inst = make_instance(17, 3, 2, 1, 3, 8);
  std::stringstream buffer;
  write_record(buffer, inst.rec);
  EXPECT_EQ(buffer.str().size(), 32U + 17U * 3U * 9U);
  const OneBitRecord back = read_record(buffer);
  EXPECT_EQ(back.signs, inst.rec.signs);
  EXPECT_EQ(back.thresholds, inst.rec.thresholds);
}

TEST(RecordIo, ExactLayout) {
  OneBitRecord rec;
  rec.signs = SignMatrix::Constant(1, 1, -1);
  rec.thresholds = Matrix::Constant(1, 1, 1.0);
  std::stringstream buffer;
  write_record(buffer, rec);
  const std::string bytes = buffer.str();
  const std::string expected = std::string("ONEBITRC") + std::string("\x01\0\0\0", 4) +
                               std::string(4, '\0') + std::string("\x01", 1) +
                               std::string(7, '\0') + std::string("\x01", 1) +
                               std::string(7, '\0') + std::string("\xff", 1) +
                               std::string("\0\0\0\0\0\0\xf0\x3f", 8);
  EXPECT_EQ(bytes, expected);
}

TEST(RecordIo, RejectsCorruptInput) {
  std::stringstream bad("NOTAREC!xxxxxxxxxxxxxxxxxxxxxxxx");
  EXPECT_THROW(read_record(bad), IoError);

  OneBitRecord rec;
  rec.signs = SignMatrix::Constant(2, 1, 1);
  rec.thresholds = Matrix::Zero(2, 1);
  std::stringstream buffer;
  write_record(buffer, rec);
  std::string truncated = buffer.str();
  truncated.resize(truncated.size() - 3);
  std::stringstream cut(truncated);
  EXPECT_THROW(read_record(cut), IoError);

  std::string wrong_sign = buffer.str();
  wrong_sign[32] = 0;
  std::stringstream ws(wrong_sign);
  EXPECT_THROW(read_record(ws), IoError);
}

}  // namespace
