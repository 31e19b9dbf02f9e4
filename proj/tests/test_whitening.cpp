#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "whitemetric/whitening.hpp"

using namespace whitemetric;
using namespace testutil;

namespace {

// Inverse square root of [[1, r], [r, 1]] from its eigenpairs (1 +- r, (1, +-1)/sqrt 2).
Matrix equicorrelation_inv_sqrt(double r) {
  const double a = 1.0 / std::sqrt(1.0 + r);
  const double b = 1.0 / std::sqrt(1.0 - r);
  return rows({{0.5 * (a + b), 0.5 * (a - b)}, {0.5 * (a - b), 0.5 * (a + b)}});
}

}  // namespace

TEST(ParseWhiteningProcess, Names) {
  EXPECT_EQ(parse_whitening_process("zca-cor"), WhiteningProcess::zca_cor);
  EXPECT_EQ(parse_whitening_process("zca_cor"), WhiteningProcess::zca_cor);
  EXPECT_EQ(parse_whitening_process("cholesky"), WhiteningProcess::cholesky);
  EXPECT_EQ(parse_whitening_process("identity"), WhiteningProcess::identity);
  EXPECT_FALSE(parse_whitening_process("pca").has_value());
  EXPECT_EQ(to_string(WhiteningProcess::zca_cor), "zca-cor");
}

TEST(ZcaCor, DiagonalCovariance) {
  const WhiteningMatrix w = zca_cor_whitening(vec({0, 0}), vec({4, 9}).asDiagonal());
  EXPECT_LE(max_abs(w.matrix() - Matrix(vec({0.5, 1.0 / 3.0}).asDiagonal())), 1e-15);
}

TEST(ZcaCor, EquicorrelatedCovariance) {
  const WhiteningMatrix w = zca_cor_whitening(vec({0, 0}), rows({{1, 0.5}, {0.5, 1}}));
  EXPECT_LE(max_abs(w.matrix() - equicorrelation_inv_sqrt(0.5)), 1e-12);
  EXPECT_NEAR(w.matrix()(0, 0), 1.11536, 1e-5);
  EXPECT_NEAR(w.matrix()(0, 1), -0.29886, 1e-5);
}

TEST(ZcaCor, IdentityCovariance) {
  EXPECT_LE(identity_residual(zca_cor_whitening(vec({1, 2, 3}), Matrix::Identity(3, 3)).matrix()),
            1e-15);
}

TEST(Cholesky, DiagonalCovariance) {
  const WhiteningMatrix w = cholesky_whitening(vec({0, 0}), vec({4, 9}).asDiagonal());
  EXPECT_LE(max_abs(w.matrix() - Matrix(vec({0.5, 1.0 / 3.0}).asDiagonal())), 1e-15);
}

TEST(Cholesky, EquicorrelatedCovariance) {
  const WhiteningMatrix w = cholesky_whitening(vec({0, 0}), rows({{1, 0.5}, {0.5, 1}}));
  const Matrix expect = rows({{1, 0}, {-1 / std::sqrt(3.0), 2 / std::sqrt(3.0)}});
  EXPECT_LE(max_abs(w.matrix() - expect), 1e-14);
}

TEST(Cholesky, IdentityCovariance) {
  EXPECT_LE(identity_residual(cholesky_whitening(vec({0, 0}), Matrix::Identity(2, 2)).matrix()),
            1e-15);
}

TEST(Whitening, SatisfiesWhiteningEquation) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix s = random_spd(rng, 4);
    for (WhiteningProcess p : {WhiteningProcess::zca_cor, WhiteningProcess::cholesky}) {
      const WhiteningMatrix w = make_whitening(p, Vector::Zero(4), s);
      EXPECT_LE(identity_residual(w.matrix() * s * w.matrix().transpose()), 1e-8);
    }
  }
}

TEST(Whitening, NearSingularAndDegenerateErrors) {
  EXPECT_THROW(zca_cor_whitening(vec({0, 0}), rows({{1, 1}, {1, 1}})), NearSingular);
  EXPECT_THROW(zca_cor_whitening(vec({0, 0}), rows({{1, 0}, {0, 0}})), DegenerateCoordinate);
  EXPECT_THROW(cholesky_whitening(vec({0, 0}), rows({{1, 1}, {1, 1}})), NearSingular);
}

TEST(Whitening, IdentityProcessAcceptsDegenerateMeasure) {
  const EmpiricalMeasure dirac(rows({{3, 4}}));
  const WhiteningMatrix w = whitening_for(dirac, WhiteningProcess::identity);
  EXPECT_LE(identity_residual(w.matrix()), 0.0);
  EXPECT_TRUE(whiten_empirical(dirac, w).points() == dirac.points());
}

TEST(WhitenEmpirical, OneDimensionalExamples) {
  const EmpiricalMeasure a(column({0, 2}));
  const EmpiricalMeasure b(column({0, 4}));
  const Matrix wa = whiten_empirical(a, whitening_for(a)).points();
  const Matrix wb = whiten_empirical(b, whitening_for(b)).points();
  EXPECT_LE(max_abs(wa - column({0, 2})), 1e-15);
  EXPECT_LE(max_abs(wb - column({0, 2})), 1e-15);
}

TEST(WhitenGaussian, Examples) {
  const GaussianMeasure g(vec({2}), rows({{4}}));
  const GaussianMeasure w = whiten_gaussian(g, whitening_for(g));
  EXPECT_NEAR(w.mean()(0), 1.0, 1e-15);
  EXPECT_NEAR(w.covariance()(0, 0), 1.0, 1e-15);

  const GaussianMeasure z(vec({0, 0}), rows({{2, 0.5}, {0.5, 3}}));
  const GaussianMeasure wz = whiten_gaussian(z, whitening_for(z));
  EXPECT_LE(max_abs(wz.mean()), 0.0);
  EXPECT_LE(identity_residual(wz.covariance()), 1e-12);

  const GaussianMeasure u(vec({1, -1}), Matrix::Identity(2, 2));
  const GaussianMeasure wu = whiten_gaussian(u, whitening_for(u));
  EXPECT_LE(max_abs(wu.mean() - u.mean()), 1e-15);
}

TEST(WhitenEmpirical, SelfCovarianceIsIdentity) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    const EmpiricalMeasure m(normal_matrix(rng, 50, 3) * random_spd(rng, 3));
    for (WhiteningProcess p : {WhiteningProcess::zca_cor, WhiteningProcess::cholesky}) {
      const EmpiricalMeasure w = whiten_empirical(m, whitening_for(m, p));
      EXPECT_LE(identity_residual(estimate_covariance(w)), 1e-8);
    }
  }
}

TEST(WhitenEmpirical, ScaleStability) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix x = normal_matrix(rng, 40, 4) * random_spd(rng, 4) + Matrix::Constant(40, 4, 1.0);
    const Matrix q = random_diagonal(rng, 4, 1e-3, 1e3);
    const EmpiricalMeasure m(x);
    const EmpiricalMeasure mq(x * q);
    for (WhiteningProcess p : {WhiteningProcess::zca_cor, WhiteningProcess::cholesky}) {
      const Matrix a = whiten_empirical(m, whitening_for(m, p)).points();
      const Matrix b = whiten_empirical(mq, whitening_for(mq, p)).points();
      EXPECT_LE(max_abs(a - b), 1e-8 * (1.0 + max_abs(a)));
    }
  }
}

TEST(ZcaCor, TranslationLeavesMatrixUnchanged) {
  std::mt19937_64 rng(6);
  const Matrix x = normal_matrix(rng, 64, 3) * random_spd(rng, 3);
  const Matrix shifted = x.rowwise() + vec({0.5, -2.0, 8.0}).transpose();
  const WhiteningMatrix w1 = whitening_for(EmpiricalMeasure(x));
  const WhiteningMatrix w2 = whitening_for(EmpiricalMeasure(shifted));
  EXPECT_LE(max_abs(w1.matrix() - w2.matrix()), 1e-12);
  const WhiteningMatrix c1 = zca_cor_whitening(vec({0, 0, 0}), estimate_covariance(EmpiricalMeasure(x)));
  const WhiteningMatrix c2 = zca_cor_whitening(vec({1, 1, 1}), estimate_covariance(EmpiricalMeasure(x)));
  EXPECT_TRUE(c1.matrix() == c2.matrix());
}
