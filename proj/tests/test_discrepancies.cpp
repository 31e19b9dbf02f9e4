#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "whitemetric/discrepancies.hpp"

using namespace whitemetric;
using namespace testutil;

namespace {

SupSearchConfig small_config(std::size_t starts = 16) {
  SupSearchConfig c;
  c.n_starts = starts;
  c.seed = 5;
  return c;
}

GaussianMeasure random_gaussian_measure(std::mt19937_64& rng, Index d) {
  return GaussianMeasure(normal_matrix(rng, d, 1).col(0) * 2.0, random_spd(rng, d));
}

WhiteningMatrix identity_for(const EmpiricalMeasure& m) {
  return whitening_for(m, WhiteningProcess::identity);
}

}  // namespace

TEST(WhiteWasserstein, OneDimensionalSameShapeIsZero) {
  const DiscrepancyResult r = white_wasserstein(EmpiricalMeasure(column({0, 2})), EmpiricalMeasure(column({0, 4})));
  EXPECT_NEAR(r.value, 0.0, 1e-15);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.kind, DiscrepancyKind::white_wasserstein);
}

TEST(WhiteWasserstein, IdenticalMeasuresZero) {
  std::mt19937_64 rng(1);
  const EmpiricalMeasure m(normal_matrix(rng, 20, 3) * random_spd(rng, 3));
  EXPECT_EQ(white_wasserstein(m, m).value, 0.0);
}

TEST(WhiteWasserstein, ShiftedPairAgainstQuantileOracle) {
  // Whitened supports are {0, 2} and {5, 7}, so every unit of mass moves 5.
  const EmpiricalMeasure a(column({0, 2}));
  const EmpiricalMeasure b(column({10, 14}));
  const double oracle = w1_1d_quantile(EmpiricalMeasure(column({0, 2})), EmpiricalMeasure(column({5, 7})));
  EXPECT_NEAR(oracle, 5.0, 1e-15);
  EXPECT_NEAR(white_wasserstein(a, b).value, oracle, 1e-14);
}

TEST(WhiteWasserstein, RecordsMetadata) {
  const DiscrepancyResult r = white_wasserstein(EmpiricalMeasure(column({0, 2, 3})), EmpiricalMeasure(column({1, 4})));
  EXPECT_TRUE(r.metadata.count("method"));
  EXPECT_TRUE(r.metadata.count("marginal_error"));
  EXPECT_EQ(std::get<std::string>(r.metadata.at("whitening")), "zca-cor");
}

TEST(WhiteWassersteinGaussian, Examples) {
  const GaussianMeasure a(vec({1, 0}), Matrix::Identity(2, 2));
  const GaussianMeasure b(vec({0, 1}), Matrix::Identity(2, 2));
  const DiscrepancyResult r = white_wasserstein_gaussian(a, b);
  EXPECT_NEAR(r.value, std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(white_wasserstein_gaussian(GaussianMeasure(vec({2}), rows({{4}})),
                                         GaussianMeasure(vec({3}), rows({{9}})))
                  .value,
              0.0, 1e-15);
  const GaussianMeasure c(vec({2, 4}), rows({{4, 0}, {0, 16}}));
  const GaussianMeasure e(vec({1, 1}), Matrix::Identity(2, 2));
  EXPECT_NEAR(white_wasserstein_gaussian(c, e).value, 0.0, 1e-15);
}

TEST(WhiteFourierGaussian, Examples) {
  const GaussianMeasure a(vec({1, 0}), Matrix::Identity(2, 2));
  const GaussianMeasure b(vec({0, 1}), Matrix::Identity(2, 2));
  EXPECT_NEAR(white_fourier_gaussian(a, b).value, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(white_fourier_gaussian(a, a).value, 0.0);
  EXPECT_TRUE(white_fourier_gaussian(a, b).exact);
}

TEST(WhiteFourierGaussian, AgreesWithWhiteWassersteinGaussian) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const Index d = 1 + rep % 5;
    const GaussianMeasure a = random_gaussian_measure(rng, d);
    const GaussianMeasure b = random_gaussian_measure(rng, d);
    EXPECT_NEAR(white_fourier_gaussian(a, b).value, white_wasserstein_gaussian(a, b).value, 1e-12);
  }
}

TEST(WhiteFourierGaussian, NumericSearchMatchesClosedForm) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Index d = 1 + rep % 3;
    const GaussianMeasure a = random_gaussian_measure(rng, d);
    const GaussianMeasure b = random_gaussian_measure(rng, d);
    const double exact = white_fourier_gaussian(a, b).value;
    EXPECT_NEAR(white_fourier_numeric(a, b, small_config()).value, exact, 1e-6 * exact);
  }
}

TEST(WhiteFourier, IdenticalMeasuresZero) {
  std::mt19937_64 rng(4);
  const EmpiricalMeasure m(normal_matrix(rng, 20, 2));
  const DiscrepancyResult r = white_fourier(m, m, small_config());
  EXPECT_EQ(r.value, 0.0);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(std::get<double>(r.metadata.at("n_starts")), 16.0);
}

TEST(WhiteFourier, ObjectiveAtOriginIsMeanDifference) {
  std::mt19937_64 rng(5);
  const EmpiricalMeasure a(normal_matrix(rng, 30, 3) * random_spd(rng, 3));
  const EmpiricalMeasure b(normal_matrix(rng, 25, 3).array() + 2.0);
  const WhiteningMatrix wa = whitening_for(a);
  const WhiteningMatrix wb = whitening_for(b);
  const CharFn f1 = empirical_cf(whiten_empirical(a, wa));
  const CharFn f2 = empirical_cf(whiten_empirical(b, wb));
  const double at0 = fourier_objective(f1, f2, Vector::Zero(3));
  EXPECT_NEAR(at0, (wa.whitened_mean() - wb.whitened_mean()).norm(), 1e-12);
  EXPECT_GE(white_fourier(a, b, small_config()).value, at0);
}

TEST(WhiteFourier, LargeGaussianSamples) {
  const GaussianMeasure a(vec({1, 0}), Matrix::Identity(2, 2));
  const GaussianMeasure b(vec({0, 1}), Matrix::Identity(2, 2));
  const EmpiricalMeasure sa = sample_gaussian(a, 5000, 11);
  const EmpiricalMeasure sb = sample_gaussian(b, 5000, 12);
  EXPECT_NEAR(white_fourier(sa, sb, small_config(8)).value, std::sqrt(2.0), 0.1);
}

TEST(Gini, OneDimensionalExample) {
  const DiscrepancyResult r = gini_discrepancy(EmpiricalMeasure(column({0, 2})), EmpiricalMeasure(column({0, 4})));
  EXPECT_NEAR(r.value, (0.0 + 2.0 + 2.0 + 0.0) / 4.0, 1e-15);
  EXPECT_EQ(r.kind, DiscrepancyKind::gini);
}

TEST(Gini, CoincidentDiracsUnderIdentity) {
  const EmpiricalMeasure d(column({0}));
  EXPECT_EQ(gini_discrepancy(d, identity_for(d), d, identity_for(d)).value, 0.0);
}

TEST(Gini, EqualsIndependentPlanCost) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const EmpiricalMeasure a(normal_matrix(rng, 15, 2) * random_spd(rng, 2));
    const EmpiricalMeasure b(normal_matrix(rng, 11, 2).array() + 1.0);
    const EmpiricalMeasure wa = whiten_empirical(a, whitening_for(a));
    const EmpiricalMeasure wb = whiten_empirical(b, whitening_for(b));
    const Matrix independent = a.weights() * b.weights().transpose();
    const Matrix c = kernels::serial::cost_matrix(wa.points(), wb.points(), GroundCost::euclidean);
    EXPECT_NEAR(gini_discrepancy(a, b).value, plan_cost(independent, c), 1e-12);
  }
}

TEST(Gini, BoundsWhiteWassersteinFromAbove) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const EmpiricalMeasure a(normal_matrix(rng, 12, 3) * random_spd(rng, 3));
    const EmpiricalMeasure b(normal_matrix(rng, 12, 3));
    EXPECT_LE(white_wasserstein(a, b).value, gini_discrepancy(a, b).value + 1e-12);
  }
}

TEST(GiniSelf, Examples) {
  EXPECT_NEAR(gini_self(EmpiricalMeasure(column({0, 2}))), 1.0, 1e-15);
  const EmpiricalMeasure same(rows({{1, 1}, {1, 1}, {1, 1}}));
  EXPECT_EQ(gini_self(same, identity_for(same)), 0.0);
}

TEST(GiniSelf, InvariantUnderRescaling) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix x = normal_matrix(rng, 25, 3) * random_spd(rng, 3);
    const double base = gini_self(EmpiricalMeasure(x));
    EXPECT_NEAR(gini_self(EmpiricalMeasure(x * random_diagonal(rng, 3, 0.1, 10))), base, 1e-10);
  }
}

TEST(GiniGaussianUpper, Examples) {
  const GaussianMeasure a(vec({1, 2}), Matrix::Identity(2, 2));
  const DiscrepancyResult r = gini_gaussian_upper(a, a);
  EXPECT_NEAR(r.value, 2.0, 1e-15);
  EXPECT_EQ(r.kind, DiscrepancyKind::gini_upper);
  EXPECT_TRUE(r.exact);
  const GaussianMeasure b(vec({0}), rows({{1}}));
  const GaussianMeasure c(vec({std::sqrt(2.0)}), rows({{1}}));
  EXPECT_NEAR(gini_gaussian_upper(b, c).value, 2.0, 1e-15);
}

TEST(GiniGaussianMc, OneDimensionalAnalyticValue) {
  const GaussianMeasure a(vec({1}), rows({{4}}));
  const GaussianMeasure b(vec({2}), rows({{16}}));
  const McEstimate e = gini_gaussian_mc(a, b, 100000, 1);
  EXPECT_NEAR(e.estimate, 2.0 / std::sqrt(std::numbers::pi), 3.0 * e.std_error);
  EXPECT_GT(e.std_error, 0.0);
}

TEST(GiniGaussianMc, BelowUpperBoundAndDeterministic) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const Index d = 1 + rep % 4;
    const GaussianMeasure a = random_gaussian_measure(rng, d);
    const GaussianMeasure b = random_gaussian_measure(rng, d);
    const McEstimate e = gini_gaussian_mc(a, b, 20000, static_cast<std::uint64_t>(rep));
    EXPECT_LE(e.estimate, gini_gaussian_upper(a, b).value + 3.0 * e.std_error);
    const McEstimate again = gini_gaussian_mc(a, b, 20000, static_cast<std::uint64_t>(rep));
    EXPECT_EQ(e.estimate, again.estimate);
    EXPECT_EQ(e.std_error, again.std_error);
  }
}

TEST(TauGaussian, UnitMahalanobisNorm) {
  const GaussianMeasure g(vec({2, 0}), rows({{4, 0}, {0, 1}}));
  EXPECT_NEAR(tau_gaussian(g), 1.0 / (2.0 * std::sqrt(std::exp(1.0))), 1e-15);
  EXPECT_NEAR(tau_gaussian(g), 0.30327, 1e-5);
}

TEST(TauGaussian, HomogeneityAndCvnRelation) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 30; ++rep) {
    const Index d = 1 + rep % 4;
    const GaussianMeasure g = random_gaussian_measure(rng, d);
    const GaussianMeasure g3(3.0 * g.mean(), g.covariance());
    EXPECT_NEAR(tau_gaussian(g3), tau_gaussian(g) / 3.0, 1e-12 * tau_gaussian(g));
    EXPECT_NEAR(2.0 * std::sqrt(std::exp(1.0)) * tau_gaussian(g), cvn_gaussian(g), 1e-12 * cvn_gaussian(g));
    const GaussianMeasure g2(2.0 * g.mean(), g.covariance());
    EXPECT_NEAR(cvn_gaussian(g2), cvn_gaussian(g) / 2.0, 1e-12 * cvn_gaussian(g));
  }
}

TEST(CvnGaussian, UnitVector) {
  EXPECT_NEAR(cvn_gaussian(GaussianMeasure(vec({1, 0, 0}), Matrix::Identity(3, 3))), 1.0, 1e-15);
}

TEST(Tau, ZeroMeanErrors) {
  const GaussianMeasure g(vec({0, 0}), Matrix::Identity(2, 2));
  EXPECT_THROW(tau_gaussian(g), ZeroMean);
  EXPECT_THROW(cvn_gaussian(g), ZeroMean);
  EXPECT_THROW(tau_index(g, small_config()), ZeroMean);
  EXPECT_THROW(tau_index(EmpiricalMeasure(column({-1, 1})), small_config()), ZeroMean);
}

TEST(TauIndex, GaussianNumericMatchesClosedForm) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const GaussianMeasure g = random_gaussian_measure(rng, 1 + rep % 3);
    EXPECT_NEAR(tau_index(g, small_config()), tau_gaussian(g), 1e-6 * tau_gaussian(g));
  }
}

TEST(TauIndex, LargeSampleNearClosedForm) {
  const GaussianMeasure g(vec({1, 0}), Matrix::Identity(2, 2));
  const EmpiricalMeasure s = sample_gaussian(g, 100000, 21);
  EXPECT_NEAR(tau_index(s, small_config(4)), 0.30327, 0.01);
}

TEST(TauIndex, NonNegativeAndScaleInvariant) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix x = normal_matrix(rng, 40, 2) * random_spd(rng, 2) + Matrix::Constant(40, 2, 2.0);
    const double base = tau_index(EmpiricalMeasure(x), small_config());
    EXPECT_GE(base, 0.0);
    const double scaled = tau_index(EmpiricalMeasure(x * random_diagonal(rng, 2, 0.1, 10)), small_config());
    EXPECT_NEAR(scaled, base, 1e-8 * (1.0 + base));
  }
}

TEST(TauIndex, ShrinksWithSpreadAroundFixedMean) {
  std::mt19937_64 rng(13);
  const Matrix z = normal_matrix(rng, 50, 2);
  const Vector m = vec({1.0, 2.0});
  double previous = INFINITY;
  for (double s : {1.0, 0.5, 0.25, 0.1, 0.01}) {
    const Matrix x = (s * z).rowwise() + m.transpose();
    const EmpiricalMeasure e(x);
    const double t = tau_search(empirical_cf(e), estimate_mean(e), small_config()).value;
    EXPECT_LT(t, previous);
    previous = t;
  }
  EXPECT_LT(previous, 0.01);
}

TEST(Discrepancies, DimensionMismatch) {
  EXPECT_THROW(white_wasserstein(EmpiricalMeasure(column({0, 1})), EmpiricalMeasure(rows({{0, 0}, {1, 2}}))),
               DimensionMismatch);
}

TEST(Discrepancies, ScaleInvariantAllKinds) {
  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix x = normal_matrix(rng, 20, 2) * random_spd(rng, 2);
    const Matrix y = normal_matrix(rng, 16, 2).array() + 1.0;
    const Matrix q1 = random_diagonal(rng, 2, 0.1, 10);
    const Matrix q2 = random_diagonal(rng, 2, 0.1, 10);
    const EmpiricalMeasure a(x), b(y), aq(x * q1), bq(y * q2);
    const double w = white_wasserstein(a, b).value;
    EXPECT_NEAR(white_wasserstein(aq, bq).value, w, 1e-8 * (1.0 + w));
    const double g = gini_discrepancy(a, b).value;
    EXPECT_NEAR(gini_discrepancy(aq, bq).value, g, 1e-8 * (1.0 + g));
    const double f = white_fourier(a, b, small_config()).value;
    EXPECT_NEAR(white_fourier(aq, bq, small_config()).value, f, 1e-8 * (1.0 + f));
  }
}
