#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "whitemetric/property_suite.hpp"

using namespace whitemetric;
using namespace testutil;

namespace {

void expect_same(const CheckReport& a, const CheckReport& b) {
  EXPECT_EQ(a.check_name, b.check_name);
  EXPECT_EQ(a.instances, b.instances);
  EXPECT_EQ(a.failures, b.failures);
  EXPECT_EQ(a.worst_slack, b.worst_slack);
  EXPECT_EQ(a.seed, b.seed);
}

}  // namespace

TEST(Generators, InstancesAreWhitenable) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const InstancePair p = random_instance_pair(s);
    EXPECT_EQ(p.a.dim(), p.b.dim());
    const std::set<Index> dims{1, 2, 3, 5};
    EXPECT_TRUE(dims.count(p.a.dim()));
    EXPECT_GE(p.a.size(), 8);
    EXPECT_LE(p.a.size(), 64);
    EXPECT_NO_THROW(whitening_for(p.a));
    EXPECT_NO_THROW(whitening_for(p.b));
  }
}

TEST(Generators, Deterministic) {
  const InstancePair p = random_instance_pair(77);
  const InstancePair q = random_instance_pair(77);
  EXPECT_TRUE(p.a.points() == q.a.points());
  EXPECT_TRUE(p.b.weights() == q.b.weights());
  EXPECT_TRUE(random_gaussian(5, 3).covariance() == random_gaussian(5, 3).covariance());
}

TEST(ScaleInvariance, IdentityScalingHasZeroSlack) {
  for (DiscrepancyKind k : {DiscrepancyKind::white_wasserstein, DiscrepancyKind::gini}) {
    const CheckReport r = check_scale_invariance(k, 10, 1, 1.0, 1.0);
    EXPECT_EQ(r.failures, 0u);
    EXPECT_EQ(r.worst_slack, 0.0);
  }
}

TEST(ScaleInvariance, SmallRunsPass) {
  for (DiscrepancyKind k :
       {DiscrepancyKind::white_wasserstein, DiscrepancyKind::white_fourier, DiscrepancyKind::gini}) {
    const CheckReport r = check_scale_invariance(k, 10, 2);
    EXPECT_EQ(r.instances, 10u);
    EXPECT_TRUE(r.passed()) << r.check_name << " worst slack " << r.worst_slack;
  }
}

TEST(ScaleInvariance, WideGiniScaleRange) {
  const CheckReport r = check_scale_invariance(DiscrepancyKind::gini, 100, 3, 1e-2, 1e2);
  EXPECT_TRUE(r.passed()) << r.worst_slack;
}

TEST(UniformRedistribution, SmallRunsPass) {
  for (DiscrepancyKind k :
       {DiscrepancyKind::white_wasserstein, DiscrepancyKind::white_fourier, DiscrepancyKind::gini}) {
    const CheckReport r = check_uniform_redistribution(k, 20, 4);
    EXPECT_TRUE(r.passed()) << r.check_name << " worst slack " << r.worst_slack;
  }
}

TEST(UniformRedistribution, MatchedShiftsDoNotIncreaseDiscrepancy) {
  const InstancePair p = random_instance_pair(9);
  const WhiteningMatrix wa = whitening_for(p.a);
  const WhiteningMatrix wb = whitening_for(p.b);
  const Index d = p.a.dim();
  const Vector c1 = Vector::Constant(d, 1.5);
  // C2 solves W_b C2 = W_a C1, so the bound's shift term vanishes.
  const Vector c2 = wb.matrix().fullPivLu().solve(wa.matrix() * c1);
  const Matrix xa = p.a.points().rowwise() + c1.transpose();
  const Matrix xb = p.b.points().rowwise() + c2.transpose();
  const double base = white_wasserstein(p.a, p.b).value;
  const double shifted = white_wasserstein(EmpiricalMeasure(xa, p.a.weights()), EmpiricalMeasure(xb, p.b.weights())).value;
  EXPECT_LE(shifted, base + 1e-9);
}

TEST(Prop41, SmallRunPasses) {
  const CheckReport r = check_prop41(10, 5);
  EXPECT_EQ(r.instances, 20u);
  EXPECT_TRUE(r.passed()) << r.worst_slack;
}

TEST(Prop42, SmallRunPasses) {
  const CheckReport r = check_prop42(20, 6);
  EXPECT_TRUE(r.passed()) << r.worst_slack;
}

TEST(Prop42, DiracPartnerGivesEquality) {
  const EmpiricalMeasure mu(column({0, 2}));
  const EmpiricalMeasure nu(column({3}));
  const WhiteningMatrix wi = whitening_for(mu, WhiteningProcess::identity);
  const WhiteningMatrix wn = whitening_for(nu, WhiteningProcess::identity);
  const double g = gini_discrepancy(mu, wi, nu, wn).value;
  const double w = white_wasserstein(mu, wi, nu, wn).value;
  EXPECT_NEAR(g, w, 1e-15);
  EXPECT_LE(g, w + std::min(gini_self(mu, wi), gini_self(nu, wn)) + 1e-15);
}

TEST(Prop43, SmallRunPasses) {
  const CheckReport r = check_prop43(10, 7);
  EXPECT_TRUE(r.passed()) << r.worst_slack;
}

TEST(CorollaryDirac, HandExample) {
  const EmpiricalMeasure mu(column({0, 2}));
  const EmpiricalMeasure nu(column({3}));
  const WhiteningMatrix wi = whitening_for(mu, WhiteningProcess::identity);
  const WhiteningMatrix wn = whitening_for(nu, WhiteningProcess::identity);
  const double w = white_wasserstein(mu, wi, nu, wn).value;
  EXPECT_NEAR(w, (3.0 + 1.0) / 2.0, 1e-15);
  const CharFn f1 = empirical_cf(mu);
  const CharFn f2 = empirical_cf(nu);
  const double f0 = fourier_objective(f1, f2, Vector::Zero(1));
  EXPECT_NEAR(f0, 2.0, 1e-15);
  EXPECT_LE(f0, w + 1e-15);
  EXPECT_LE(w, 2.0 + 1.0 + 1e-15);
}

TEST(CorollaryDirac, SmallRunPasses) {
  const CheckReport r = check_corollary_dirac(10, 8);
  EXPECT_TRUE(r.passed()) << r.worst_slack;
}

TEST(Checks, DeterministicPerSeed) {
  expect_same(check_scale_invariance(DiscrepancyKind::white_fourier, 5, 10),
              check_scale_invariance(DiscrepancyKind::white_fourier, 5, 10));
  expect_same(check_prop41(5, 11), check_prop41(5, 11));
  expect_same(check_prop43(5, 12), check_prop43(5, 12));
}

TEST(Checks, WorstSlackIsNonPositiveMargin) {
  const CheckReport r = check_prop42(10, 13);
  EXPECT_TRUE(std::isfinite(r.worst_slack));
  EXPECT_GE(r.worst_slack, -kBoundTolerance);
}
