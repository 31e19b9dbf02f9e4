#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "whitemetric/transport.hpp"

using namespace whitemetric;
using namespace testutil;

namespace {

double brute_force_assignment(const Matrix& c) {
  std::vector<Index> perm(static_cast<std::size_t>(c.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (Index i = 0; i < c.rows(); ++i) s += c(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(c.rows());
}

double sorted_quantile_cost(Matrix a, Matrix b) {
  std::vector<double> x(a.data(), a.data() + a.size());
  std::vector<double> y(b.data(), b.data() + b.size());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

void expect_valid_plan(const TransportPlan& p, const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                       GroundCost g = GroundCost::euclidean) {
  EXPECT_GE(p.coupling.minCoeff(), 0.0);
  EXPECT_LE((p.coupling.rowwise().sum() - a.weights()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((p.coupling.colwise().sum().transpose() - b.weights()).cwiseAbs().maxCoeff(), 1e-8);
  const Matrix c = kernels::serial::cost_matrix(a.points(), b.points(), g);
  EXPECT_NEAR(p.cost, plan_cost(p.coupling, c), 1e-10);
}

}  // namespace

TEST(SolveW1Exact, TwoPointExample) {
  const EmpiricalMeasure a(rows({{0, 0}, {1, 0}}));
  const EmpiricalMeasure b(rows({{0, 0}, {0, 1}}));
  const TransportPlan p = solve_w1_exact(a, b);
  EXPECT_NEAR(p.cost, (0.0 + std::sqrt(2.0)) / 2.0, 1e-15);
  expect_valid_plan(p, a, b);
}

TEST(SolveW1Exact, IdenticalMeasuresCostZero) {
  std::mt19937_64 rng(1);
  const EmpiricalMeasure a(normal_matrix(rng, 20, 3));
  EXPECT_EQ(solve_w1_exact(a, a).cost, 0.0);
}

TEST(SolveW1Exact, OneDimensionalQuantileExample) {
  const EmpiricalMeasure a(column({0, 1}));
  const EmpiricalMeasure b(column({2, 3}));
  EXPECT_NEAR(solve_w1_exact(a, b).cost, 2.0, 1e-15);
}

TEST(W1Quantile, Examples) {
  EXPECT_EQ(w1_1d_quantile(EmpiricalMeasure(column({0, 2})), EmpiricalMeasure(column({0, 2}))), 0.0);
  EXPECT_NEAR(w1_1d_quantile(EmpiricalMeasure(column({0, 1})), EmpiricalMeasure(column({2, 3}))), 2.0,
              1e-15);
  EXPECT_NEAR(w1_1d_quantile(EmpiricalMeasure(column({0})), EmpiricalMeasure(column({5}))), 5.0, 1e-15);
}

TEST(W1Quantile, WeightedAgainstGeneralSolver) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    Vector wa(9), wb(6);
    for (Index i = 0; i < 9; ++i) wa(i) = u(rng);
    for (Index i = 0; i < 6; ++i) wb(i) = u(rng);
    const auto a = EmpiricalMeasure::with_unnormalized_weights(normal_matrix(rng, 9, 1), wa);
    const auto b = EmpiricalMeasure::with_unnormalized_weights(normal_matrix(rng, 6, 1), wb);
    EXPECT_NEAR(w1_1d_quantile(a, b), solve_w1_exact(a, b).cost, 1e-10);
  }
}

TEST(W1Quantile, RejectsMultivariateInput) {
  const EmpiricalMeasure a(rows({{0, 0}}));
  EXPECT_THROW(w1_1d_quantile(a, a), DimensionMismatch);
}

TEST(SolveW1Exact, MatchesExhaustivePermutations) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    const Index n = 1 + static_cast<Index>(seed % 7);
    const Index d = 1 + static_cast<Index>((seed / 7) % 3);
    const EmpiricalMeasure a(normal_matrix(rng, n, d));
    const EmpiricalMeasure b(normal_matrix(rng, n, d));
    const Matrix c = kernels::serial::cost_matrix(a.points(), b.points(), GroundCost::euclidean);
    const TransportPlan p = solve_w1_exact(a, b);
    EXPECT_NEAR(p.cost, brute_force_assignment(c), 1e-10) << "seed " << seed;
    expect_valid_plan(p, a, b);
  }
}

TEST(SolveW1Exact, MatchesSortedCouplingIn1D) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    const Index n = 2 + static_cast<Index>(seed % 40);
    const Matrix x = normal_matrix(rng, n, 1);
    const Matrix y = normal_matrix(rng, n, 1) * 2.0;
    const EmpiricalMeasure a(x), b(y);
    const double oracle = sorted_quantile_cost(x, y);
    EXPECT_NEAR(solve_w1_exact(a, b).cost, oracle, 1e-10);
    EXPECT_NEAR(w1_1d_quantile(a, b), oracle, 1e-10);
  }
}

TEST(SolveW1Exact, GeneralSolverAgreesWithAssignment) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed + 50);
    const Index n = 5 + static_cast<Index>(seed);
    const Matrix c = kernels::serial::cost_matrix(normal_matrix(rng, n, 2), normal_matrix(rng, n, 2),
                                                  GroundCost::euclidean);
    const Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
    const TransportPlan assign = solve_exact_on_costs(c, w, w);
    const TransportPlan general = solve_exact_on_costs(c, w, w, true);
    EXPECT_NEAR(assign.cost, general.cost, 1e-10);
    EXPECT_LE(general.marginal_error, 1e-10);
  }
}

TEST(SolveW1Exact, WeightedUnequalSizesSatisfyMarginals) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Vector wa(13), wb(8);
    for (Index i = 0; i < 13; ++i) wa(i) = u(rng);
    for (Index i = 0; i < 8; ++i) wb(i) = u(rng);
    const auto a = EmpiricalMeasure::with_unnormalized_weights(normal_matrix(rng, 13, 2), wa);
    const auto b = EmpiricalMeasure::with_unnormalized_weights(normal_matrix(rng, 8, 2), wb);
    expect_valid_plan(solve_w1_exact(a, b), a, b);
  }
}

TEST(SolveW1Exact, TriangleInequality) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    const EmpiricalMeasure a(normal_matrix(rng, 12, 2));
    const EmpiricalMeasure b(normal_matrix(rng, 12, 2).array() + 1.0);
    const EmpiricalMeasure c(normal_matrix(rng, 12, 2) * 3.0);
    EXPECT_LE(solve_w1_exact(a, b).cost,
              solve_w1_exact(a, c).cost + solve_w1_exact(c, b).cost + 1e-8);
  }
}

TEST(SolveW1Exact, DenseLimitEnforcedForGeneralSolver) {
  std::mt19937_64 rng(11);
  const auto a = EmpiricalMeasure::with_unnormalized_weights(normal_matrix(rng, 30, 1),
                                                            Vector::LinSpaced(30, 1, 2));
  const EmpiricalMeasure b(normal_matrix(rng, 40, 1));
  ExactOtOptions o;
  o.dense_limit = 100;
  EXPECT_THROW(solve_w1_exact(a, b, o), SizeLimitExceeded);
}

TEST(SolveW1Exact, DimensionMismatch) {
  EXPECT_THROW(solve_w1_exact(EmpiricalMeasure(rows({{0, 0}})), EmpiricalMeasure(column({0}))),
               DimensionMismatch);
}

TEST(SolveAssignment, SparseCertifiedEqualsDense) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    std::mt19937_64 rng(seed + 300);
    const Index n = 256 + static_cast<Index>(seed) * 64;
    const Matrix c = kernels::serial::cost_matrix(normal_matrix(rng, n, 2), normal_matrix(rng, n, 2),
                                                  GroundCost::euclidean);
    const auto sparse = solve_assignment(c);
    const auto dense = solve_assignment_dense(c);
    double cs = 0.0, cd = 0.0;
    for (Index i = 0; i < n; ++i) {
      cs += c(i, sparse[static_cast<std::size_t>(i)]);
      cd += c(i, dense[static_cast<std::size_t>(i)]);
    }
    EXPECT_NEAR(cs, cd, 1e-9);
    std::vector<Index> sorted = sparse;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < n; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  }
}

TEST(SolveAssignment, DeterministicOnTies) {
  const Matrix c = Matrix::Ones(5, 5);
  const auto a = solve_assignment_dense(c);
  EXPECT_EQ(a, solve_assignment_dense(c));
  EXPECT_EQ(a, solve_assignment(c));
}

TEST(Sinkhorn, IdenticalMeasuresSmallEpsilon) {
  std::mt19937_64 rng(12);
  const EmpiricalMeasure a(normal_matrix(rng, 10, 2) * 3.0);
  SinkhornOptions o;
  o.epsilon = 1e-3;
  const TransportPlan p = solve_sinkhorn(a, a, o);
  EXPECT_LE(p.cost, 1e-3);
  expect_valid_plan(p, a, a);
}

TEST(Sinkhorn, OneDimensionalExample) {
  SinkhornOptions o;
  o.epsilon = 1e-4;
  const TransportPlan p = solve_sinkhorn(EmpiricalMeasure(column({0, 1})), EmpiricalMeasure(column({2, 3})), o);
  EXPECT_NEAR(p.cost, 2.0, 1e-2);
}

TEST(Sinkhorn, LargeEpsilonApproachesIndependentPlan) {
  std::mt19937_64 rng(13);
  const EmpiricalMeasure a(normal_matrix(rng, 15, 2));
  const EmpiricalMeasure b(normal_matrix(rng, 12, 2).array() + 0.5);
  const double independent = kernels::serial::mean_pair_distance(a.points(), a.weights(), b.points(), b.weights());
  SinkhornOptions o;
  o.epsilon = 1e4;
  const TransportPlan p = solve_sinkhorn(a, b, o);
  EXPECT_LE(p.cost, independent + 1e-12);
  EXPECT_GE(p.cost, 0.99 * independent);
}

TEST(Sinkhorn, ConvergesTowardsExactCost) {
  std::mt19937_64 rng(14);
  const EmpiricalMeasure a(normal_matrix(rng, 20, 2));
  const EmpiricalMeasure b(normal_matrix(rng, 20, 2).array() + 1.0);
  const double exact = solve_w1_exact(a, b).cost;
  double previous = INFINITY;
  for (double eps : {1.0, 0.1, 0.01}) {
    SinkhornOptions o;
    o.epsilon = eps;
    const TransportPlan p = solve_sinkhorn(a, b, o);
    expect_valid_plan(p, a, b);
    EXPECT_GE(p.cost, exact - 1e-9);
    EXPECT_LE(p.cost - exact, previous);
    previous = p.cost - exact;
  }
  EXPECT_LE(previous, 0.05);
}

TEST(Sinkhorn, RejectsNonPositiveEpsilon) {
  const EmpiricalMeasure a(column({0, 1}));
  SinkhornOptions o;
  o.epsilon = 0.0;
  EXPECT_THROW(solve_sinkhorn(a, a, o), InvalidArgument);
}

TEST(GaussianW2, EqualCovariances) {
  const Matrix s = rows({{2, 0.3}, {0.3, 1}});
  EXPECT_NEAR(gaussian_w2(GaussianMeasure(vec({3, 4}), s), GaussianMeasure(vec({0, 0}), s)), 5.0, 1e-12);
}

TEST(GaussianW2, ScaledIdentity) {
  const GaussianMeasure a(vec({0, 0}), 4.0 * Matrix::Identity(2, 2));
  const GaussianMeasure b(vec({0, 0}), Matrix::Identity(2, 2));
  EXPECT_NEAR(gaussian_w2(a, b), std::sqrt(2.0), 1e-12);
}

TEST(GaussianW2, SelfDistanceZero) {
  const GaussianMeasure a(vec({1, 2, 3}), rows({{2, 0.3, 0}, {0.3, 1, 0.1}, {0, 0.1, 0.5}}));
  EXPECT_NEAR(gaussian_w2(a, a), 0.0, 1e-7);
}

TEST(GaussianW2, OneDimensionalClosedForm) {
  // W2^2 = (m1 - m2)^2 + (s1 - s2)^2 on the line.
  const GaussianMeasure a(vec({1}), rows({{4}}));
  const GaussianMeasure b(vec({3}), rows({{1}}));
  EXPECT_NEAR(gaussian_w2(a, b), std::sqrt(4.0 + 1.0), 1e-12);
}

TEST(GaussianW2Map, Examples) {
  const GaussianMeasure a(vec({0, 0}), Matrix::Identity(2, 2));
  const GaussianMeasure b(vec({0, 0}), 4.0 * Matrix::Identity(2, 2));
  EXPECT_LE(max_abs(gaussian_w2_map(a, b, vec({1, -2})) - vec({2, -4})), 1e-12);
  EXPECT_LE(max_abs(gaussian_w2_map(a, a, vec({0.3, 0.7})) - vec({0.3, 0.7})), 1e-12);

  const GaussianMeasure c(vec({1, 2}), rows({{2, 0.5}, {0.5, 1}}));
  const GaussianMeasure e(vec({-1, 4}), rows({{1, -0.2}, {-0.2, 3}}));
  EXPECT_LE(max_abs(gaussian_w2_map(c, e, c.mean()) - e.mean()), 1e-12);
}

TEST(GaussianW2Map, PushesCovarianceForward) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    const GaussianMeasure a(Vector::Zero(3), random_spd(rng, 3));
    const GaussianMeasure b(Vector::Zero(3), random_spd(rng, 3));
    const Matrix m = gaussian_w2_linear_map(a, b);
    EXPECT_LE(max_abs(m * a.covariance() * m.transpose() - b.covariance()), 1e-8 * b.covariance().norm());
    EXPECT_LE(max_abs(m - m.transpose()), 1e-8 * m.norm());
  }
}

TEST(GaussianW2, EmpiricalConvergence) {
  const GaussianMeasure a(vec({0, 0}), rows({{1, 0.3}, {0.3, 0.8}}));
  const GaussianMeasure b(vec({1, -0.5}), rows({{2, -0.4}, {-0.4, 1}}));
  const EmpiricalMeasure sa = sample_gaussian(a, 1000, 1);
  const EmpiricalMeasure sb = sample_gaussian(b, 1000, 2);
  ExactOtOptions o;
  o.cost = GroundCost::squared_euclidean;
  EXPECT_NEAR(std::sqrt(solve_w1_exact(sa, sb, o).cost), gaussian_w2(a, b), 0.15);
}
