#pragma once

#include <cstddef>
#include <string>

#include "whitemetric/kernels.hpp"
#include "whitemetric/stats_core.hpp"

namespace whitemetric {

/// Coupling between two discrete measures. Rows index source points,
/// columns target points.
struct TransportPlan {
  Matrix coupling;
  double cost = 0.0;
  /// max(|row sums - source weights|_1, |col sums - target weights|_1)
  double marginal_error = 0.0;
  std::size_t iterations = 0;
  std::string method;
};

struct ExactOtOptions {
  GroundCost cost = GroundCost::euclidean;
  /// Largest N * M the dense solvers accept.
  std::size_t dense_limit = 4'000'000;
};

struct SinkhornOptions {
  double epsilon = 1e-2;
  std::size_t max_iter = 10'000;
  /// Stop when marginal_error falls below this.
  double tolerance = 1e-9;
  GroundCost cost = GroundCost::euclidean;
};

/// Exact optimal transport. One-dimensional inputs use the monotone
/// (sorted) coupling. Otherwise uniform equal-size inputs go to a
/// shortest-augmenting-path assignment solver and everything else to a dense
/// primal-dual (successive shortest path) transportation solver. All break
/// ties by lowest index, so costs are bit-stable.
TransportPlan solve_w1_exact(const EmpiricalMeasure& src,
                             const EmpiricalMeasure& dst,
                             const ExactOtOptions& opts = {});

/// Same solvers on a caller-provided cost matrix.
TransportPlan solve_exact_on_costs(const Matrix& costs, const Vector& src_w,
                                   const Vector& dst_w, bool force_general = false);

/// Linear assignment: returns for each row the assigned column, minimising
/// the summed cost. Square cost matrix. Large problems are solved on a
/// nearest-candidate subgraph and certified against the full dual; if the
/// certificate fails repeatedly the dense solver takes over.
std::vector<Index> solve_assignment(const Matrix& costs);

/// Dense Jonker-Volgenant reference solver.
std::vector<Index> solve_assignment_dense(const Matrix& costs);

/// W1 between 1-D measures from the monotone (quantile) coupling.
double w1_1d_quantile(const EmpiricalMeasure& src, const EmpiricalMeasure& dst);

/// Entropic OT, log-domain Sinkhorn. `cost` of the result is the transport
/// cost sum_ij pi_ij c_ij of the regularised plan (no entropy term).
TransportPlan solve_sinkhorn(const EmpiricalMeasure& src,
                             const EmpiricalMeasure& dst,
                             const SinkhornOptions& opts);

/// sum_ij pi_ij c(x_i, y_j) recomputed from scratch.
double plan_cost(const Matrix& coupling, const Matrix& costs);
double marginal_error(const Matrix& coupling, const Vector& src_w,
                      const Vector& dst_w);

/// Closed-form W2 between Gaussians:
/// W2^2 = |m1 - m2|^2 + Tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2}).
double gaussian_w2(const GaussianMeasure& a, const GaussianMeasure& b);

/// Linear part A of the Gaussian optimal map T(x) = m2 + A (x - m1).
Matrix gaussian_w2_linear_map(const GaussianMeasure& a,
                              const GaussianMeasure& b);
Vector gaussian_w2_map(const GaussianMeasure& a, const GaussianMeasure& b,
                       const Vector& x);

}  // namespace whitemetric
