#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "whitemetric/discrepancies.hpp"

namespace whitemetric {

/// Outcome of one randomized check. `worst_slack` is the smallest
/// (bound - measured) margin seen; a failure is a margin below the check's
/// tolerance.
struct CheckReport {
  std::string check_name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_slack = 0.0;
  std::uint64_t seed = 0;

  bool passed() const noexcept { return failures == 0; }
};

/// Sup-search settings used by the checks: fewer starts than the library
/// default, same radius and budget.
SupSearchConfig suite_search_config(std::uint64_t seed);

/// Random instance generator. Dimension from {1, 2, 3, 5}, sizes in [8, 64],
/// points from shifted correlated Gaussians or axis-aligned uniform boxes,
/// weights uniform (three in four) or random. Resamples until both
/// measures are whitenable.
struct InstancePair {
  EmpiricalMeasure a;
  EmpiricalMeasure b;
};
InstancePair random_instance_pair(std::uint64_t seed);
EmpiricalMeasure random_instance(std::uint64_t seed, Index dim);
GaussianMeasure random_gaussian(std::uint64_t seed, Index dim);

inline constexpr double kScaleTolerance = 1e-8;
inline constexpr double kBoundTolerance = 1e-9;

/// |delta(Q1 X, Q2 Y) - delta(X, Y)| <= 1e-8 (1 + delta) for diagonal Q
/// with log-uniform entries in [q_min, q_max].
CheckReport check_scale_invariance(DiscrepancyKind kind, std::size_t n_instances,
                                   std::uint64_t seed, double q_min = 0.1,
                                   double q_max = 10.0);

/// delta(X + C1, Y + C2) <= delta(X, Y) + |W_mu C1 - W_nu C2| for
/// nonnegative shifts. White Fourier is checked on Gaussian closed forms.
CheckReport check_uniform_redistribution(DiscrepancyKind kind, std::size_t n_instances,
                                         std::uint64_t seed);

/// F <= G on n empirical pairs, plus the Gaussian form
/// G <= F + E|x* - m1*| + E|y* - m2*| on n Gaussian pairs (Monte Carlo).
CheckReport check_prop41(std::size_t n_instances, std::uint64_t seed);

/// W <= G <= W + min(G(mu), G(nu)). Every tenth instance replaces nu by a
/// single point under identity whitening, where G = W must hold.
CheckReport check_prop42(std::size_t n_instances, std::uint64_t seed);

/// Both transport-plan bounds on whitened pairs with the exact plan.
CheckReport check_prop43(std::size_t n_instances, std::uint64_t seed);

/// nu a single point in whitened space:
/// |dm| <= F(0) <= W = E|x* - m2*| <= |dm| + E|x* - m1*|.
CheckReport check_corollary_dirac(std::size_t n_instances, std::uint64_t seed);

/// Every check at its default instance count, in a fixed order.
std::vector<CheckReport> run_suite(std::uint64_t seed);

}  // namespace whitemetric
