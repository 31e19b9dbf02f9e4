#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>

#include "whitemetric/stats_core.hpp"
#include "whitemetric/whitening.hpp"

namespace whitemetric {

/// Characteristic function value f(xi) = E exp(-i xi.X) and its gradient.
struct CharFnEvaluation {
  std::complex<double> value;
  Eigen::VectorXcd gradient;
};

using CharFn = std::function<CharFnEvaluation(const Vector&)>;

/// Empirical characteristic function. At xi = 0 the value is exactly 1.
CharFnEvaluation ecf_eval(const EmpiricalMeasure& m, const Vector& xi);

/// exp(-i xi.m - xi^T S xi / 2), gradient (-i m - S xi) times the value.
CharFnEvaluation gaussian_cf_eval(const GaussianMeasure& g, const Vector& xi);

CharFn empirical_cf(EmpiricalMeasure m);
CharFn gaussian_cf(GaussianMeasure g);

struct SupSearchConfig {
  std::size_t n_starts = 64;
  double radius = 10.0;
  std::size_t max_iter = 200;
  std::uint64_t seed = 0;
  double tol = 1e-10;

  /// Throws InvalidArgument unless every field is positive.
  void validate() const;
};

struct SupSearchResult {
  double value = 0.0;
  Vector argmax;
  std::size_t evaluations = 0;
};

using Objective = std::function<double(const Vector&)>;

/// Deterministic multi-start maximisation. Candidates: the origin, a coarse
/// grid along each axis, any `extra_starts`, and `n_starts` seeded random
/// points in the radius ball. Every candidate except the origin is polished
/// by a Nelder-Mead ascent followed by coordinate-wise golden-section
/// search. Returns the best value found, so the result is a lower bound of
/// the true supremum. Start k draws from its own stream, so the first k
/// random starts do not depend on n_starts.
SupSearchResult sup_search(const Objective& objective, Index dim,
                           const SupSearchConfig& cfg,
                           std::span<const Vector> extra_starts = {});

/// Fourier-based metric between the whitened measures:
/// sup_xi |f*(xi) - g*(xi)| / |xi|, with the ratio extended by its limit at
/// the origin.
double d1_whitened(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                   const SupSearchConfig& cfg,
                   WhiteningProcess process = WhiteningProcess::zca_cor);
double d1_whitened(const GaussianMeasure& a, const GaussianMeasure& b,
                   const SupSearchConfig& cfg,
                   WhiteningProcess process = WhiteningProcess::zca_cor);

/// d1 between two characteristic functions whose means are given.
SupSearchResult d1_search(const CharFn& f, const Vector& mean_f,
                          const CharFn& g, const Vector& mean_g,
                          const SupSearchConfig& cfg);

}  // namespace whitemetric
