#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "whitemetric/fourier.hpp"
#include "whitemetric/stats_core.hpp"
#include "whitemetric/transport.hpp"
#include "whitemetric/whitening.hpp"

namespace whitemetric {

enum class DiscrepancyKind { white_wasserstein, white_fourier, gini, gini_upper, d1_whitened };

std::string_view to_string(DiscrepancyKind k) noexcept;

struct DiscrepancyResult {
  double value = 0.0;
  DiscrepancyKind kind = DiscrepancyKind::white_wasserstein;
  /// True only for Gaussian closed forms.
  bool exact = false;
  std::map<std::string, std::variant<double, std::string>> metadata;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Empirical measures, each whitened with its own moments.
DiscrepancyResult white_wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                    WhiteningProcess process = WhiteningProcess::zca_cor);
DiscrepancyResult white_fourier(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                const SupSearchConfig& cfg,
                                WhiteningProcess process = WhiteningProcess::zca_cor);
/// Double sum over the product measure a x b of |W_a x - W_b y|.
DiscrepancyResult gini_discrepancy(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                   WhiteningProcess process = WhiteningProcess::zca_cor);
DiscrepancyResult d1_discrepancy(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                 const SupSearchConfig& cfg,
                                 WhiteningProcess process = WhiteningProcess::zca_cor);
double gini_self(const EmpiricalMeasure& a,
                 WhiteningProcess process = WhiteningProcess::zca_cor);

// Same with caller-supplied whitening matrices, e.g. identity for Diracs.
DiscrepancyResult white_wasserstein(const EmpiricalMeasure& a, const WhiteningMatrix& wa,
                                    const EmpiricalMeasure& b, const WhiteningMatrix& wb);
DiscrepancyResult white_fourier(const EmpiricalMeasure& a, const WhiteningMatrix& wa,
                                const EmpiricalMeasure& b, const WhiteningMatrix& wb,
                                const SupSearchConfig& cfg);
DiscrepancyResult gini_discrepancy(const EmpiricalMeasure& a, const WhiteningMatrix& wa,
                                   const EmpiricalMeasure& b, const WhiteningMatrix& wb);
double gini_self(const EmpiricalMeasure& a, const WhiteningMatrix& wa);

/// F objective |f1 grad f2 - f2 grad f1| for characteristic functions.
double fourier_objective(const CharFn& f1, const CharFn& f2, const Vector& xi);

// Gaussian closed forms.
DiscrepancyResult white_wasserstein_gaussian(const GaussianMeasure& a, const GaussianMeasure& b);
DiscrepancyResult white_fourier_gaussian(const GaussianMeasure& a, const GaussianMeasure& b);
/// sqrt(2n + |m1* - m2*|^2).
DiscrepancyResult gini_gaussian_upper(const GaussianMeasure& a, const GaussianMeasure& b);
McEstimate gini_gaussian_mc(const GaussianMeasure& a, const GaussianMeasure& b, Index n,
                            std::uint64_t seed);

/// White Fourier by sup_search on the exact Gaussian characteristic
/// functions, for cross-checking the closed form.
DiscrepancyResult white_fourier_numeric(const GaussianMeasure& a, const GaussianMeasure& b,
                                        const SupSearchConfig& cfg);

inline constexpr double kZeroMeanThreshold = 1e-12;

/// tau: sup |grad f(0) f(xi) - grad f(xi)| / (2 |grad f(0)|) over the
/// whitened characteristic function. Throws ZeroMean when |m*| <= 1e-12.
double tau_index(const EmpiricalMeasure& a, const SupSearchConfig& cfg,
                 WhiteningProcess process = WhiteningProcess::zca_cor);
double tau_index(const GaussianMeasure& g, const SupSearchConfig& cfg);
/// The search behind tau_index given a whitened CF and its mean.
SupSearchResult tau_search(const CharFn& f, const Vector& whitened_mean,
                           const SupSearchConfig& cfg);

/// 1 / (2 sqrt(e) sqrt(m^T S^{-1} m)).
double tau_gaussian(const GaussianMeasure& g);
/// 1 / sqrt(m^T S^{-1} m).
double cvn_gaussian(const GaussianMeasure& g);

}  // namespace whitemetric
