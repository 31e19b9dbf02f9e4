#pragma once

#include <optional>
#include <string_view>

#include "whitemetric/stats_core.hpp"

namespace whitemetric {

enum class WhiteningProcess { zca_cor, cholesky, identity };

std::string_view to_string(WhiteningProcess p) noexcept;
/// Accepts "zca-cor"/"zca_cor", "cholesky", "identity".
std::optional<WhiteningProcess> parse_whitening_process(std::string_view s);

/// W with W * source_covariance * W^T = I (identity process excepted).
class WhiteningMatrix {
 public:
  WhiteningMatrix(Matrix matrix, WhiteningProcess process, Vector source_mean,
                  Matrix source_covariance);

  const Matrix& matrix() const noexcept { return matrix_; }
  WhiteningProcess process() const noexcept { return process_; }
  const Vector& source_mean() const noexcept { return source_mean_; }
  const Matrix& source_covariance() const noexcept {
    return source_covariance_;
  }
  Index dim() const noexcept { return matrix_.rows(); }

  Vector apply(const Vector& x) const { return matrix_ * x; }
  /// W times the source mean.
  Vector whitened_mean() const { return matrix_ * source_mean_; }

 private:
  Matrix matrix_;
  WhiteningProcess process_;
  Vector source_mean_;
  Matrix source_covariance_;
};

inline constexpr double kWhiteningTolerance = 1e-8;

/// W = P^{-1/2} V^{-1/2}, P the correlation matrix and V the variance
/// diagonal. Scale stable: rescaling a coordinate leaves W x unchanged.
WhiteningMatrix zca_cor_whitening(const Vector& mean, const Matrix& covariance);

/// W = L^{-1} with L L^T = covariance.
WhiteningMatrix cholesky_whitening(const Vector& mean,
                                   const Matrix& covariance);

/// W = I. Realises whitened-space constructions (e.g. Dirac measures) where
/// the covariance is degenerate.
WhiteningMatrix identity_whitening(const Vector& mean, const Matrix& covariance);

WhiteningMatrix make_whitening(WhiteningProcess process, const Vector& mean,
                               const Matrix& covariance);

/// Whitening built from the measure's own moments.
WhiteningMatrix whitening_for(const EmpiricalMeasure& m,
                              WhiteningProcess process = WhiteningProcess::zca_cor);
WhiteningMatrix whitening_for(const GaussianMeasure& g,
                              WhiteningProcess process = WhiteningProcess::zca_cor);

/// Maps every point x to W x; weights unchanged.
EmpiricalMeasure whiten_empirical(const EmpiricalMeasure& m,
                                  const WhiteningMatrix& w);

/// N(W m, I) for a proper whitening; N(m, Sigma) for the identity process.
GaussianMeasure whiten_gaussian(const GaussianMeasure& g,
                                const WhiteningMatrix& w);

}  // namespace whitemetric
