#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "whitemetric/errors.hpp"

namespace whitemetric {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigenvalues at or below eig_floor * lambda_max make a matrix unusable for
/// inverse square roots.
inline constexpr double kEigFloor = 1e-12;
/// Coordinates with variance at or below this are degenerate.
inline constexpr double kVarianceFloor = 1e-300;
inline constexpr double kWeightSumTolerance = 1e-12;

/// Weighted point cloud. Rows of `points` are observations; `weights` are
/// nonnegative and sum to one.
class EmpiricalMeasure {
 public:
  /// Uniform weights 1/N.
  explicit EmpiricalMeasure(Matrix points);
  EmpiricalMeasure(Matrix points, Vector weights);

  /// Rescales `weights` to sum to one before validating.
  static EmpiricalMeasure with_unnormalized_weights(Matrix points,
                                                    Vector weights);

  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  /// True when every weight equals 1/N exactly.
  bool is_uniform() const noexcept { return uniform_; }

 private:
  Matrix points_;
  Vector weights_;
  bool uniform_ = false;
};

/// N(mean, covariance). The covariance must be symmetric PSD; whitening
/// additionally needs it strictly positive definite.
class GaussianMeasure {
 public:
  GaussianMeasure(Vector mean, Matrix covariance);

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  Index dim() const noexcept { return mean_.size(); }

 private:
  Vector mean_;
  Matrix covariance_;
};

/// Symmetric eigendecomposition A = G^T diag(eigenvalues) G, stored with
/// eigenvectors as columns of `eigenvectors` (so A = V diag(l) V^T).
/// Eigenvalues descend; each eigenvector has its largest-magnitude component
/// positive (first such index on ties).
struct SpdFactorization {
  Vector eigenvalues;
  Matrix eigenvectors;

  Matrix reconstruct() const;
};

SpdFactorization factorize_symmetric(const Matrix& a);

Vector estimate_mean(const EmpiricalMeasure& m);

/// Population covariance: sum_i w_i (x_i - mean)(x_i - mean)^T, normalised by
/// the total weight (one), never by N - 1.
Matrix estimate_covariance(const EmpiricalMeasure& m);

/// Throws DegenerateCoordinate for the first coordinate whose variance is at
/// or below kVarianceFloor.
Matrix correlation_from_covariance(const Matrix& covariance);
Matrix estimate_correlation(const EmpiricalMeasure& m);

/// Principal square root of a symmetric PSD matrix. Eigenvalues slightly
/// below zero (no more negative than 1e-9 * max(1, lambda_max)) are clipped;
/// anything more negative throws NearSingular.
Matrix spd_sqrt(const Matrix& a);

/// Throws NearSingular when lambda_min <= kEigFloor * lambda_max.
Matrix spd_inv_sqrt(const Matrix& a);

/// n i.i.d. draws L z with L the Cholesky factor of the covariance. Singular
/// PSD covariances use the symmetric square root instead. Bitwise
/// reproducible for a given seed on a given platform.
EmpiricalMeasure sample_gaussian(const GaussianMeasure& g, Index n,
                                 std::uint64_t seed);

/// Max-abs entrywise distance of a square matrix from the identity.
double identity_residual(const Matrix& a);

}  // namespace whitemetric
