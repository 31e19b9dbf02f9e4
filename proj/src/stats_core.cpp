#include "whitemetric/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace whitemetric {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + " contains non-finite entries");
  }
}

void require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(what) + " is not square");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument(std::string(what) + " is not symmetric");
  }
}

double clip_tolerance(double lambda_max) {
  return 1e-9 * std::max(1.0, std::abs(lambda_max));
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(Matrix points)
    : EmpiricalMeasure(points,
                       Vector::Constant(points.rows(),
                                        points.rows() > 0
                                            ? 1.0 / static_cast<double>(
                                                        points.rows())
                                            : 0.0)) {}

EmpiricalMeasure::EmpiricalMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw InvalidArgument("empirical measure needs N >= 1 and d >= 1");
  }
  if (weights_.size() != points_.rows()) {
    throw DimensionMismatch("weights length " +
                            std::to_string(weights_.size()) +
                            " != number of points " +
                            std::to_string(points_.rows()));
  }
  require_finite(points_, "points");
  require_finite(weights_, "weights");
  if ((weights_.array() < 0.0).any()) {
    throw InvalidArgument("weights must be nonnegative");
  }
  if (std::abs(weights_.sum() - 1.0) > kWeightSumTolerance) {
    throw InvalidArgument("weights must sum to 1");
  }
  const double u = 1.0 / static_cast<double>(points_.rows());
  uniform_ = (weights_.array() == u).all();
}

EmpiricalMeasure EmpiricalMeasure::with_unnormalized_weights(Matrix points,
                                                             Vector weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InvalidArgument("weights must have a positive finite sum");
  }
  weights /= total;
  return EmpiricalMeasure(std::move(points), std::move(weights));
}

GaussianMeasure::GaussianMeasure(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (mean_.size() < 1) {
    throw InvalidArgument("gaussian measure needs d >= 1");
  }
  if (covariance_.rows() != mean_.size() ||
      covariance_.cols() != mean_.size()) {
    throw DimensionMismatch("covariance shape does not match mean length");
  }
  require_finite(mean_, "mean");
  require_finite(covariance_, "covariance");
  require_symmetric(covariance_, "covariance");
  covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();
  const Vector eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(covariance_, Eigen::EigenvaluesOnly)
          .eigenvalues();
  if (eig.minCoeff() < -clip_tolerance(eig.maxCoeff())) {
    throw InvalidArgument("covariance has a negative eigenvalue");
  }
}

Matrix SpdFactorization::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

SpdFactorization factorize_symmetric(const Matrix& a) {
  require_symmetric(a, "matrix");
  require_finite(a, "matrix");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NearSingular("symmetric eigensolver failed");
  }
  const Index d = sym.rows();
  // Eigen sorts ascending; flip to descending.
  SpdFactorization out{Vector(d), Matrix(d, d)};
  for (Index k = 0; k < d; ++k) {
    out.eigenvalues(k) = solver.eigenvalues()(d - 1 - k);
    Vector v = solver.eigenvectors().col(d - 1 - k);
    Index pivot = 0;
    for (Index i = 1; i < d; ++i) {
      if (std::abs(v(i)) > std::abs(v(pivot))) pivot = i;
    }
    if (v(pivot) < 0.0) v = -v;
    out.eigenvectors.col(k) = v;
  }
  return out;
}

Vector estimate_mean(const EmpiricalMeasure& m) {
  return m.points().transpose() * m.weights();
}

Matrix estimate_covariance(const EmpiricalMeasure& m) {
  const Vector mean = estimate_mean(m);
  const Matrix centered = m.points().rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * m.weights().asDiagonal() * centered;
  return 0.5 * (cov + cov.transpose());
}

Matrix correlation_from_covariance(const Matrix& covariance) {
  const Index d = covariance.rows();
  Vector sd(d);
  for (Index i = 0; i < d; ++i) {
    const double v = covariance(i, i);
    if (!(v > kVarianceFloor)) {
      throw DegenerateCoordinate(static_cast<std::size_t>(i));
    }
    sd(i) = std::sqrt(v);
  }
  Matrix corr(d, d);
  for (Index i = 0; i < d; ++i) {
    corr(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double r =
          std::clamp(covariance(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
      corr(i, j) = r;
      corr(j, i) = r;
    }
  }
  return corr;
}

Matrix estimate_correlation(const EmpiricalMeasure& m) {
  return correlation_from_covariance(estimate_covariance(m));
}

Matrix spd_sqrt(const Matrix& a) {
  SpdFactorization f = factorize_symmetric(a);
  const double lmax = f.eigenvalues(0);
  const double tol = clip_tolerance(lmax);
  for (Index k = 0; k < f.eigenvalues.size(); ++k) {
    double& l = f.eigenvalues(k);
    if (l < -tol) {
      throw NearSingular("matrix is indefinite (eigenvalue " +
                         std::to_string(l) + ")");
    }
    l = std::sqrt(std::max(l, 0.0));
  }
  Matrix r = f.reconstruct();
  return 0.5 * (r + r.transpose());
}

Matrix spd_inv_sqrt(const Matrix& a) {
  SpdFactorization f = factorize_symmetric(a);
  const double lmax = f.eigenvalues(0);
  const double lmin = f.eigenvalues(f.eigenvalues.size() - 1);
  if (!(lmax > 0.0) || !(lmin > kEigFloor * lmax)) {
    throw NearSingular("eigenvalue ratio " + std::to_string(lmin / lmax) +
                       " below floor");
  }
  f.eigenvalues = f.eigenvalues.array().rsqrt();
  Matrix r = f.reconstruct();
  return 0.5 * (r + r.transpose());
}

EmpiricalMeasure sample_gaussian(const GaussianMeasure& g, Index n,
                                 std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample size must be positive");
  const Index d = g.dim();
  Matrix factor;
  Eigen::LLT<Matrix> llt(g.covariance());
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    factor = spd_sqrt(g.covariance());
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) z(i, j) = normal(rng);
  }
  Matrix pts = z * factor.transpose();
  pts.rowwise() += g.mean().transpose();
  return EmpiricalMeasure(std::move(pts));
}

double identity_residual(const Matrix& a) {
  return (a - Matrix::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff();
}

}  // namespace whitemetric
