#include "whitemetric/whitening.hpp"

#include <cmath>
#include <string>

namespace whitemetric {

std::string_view to_string(WhiteningProcess p) noexcept {
  switch (p) {
    case WhiteningProcess::zca_cor:
      return "zca-cor";
    case WhiteningProcess::cholesky:
      return "cholesky";
    case WhiteningProcess::identity:
      return "identity";
  }
  return "unknown";
}

std::optional<WhiteningProcess> parse_whitening_process(std::string_view s) {
  if (s == "zca-cor" || s == "zca_cor") return WhiteningProcess::zca_cor;
  if (s == "cholesky") return WhiteningProcess::cholesky;
  if (s == "identity") return WhiteningProcess::identity;
  return std::nullopt;
}

WhiteningMatrix::WhiteningMatrix(Matrix matrix, WhiteningProcess process,
                                 Vector source_mean, Matrix source_covariance)
    : matrix_(std::move(matrix)),
      process_(process),
      source_mean_(std::move(source_mean)),
      source_covariance_(std::move(source_covariance)) {
  const Index d = matrix_.rows();
  if (matrix_.cols() != d || source_mean_.size() != d ||
      source_covariance_.rows() != d || source_covariance_.cols() != d) {
    throw DimensionMismatch("whitening matrix and source moments disagree");
  }
  if (process_ == WhiteningProcess::identity) return;
  const double residual = identity_residual(
      matrix_ * source_covariance_ * matrix_.transpose());
  if (!(residual <= kWhiteningTolerance)) {
    throw NearSingular("whitening residual " + std::to_string(residual) +
                       " exceeds tolerance");
  }
}

WhiteningMatrix zca_cor_whitening(const Vector& mean,
                                  const Matrix& covariance) {
  const Matrix corr = correlation_from_covariance(covariance);
  const Vector inv_sd = covariance.diagonal().array().rsqrt();
  Matrix w = spd_inv_sqrt(corr) * inv_sd.asDiagonal();
  return WhiteningMatrix(std::move(w), WhiteningProcess::zca_cor, mean,
                         covariance);
}

WhiteningMatrix cholesky_whitening(const Vector& mean,
                                   const Matrix& covariance) {
  const Index d = covariance.rows();
  // Factor the correlation matrix so the conditioning test ignores units.
  const Matrix corr = correlation_from_covariance(covariance);
  Eigen::LLT<Matrix> llt(corr);
  if (llt.info() != Eigen::Success) {
    throw NearSingular("covariance is not positive definite");
  }
  const Matrix l = llt.matrixL();
  const Vector diag = l.diagonal();
  if (!(diag.minCoeff() > std::sqrt(kEigFloor) * diag.maxCoeff())) {
    throw NearSingular("cholesky factor is near singular");
  }
  const Vector inv_sd = covariance.diagonal().array().rsqrt();
  Matrix w = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d)) *
             inv_sd.asDiagonal();
  return WhiteningMatrix(std::move(w), WhiteningProcess::cholesky, mean,
                         covariance);
}

WhiteningMatrix identity_whitening(const Vector& mean,
                                   const Matrix& covariance) {
  return WhiteningMatrix(Matrix::Identity(mean.size(), mean.size()),
                         WhiteningProcess::identity, mean, covariance);
}

WhiteningMatrix make_whitening(WhiteningProcess process, const Vector& mean,
                               const Matrix& covariance) {
  switch (process) {
    case WhiteningProcess::zca_cor:
      return zca_cor_whitening(mean, covariance);
    case WhiteningProcess::cholesky:
      return cholesky_whitening(mean, covariance);
    case WhiteningProcess::identity:
      return identity_whitening(mean, covariance);
  }
  throw InvalidArgument("unknown whitening process");
}

WhiteningMatrix whitening_for(const EmpiricalMeasure& m,
                              WhiteningProcess process) {
  return make_whitening(process, estimate_mean(m), estimate_covariance(m));
}

WhiteningMatrix whitening_for(const GaussianMeasure& g,
                              WhiteningProcess process) {
  return make_whitening(process, g.mean(), g.covariance());
}

EmpiricalMeasure whiten_empirical(const EmpiricalMeasure& m,
                                  const WhiteningMatrix& w) {
  if (m.dim() != w.dim()) {
    throw DimensionMismatch("measure dimension " + std::to_string(m.dim()) +
                            " != whitening dimension " +
                            std::to_string(w.dim()));
  }
  Matrix pts = m.points() * w.matrix().transpose();
  return EmpiricalMeasure(std::move(pts), m.weights());
}

GaussianMeasure whiten_gaussian(const GaussianMeasure& g,
                                const WhiteningMatrix& w) {
  if (g.dim() != w.dim()) {
    throw DimensionMismatch("measure dimension " + std::to_string(g.dim()) +
                            " != whitening dimension " +
                            std::to_string(w.dim()));
  }
  Vector mean = w.matrix() * g.mean();
  if (w.process() == WhiteningProcess::identity) {
    return GaussianMeasure(std::move(mean), g.covariance());
  }
  const double residual =
      identity_residual(w.matrix() * g.covariance() * w.matrix().transpose());
  if (!(residual <= kWhiteningTolerance)) {
    throw InvalidArgument("whitening matrix was not built from this covariance");
  }
  return GaussianMeasure(std::move(mean), Matrix::Identity(g.dim(), g.dim()));
}

}  // namespace whitemetric
