#include "whitemetric/kernels.hpp"

#include <cmath>

namespace whitemetric::kernels::serial {

Matrix cost_matrix(const Matrix& x, const Matrix& y, GroundCost cost) {
  const Index n = x.rows();
  const Index m = y.rows();
  const Index d = x.cols();
  Matrix c(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      double s = 0.0;
      for (Index k = 0; k < d; ++k) {
        const double t = x(i, k) - y(j, k);
        s += t * t;
      }
      c(i, j) = cost == GroundCost::euclidean ? std::sqrt(s) : s;
    }
  }
  return c;
}

double mean_pair_distance(const Matrix& x, const Vector& w, const Matrix& y,
                          const Vector& v) {
  const Index d = x.cols();
  double total = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    double row = 0.0;
    for (Index j = 0; j < y.rows(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < d; ++k) {
        const double t = x(i, k) - y(j, k);
        s += t * t;
      }
      row += v(j) * std::sqrt(s);
    }
    total += w(i) * row;
  }
  return total;
}

EcfSum ecf(const Matrix& x, const Vector& w, const Vector& xi) {
  const Index d = x.cols();
  double re = 0.0;
  double im = 0.0;
  Vector gre = Vector::Zero(d);
  Vector gim = Vector::Zero(d);
  for (Index k = 0; k < x.rows(); ++k) {
    const double phase = x.row(k).dot(xi);
    const double c = w(k) * std::cos(phase);
    const double s = w(k) * std::sin(phase);
    // w e^{-i phase} = c - i s; times -i x gives -x s - i x c.
    re += c;
    im -= s;
    for (Index j = 0; j < d; ++j) {
      gre(j) -= x(k, j) * s;
      gim(j) -= x(k, j) * c;
    }
  }
  EcfSum out{{re, im}, Eigen::VectorXcd(d)};
  for (Index j = 0; j < d; ++j) out.gradient(j) = {gre(j), gim(j)};
  return out;
}

}  // namespace whitemetric::kernels::serial
