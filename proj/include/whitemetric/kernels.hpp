#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference and an OpenMP version. The OpenMP versions reduce over fixed
// row chunks in chunk order, so their results do not depend on the thread
// count. Library code calls the parallel versions; tests compare the two.

#include <complex>

#include <Eigen/Dense>

namespace whitemetric {

enum class GroundCost { euclidean, squared_euclidean };

namespace kernels {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Rows per reduction chunk in the parallel kernels.
inline constexpr Index kChunkRows = 64;

struct EcfSum {
  std::complex<double> value;
  Eigen::VectorXcd gradient;
};

/// Caps OpenMP threads used by the parallel kernels. 0 restores the
/// runtime default. Initialised from WHITEMETRIC_THREADS on first use.
void set_thread_cap(int threads);
int thread_cap();

namespace serial {

/// C(i, j) = c(x_i, y_j), rows of x and y are points.
Matrix cost_matrix(const Matrix& x, const Matrix& y, GroundCost cost);

/// sum_ij w_i v_j |x_i - y_j|
double mean_pair_distance(const Matrix& x, const Vector& w, const Matrix& y,
                          const Vector& v);

/// value = sum_k w_k exp(-i xi.x_k), gradient = -i sum_k w_k x_k exp(-i xi.x_k)
EcfSum ecf(const Matrix& x, const Vector& w, const Vector& xi);

}  // namespace serial

namespace parallel {

Matrix cost_matrix(const Matrix& x, const Matrix& y, GroundCost cost);
double mean_pair_distance(const Matrix& x, const Vector& w, const Matrix& y,
                          const Vector& v);
EcfSum ecf(const Matrix& x, const Vector& w, const Vector& xi);

}  // namespace parallel

}  // namespace kernels
}  // namespace whitemetric
