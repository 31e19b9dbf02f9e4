#include <omp.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "whitemetric/kernels.hpp"

namespace whitemetric::kernels {

namespace {

int read_env_cap() {
  const char* env = std::getenv("WHITEMETRIC_THREADS");
  if (env == nullptr) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 0) return 0;
  return static_cast<int>(v);
}

std::atomic<int>& cap_storage() {
  static std::atomic<int> cap{read_env_cap()};
  return cap;
}

int threads_for(Index work_items) {
  const int cap = thread_cap();
  int t = cap > 0 ? cap : omp_get_max_threads();
  if (work_items < 2) t = 1;
  return t < 1 ? 1 : t;
}

Index chunk_count(Index rows) { return (rows + kChunkRows - 1) / kChunkRows; }

}  // namespace

void set_thread_cap(int threads) { cap_storage().store(threads < 0 ? 0 : threads); }

int thread_cap() { return cap_storage().load(); }

namespace parallel {

Matrix cost_matrix(const Matrix& x, const Matrix& y, GroundCost cost) {
  const Index n = x.rows();
  const Index m = y.rows();
  const Index d = x.cols();
  Matrix c(n, m);
  // Column-major: one task per target column keeps writes contiguous.
#pragma omp parallel for schedule(static) num_threads(threads_for(m))
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
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
  const Index n = x.rows();
  const Index d = x.cols();
  const Index chunks = chunk_count(n);
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads_for(chunks))
  for (Index c = 0; c < chunks; ++c) {
    const Index lo = c * kChunkRows;
    const Index hi = std::min(n, lo + kChunkRows);
    double acc = 0.0;
    for (Index i = lo; i < hi; ++i) {
      double row = 0.0;
      for (Index j = 0; j < y.rows(); ++j) {
        double s = 0.0;
        for (Index k = 0; k < d; ++k) {
          const double t = x(i, k) - y(j, k);
          s += t * t;
        }
        row += v(j) * std::sqrt(s);
      }
      acc += w(i) * row;
    }
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

EcfSum ecf(const Matrix& x, const Vector& w, const Vector& xi) {
  const Index n = x.rows();
  const Index d = x.cols();
  const Index chunks = chunk_count(n);
  // Per chunk: [re, im, grad_re(d), grad_im(d)].
  const Index stride = 2 + 2 * d;
  std::vector<double> partial(static_cast<std::size_t>(chunks * stride), 0.0);
#pragma omp parallel for schedule(static) num_threads(threads_for(chunks))
  for (Index c = 0; c < chunks; ++c) {
    double* acc = partial.data() + c * stride;
    const Index lo = c * kChunkRows;
    const Index hi = std::min(n, lo + kChunkRows);
    for (Index k = lo; k < hi; ++k) {
      double phase = 0.0;
      for (Index j = 0; j < d; ++j) phase += x(k, j) * xi(j);
      double sn = 0.0;
      double cs = 0.0;
      ::sincos(phase, &sn, &cs);
      cs *= w(k);
      sn *= w(k);
      acc[0] += cs;
      acc[1] -= sn;
      for (Index j = 0; j < d; ++j) {
        acc[2 + j] -= x(k, j) * sn;
        acc[2 + d + j] -= x(k, j) * cs;
      }
    }
  }
  EcfSum out{{0.0, 0.0}, Eigen::VectorXcd::Zero(d)};
  double re = 0.0;
  double im = 0.0;
  Vector gre = Vector::Zero(d);
  Vector gim = Vector::Zero(d);
  for (Index c = 0; c < chunks; ++c) {
    const double* acc = partial.data() + c * stride;
    re += acc[0];
    im += acc[1];
    for (Index j = 0; j < d; ++j) {
      gre(j) += acc[2 + j];
      gim(j) += acc[2 + d + j];
    }
  }
  out.value = {re, im};
  for (Index j = 0; j < d; ++j) out.gradient(j) = {gre(j), gim(j)};
  return out;
}

}  // namespace parallel
}  // namespace whitemetric::kernels
