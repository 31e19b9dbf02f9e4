#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "whitemetric/stats_core.hpp"

namespace testutil {

using whitemetric::Index;
using whitemetric::Matrix;
using whitemetric::Vector;

inline Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  const auto n = static_cast<Index>(r.size());
  const auto d = static_cast<Index>(r.begin()->size());
  Matrix m(n, d);
  Index i = 0;
  for (const auto& row : r) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix normal_matrix(std::mt19937_64& rng, Index n, Index d) {
  std::normal_distribution<double> z;
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = z(rng);
  }
  return m;
}

inline Matrix random_spd(std::mt19937_64& rng, Index d) {
  const Matrix a = normal_matrix(rng, d, d);
  return a * a.transpose() + 0.5 * Matrix::Identity(d, d);
}

inline Matrix random_diagonal(std::mt19937_64& rng, Index d, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Vector q(d);
  for (Index i = 0; i < d; ++i) q(i) = std::exp(u(rng));
  return q.asDiagonal();
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testutil
