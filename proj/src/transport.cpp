#include "whitemetric/transport.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

namespace whitemetric {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Residual masses below this are treated as exhausted.
constexpr double kMassEps = 1e-15;

void check_pair(const EmpiricalMeasure& src, const EmpiricalMeasure& dst,
                std::size_t limit) {
  if (src.dim() != dst.dim()) {
    throw DimensionMismatch("source dimension " + std::to_string(src.dim()) +
                            " != target dimension " +
                            std::to_string(dst.dim()));
  }
  const auto entries = static_cast<std::size_t>(src.size()) *
                       static_cast<std::size_t>(dst.size());
  if (entries > limit) {
    throw SizeLimitExceeded("dense cost matrix of " + std::to_string(entries) +
                            " entries exceeds limit " + std::to_string(limit));
  }
}

bool uniform_square(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  const double u = 1.0 / static_cast<double>(a.size());
  return (a.array() == u).all() && (b.array() == u).all();
}

// Dense primal-dual transportation solver: successive shortest paths with
// Dijkstra on reduced costs. Node ids: sources [0, n), sinks [n, n + m).
TransportPlan solve_transportation(const Matrix& costs, const Vector& src_w,
                                   const Vector& dst_w) {
  const Index n = costs.rows();
  const Index m = costs.cols();
  const Index v_count = n + m;
  Matrix flow = Matrix::Zero(n, m);
  std::vector<double> supply(src_w.data(), src_w.data() + n);
  std::vector<double> demand(dst_w.data(), dst_w.data() + m);
  std::vector<double> pot(static_cast<std::size_t>(v_count), 0.0);
  for (Index j = 0; j < m; ++j) pot[n + j] = costs.col(j).minCoeff();

  std::vector<double> dist(static_cast<std::size_t>(v_count));
  std::vector<Index> parent(static_cast<std::size_t>(v_count));
  std::vector<char> done(static_cast<std::size_t>(v_count));
  std::size_t iterations = 0;

  auto remaining = [](const std::vector<double>& xs) {
    for (double x : xs) {
      if (x > kMassEps) return true;
    }
    return false;
  };

  while (remaining(supply) && remaining(demand)) {
    ++iterations;
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), Index{-1});
    std::fill(done.begin(), done.end(), 0);
    for (Index i = 0; i < n; ++i) {
      if (supply[i] > kMassEps) dist[i] = 0.0;
    }
    Index target = -1;
    for (;;) {
      Index u = -1;
      double best = kInf;
      for (Index k = 0; k < v_count; ++k) {
        if (!done[k] && dist[k] < best) {
          best = dist[k];
          u = k;
        }
      }
      if (u < 0) break;
      done[u] = 1;
      if (u >= n && demand[u - n] > kMassEps) {
        target = u;
        break;
      }
      if (u < n) {
        for (Index j = 0; j < m; ++j) {
          const Index t = n + j;
          if (done[t]) continue;
          const double rc = costs(u, j) + pot[u] - pot[t];
          const double nd = dist[u] + std::max(rc, 0.0);
          if (nd < dist[t]) {
            dist[t] = nd;
            parent[t] = u;
          }
        }
      } else {
        const Index j = u - n;
        for (Index i = 0; i < n; ++i) {
          if (done[i] || flow(i, j) <= kMassEps) continue;
          const double rc = -costs(i, j) + pot[u] - pot[i];
          const double nd = dist[u] + std::max(rc, 0.0);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = u;
          }
        }
      }
    }
    if (target < 0) break;

    const double dt = dist[target];
    for (Index k = 0; k < v_count; ++k) pot[k] += std::min(dist[k], dt);

    double amount = demand[target - n];
    Index k = target;
    while (parent[k] >= 0) {
      const Index p = parent[k];
      if (p >= n) amount = std::min(amount, flow(k, p - n));
      k = p;
    }
    amount = std::min(amount, supply[k]);

    supply[k] -= amount;
    if (supply[k] <= kMassEps) supply[k] = 0.0;
    demand[target - n] -= amount;
    if (demand[target - n] <= kMassEps) demand[target - n] = 0.0;
    k = target;
    while (parent[k] >= 0) {
      const Index p = parent[k];
      if (p < n) {
        flow(p, k - n) += amount;
      } else {
        double& f = flow(k, p - n);
        f -= amount;
        if (f <= kMassEps) f = 0.0;
      }
      k = p;
    }
  }

  TransportPlan plan;
  plan.coupling = std::move(flow);
  plan.cost = plan_cost(plan.coupling, costs);
  plan.marginal_error = marginal_error(plan.coupling, src_w, dst_w);
  plan.iterations = iterations;
  plan.method = "transportation";
  return plan;
}

}  // namespace

namespace {

// Dense Jonker-Volgenant. On return, `prices` (if given) holds column duals v
// with c_ij - v_j >= c_{i,x_i} - v_{x_i} for every row i.
std::vector<Index> dense_jv(const Matrix& costs, std::vector<double>* prices) {
  const Index n = costs.rows();
  if (costs.cols() != n) throw ShapeMismatch("assignment needs a square matrix");
  if (n == 0) return {};
  // Jonker-Volgenant: column reduction, reduction transfer, two rounds of
  // augmenting row reduction, then shortest augmenting paths for the rows
  // still free. Row-major copy since every scan walks one row.
  std::vector<double> a(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a[i * n + j] = costs(i, j);
  }
  auto cost = [&](Index i, Index j) { return a[i * n + j]; };
  const auto un = static_cast<std::size_t>(n);
  std::vector<Index> rowsol(un, -1);
  std::vector<Index> colsol(un, -1);
  std::vector<double> v(un);
  std::vector<Index> matches(un, 0);

  for (Index j = n - 1; j >= 0; --j) {
    double best = cost(0, j);
    Index imin = 0;
    for (Index i = 1; i < n; ++i) {
      if (cost(i, j) < best) {
        best = cost(i, j);
        imin = i;
      }
    }
    v[j] = best;
    if (++matches[imin] == 1) {
      rowsol[imin] = j;
      colsol[j] = imin;
    } else {
      colsol[j] = -1;
    }
  }

  std::vector<Index> free_rows;
  free_rows.reserve(un);
  for (Index i = 0; i < n; ++i) {
    if (matches[i] == 0) {
      free_rows.push_back(i);
    } else if (matches[i] == 1) {
      const Index j1 = rowsol[i];
      double best = kInf;
      for (Index j = 0; j < n; ++j) {
        if (j != j1) best = std::min(best, cost(i, j) - v[j]);
      }
      if (std::isfinite(best)) v[j1] -= best;
    }
  }

  // Bounded so near-equal reduced costs cannot stall the reduction; rows
  // left over are handled exactly by the augmentation phase.
  std::size_t budget = 4 * un;
  for (int round = 0; round < 2 && !free_rows.empty() && budget > 0; ++round) {
    std::size_t k = 0;
    const std::size_t prev = free_rows.size();
    std::size_t kept = 0;
    while (k < prev) {
      if (budget == 0) break;
      --budget;
      const Index i = free_rows[k++];
      double umin = cost(i, 0) - v[0];
      double usub = kInf;
      Index j1 = 0;
      Index j2 = 0;
      for (Index j = 1; j < n; ++j) {
        const double h = cost(i, j) - v[j];
        if (h < usub) {
          if (h >= umin) {
            usub = h;
            j2 = j;
          } else {
            usub = umin;
            umin = h;
            j2 = j1;
            j1 = j;
          }
        }
      }
      Index i0 = colsol[j1];
      if (umin < usub) {
        v[j1] -= usub - umin;
      } else if (i0 >= 0) {
        j1 = j2;
        i0 = colsol[j2];
      }
      rowsol[i] = j1;
      colsol[j1] = i;
      if (i0 >= 0) {
        rowsol[i0] = -1;
        if (umin < usub) {
          free_rows[--k] = i0;
        } else {
          free_rows[kept++] = i0;
        }
      }
    }
    // Unprocessed rows (budget exhausted) stay free.
    for (std::size_t r = k; r < prev; ++r) free_rows[kept++] = free_rows[r];
    free_rows.resize(kept);
  }

  std::vector<double> d(un);
  std::vector<Index> pred(un);
  std::vector<Index> collist(un);
  for (const Index free_row : free_rows) {
    for (Index j = 0; j < n; ++j) {
      d[j] = cost(free_row, j) - v[j];
      pred[j] = free_row;
      collist[j] = j;
    }
    Index low = 0;
    Index up = 0;
    Index last = 0;
    Index end_of_path = -1;
    double minimum = 0.0;
    bool found = false;
    do {
      if (up == low) {
        last = low - 1;
        minimum = d[collist[up++]];
        for (Index k = up; k < n; ++k) {
          const Index j = collist[k];
          const double h = d[j];
          if (h <= minimum) {
            if (h < minimum) {
              up = low;
              minimum = h;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (Index k = low; k < up; ++k) {
          if (colsol[collist[k]] < 0) {
            end_of_path = collist[k];
            found = true;
            break;
          }
        }
      }
      if (!found) {
        const Index j1 = collist[low++];
        const Index i = colsol[j1];
        const double* row = a.data() + i * n;
        const double* vp = v.data();
        double* dp = d.data();
        const double h = row[j1] - vp[j1] - minimum;
        for (Index k = up; k < n; ++k) {
          const Index j = collist[k];
          const double v2 = row[j] - vp[j] - h;
          if (v2 < dp[j]) {
            pred[j] = i;
            if (v2 == minimum) {
              if (colsol[j] < 0) {
                end_of_path = j;
                found = true;
                break;
              }
              collist[k] = collist[up];
              collist[up++] = j;
            }
            dp[j] = v2;
          }
        }
      }
    } while (!found);

    for (Index k = 0; k <= last; ++k) {
      const Index j1 = collist[k];
      v[j1] += d[j1] - minimum;
    }
    Index i = -1;
    do {
      i = pred[end_of_path];
      colsol[end_of_path] = i;
      const Index j1 = end_of_path;
      end_of_path = rowsol[i];
      rowsol[i] = j1;
    } while (i != free_row);
  }
  if (prices != nullptr) *prices = std::move(v);
  return rowsol;
}

}  // namespace

std::vector<Index> solve_assignment_dense(const Matrix& costs) {
  return dense_jv(costs, nullptr);
}

namespace {

struct SparseAssignment {
  std::vector<Index> rowsol;
  std::vector<double> row_pot;
  std::vector<double> col_pot;
  bool complete = false;
};

// Successive shortest paths restricted to candidate edges. Node potentials
// keep reduced costs c_ij + row_pot_i - col_pot_j nonnegative on every
// candidate edge and zero on matched ones.
// Starts from an empty matching; row potentials are raised where needed so
// that the initial reduced costs are nonnegative.
SparseAssignment solve_sparse(const Matrix& costs,
                              const std::vector<std::vector<Index>>& adj,
                              std::vector<double> row_pot,
                              std::vector<double> col_pot) {
  const Index n = costs.rows();
  const auto un = static_cast<std::size_t>(n);
  SparseAssignment out;
  out.rowsol.assign(un, -1);
  out.row_pot = std::move(row_pot);
  out.col_pot = std::move(col_pot);
  std::vector<Index> colsol(un, -1);
  for (Index i = 0; i < n; ++i) {
    for (const Index j : adj[i]) {
      out.row_pot[i] =
          std::max(out.row_pot[i], out.col_pot[j] - costs(i, j));
    }
  }

  // Greedy start on tight edges.
  for (Index i = 0; i < n; ++i) {
    for (const Index j : adj[i]) {
      if (colsol[j] < 0 && costs(i, j) + out.row_pot[i] - out.col_pot[j] <= 0.0) {
        out.rowsol[i] = j;
        colsol[j] = i;
        break;
      }
    }
  }

  // Node ids: rows [0, n), columns [n, 2n).
  std::vector<double> dist(2 * un);
  std::vector<Index> parent(2 * un);
  std::vector<char> done(2 * un);
  std::vector<Index> touched;
  touched.reserve(2 * un);
  using Entry = std::pair<double, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::fill(dist.begin(), dist.end(), kInf);

  for (Index root = 0; root < n; ++root) {
    if (out.rowsol[root] >= 0) continue;
    for (const Index k : touched) {
      dist[k] = kInf;
      done[k] = 0;
    }
    touched.clear();
    heap = {};
    dist[root] = 0.0;
    parent[root] = -1;
    touched.push_back(root);
    heap.push({0.0, root});
    Index target = -1;
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (done[u] || du > dist[u]) continue;
      done[u] = 1;
      if (u >= n) {
        const Index j = u - n;
        if (colsol[j] < 0) {
          target = u;
          break;
        }
        const Index i = colsol[j];
        if (!done[i]) {
          const double rc =
              std::max(0.0, -costs(i, j) + out.col_pot[j] - out.row_pot[i]);
          if (du + rc < dist[i]) {
            if (!std::isfinite(dist[i])) touched.push_back(i);
            dist[i] = du + rc;
            parent[i] = u;
            heap.push({dist[i], i});
          }
        }
      } else {
        for (const Index j : adj[u]) {
          if (out.rowsol[u] == j) continue;
          const Index t = n + j;
          if (done[t]) continue;
          const double rc =
              std::max(0.0, costs(u, j) + out.row_pot[u] - out.col_pot[j]);
          if (du + rc < dist[t]) {
            if (!std::isfinite(dist[t])) touched.push_back(t);
            dist[t] = du + rc;
            parent[t] = u;
            heap.push({dist[t], t});
          }
        }
      }
    }
    if (target < 0) return out;
    const double dt = dist[target];
    // Nodes never reached implicitly get +dt; shift everything by -dt
    // instead, so only touched nodes change.
    for (const Index k : touched) {
      const double shift = std::min(dist[k], dt) - dt;
      if (k < n) {
        out.row_pot[k] += shift;
      } else {
        out.col_pot[k - n] += shift;
      }
    }
    Index k = target;
    while (parent[k] >= 0) {
      const Index p = parent[k];
      if (p < n) {
        out.rowsol[p] = k - n;
        colsol[k - n] = p;
      }
      k = p;
    }
  }
  out.complete = true;
  return out;
}

}  // namespace

std::vector<Index> solve_assignment(const Matrix& costs) {
  const Index n = costs.rows();
  if (costs.cols() != n) throw ShapeMismatch("assignment needs a square matrix");
  constexpr Index kDenseBelow = 256;
  if (n < kDenseBelow) return solve_assignment_dense(costs);

  // Approximate duals from a subsampled problem, extended to every row and
  // column by c-transforms. Candidate edges are those with the smallest
  // reduced cost c_ij - f_i - g_j, per row and per column. The sparse
  // optimum is accepted only when its potentials are dual feasible on the
  // full matrix, which certifies optimality.
  const Index sub = std::min<Index>(n, 400);
  std::vector<Index> pick(static_cast<std::size_t>(sub));
  for (Index s = 0; s < sub; ++s) pick[s] = (s * n) / sub;
  Matrix sub_costs(sub, sub);
  for (Index b = 0; b < sub; ++b) {
    for (Index a = 0; a < sub; ++a) sub_costs(a, b) = costs(pick[a], pick[b]);
  }
  std::vector<double> sub_v;
  const std::vector<Index> sub_sol = dense_jv(sub_costs, &sub_v);
  std::vector<double> sub_u(static_cast<std::size_t>(sub));
  for (Index a = 0; a < sub; ++a) {
    sub_u[a] = sub_costs(a, sub_sol[a]) - sub_v[sub_sol[a]];
  }
  Vector g(n);
  for (Index j = 0; j < n; ++j) {
    double best = kInf;
    for (Index a = 0; a < sub; ++a) {
      best = std::min(best, costs(pick[a], j) - sub_u[a]);
    }
    g(j) = best;
  }
  Matrix reduced = costs.rowwise() - g.transpose();
  const Vector f = reduced.rowwise().minCoeff();
  reduced.colwise() -= f;

  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  std::vector<Index> order(static_cast<std::size_t>(n));
  auto add_candidates = [&](Index want) {
    for (Index i = 0; i < n; ++i) {
      std::iota(order.begin(), order.end(), Index{0});
      std::nth_element(order.begin(), order.begin() + want, order.end(),
                       [&](Index x, Index y) {
                         const double cx = reduced(i, x);
                         const double cy = reduced(i, y);
                         return cx < cy || (cx == cy && x < y);
                       });
      adj[i].insert(adj[i].end(), order.begin(), order.begin() + want);
    }
    for (Index j = 0; j < n; ++j) {
      std::iota(order.begin(), order.end(), Index{0});
      std::nth_element(order.begin(), order.begin() + want, order.end(),
                       [&](Index x, Index y) {
                         const double cx = reduced(x, j);
                         const double cy = reduced(y, j);
                         return cx < cy || (cx == cy && x < y);
                       });
      for (Index r = 0; r < want; ++r) adj[order[r]].push_back(j);
    }
  };
  auto normalise = [&]() {
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  };

  Index want = std::min<Index>(n - 1, 16);
  add_candidates(want);
  normalise();
  const double scale = std::max(1.0, costs.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  std::vector<double> row_pot(f.data(), f.data() + n);
  for (double& x : row_pot) x = -x;
  std::vector<double> col_pot(g.data(), g.data() + n);
  for (int round = 0; round < 6; ++round) {
    SparseAssignment sol = solve_sparse(costs, adj, row_pot, col_pot);
    if (!sol.complete) {
      want = std::min<Index>(n - 1, 2 * want);
      add_candidates(want);
      normalise();
      continue;
    }
    bool certified = true;
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        if (costs(i, j) + sol.row_pot[i] - sol.col_pot[j] < -tol) {
          adj[i].push_back(j);
          certified = false;
        }
      }
    }
    if (certified) return sol.rowsol;
    normalise();
    row_pot = std::move(sol.row_pot);
    col_pot = std::move(sol.col_pot);
  }
  return solve_assignment_dense(costs);
}

double plan_cost(const Matrix& coupling, const Matrix& costs) {
  if (coupling.rows() != costs.rows() || coupling.cols() != costs.cols()) {
    throw ShapeMismatch("coupling and cost matrix shapes differ");
  }
  double total = 0.0;
  for (Index j = 0; j < costs.cols(); ++j) {
    for (Index i = 0; i < costs.rows(); ++i) {
      const double p = coupling(i, j);
      if (p != 0.0) total += p * costs(i, j);
    }
  }
  return total;
}

double marginal_error(const Matrix& coupling, const Vector& src_w,
                      const Vector& dst_w) {
  const double rows = (coupling.rowwise().sum() - src_w).cwiseAbs().sum();
  const double cols =
      (coupling.colwise().sum().transpose() - dst_w).cwiseAbs().sum();
  return std::max(rows, cols);
}

TransportPlan solve_exact_on_costs(const Matrix& costs, const Vector& src_w,
                                   const Vector& dst_w, bool force_general) {
  if (costs.rows() != src_w.size() || costs.cols() != dst_w.size()) {
    throw ShapeMismatch("cost matrix does not match weight vectors");
  }
  if (!force_general && uniform_square(src_w, dst_w)) {
    const Index n = costs.rows();
    const std::vector<Index> assign = solve_assignment(costs);
    TransportPlan plan;
    plan.coupling = Matrix::Zero(n, n);
    const double u = 1.0 / static_cast<double>(n);
    for (Index i = 0; i < n; ++i) plan.coupling(i, assign[i]) = u;
    plan.cost = plan_cost(plan.coupling, costs);
    plan.marginal_error = marginal_error(plan.coupling, src_w, dst_w);
    plan.iterations = static_cast<std::size_t>(n);
    plan.method = "assignment";
    return plan;
  }
  return solve_transportation(costs, src_w, dst_w);
}

namespace {

std::vector<Index> sorted_order(const Matrix& points) {
  std::vector<Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return points(a, 0) < points(b, 0); });
  return order;
}

// North-west corner rule on sorted supports: the monotone coupling, optimal
// on the line for any convex function of |x - y|.
TransportPlan monotone_plan(const EmpiricalMeasure& src,
                            const EmpiricalMeasure& dst, GroundCost cost) {
  const std::vector<Index> si = sorted_order(src.points());
  const std::vector<Index> dj = sorted_order(dst.points());
  TransportPlan plan;
  plan.coupling = Matrix::Zero(src.size(), dst.size());
  std::size_t a = 0;
  std::size_t b = 0;
  double ra = src.weights()(si[0]);
  double rb = dst.weights()(dj[0]);
  while (a < si.size() && b < dj.size()) {
    const double t = std::min(ra, rb);
    const Index i = si[a];
    const Index j = dj[b];
    plan.coupling(i, j) += t;
    const double gap = std::abs(src.points()(i, 0) - dst.points()(j, 0));
    plan.cost += t * (cost == GroundCost::euclidean ? gap : gap * gap);
    ra -= t;
    rb -= t;
    ++plan.iterations;
    if (ra <= 0.0 && ++a < si.size()) ra = src.weights()(si[a]);
    if (rb <= 0.0 && ++b < dj.size()) rb = dst.weights()(dj[b]);
  }
  plan.marginal_error = marginal_error(plan.coupling, src.weights(), dst.weights());
  plan.method = "monotone";
  return plan;
}

}  // namespace

TransportPlan solve_w1_exact(const EmpiricalMeasure& src,
                             const EmpiricalMeasure& dst,
                             const ExactOtOptions& opts) {
  check_pair(src, dst, opts.dense_limit);
  if (src.dim() == 1) return monotone_plan(src, dst, opts.cost);
  const Matrix costs =
      kernels::parallel::cost_matrix(src.points(), dst.points(), opts.cost);
  return solve_exact_on_costs(costs, src.weights(), dst.weights());
}

double w1_1d_quantile(const EmpiricalMeasure& src,
                      const EmpiricalMeasure& dst) {
  if (src.dim() != 1 || dst.dim() != 1) {
    throw DimensionMismatch("quantile coupling needs one-dimensional measures");
  }
  // Integrate |F - G| over the merged support; equals the cost of the
  // monotone coupling.
  struct Atom {
    double x;
    double dw;
  };
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(src.size() + dst.size()));
  for (Index i = 0; i < src.size(); ++i) {
    atoms.push_back({src.points()(i, 0), src.weights()(i)});
  }
  for (Index j = 0; j < dst.size(); ++j) {
    atoms.push_back({dst.points()(j, 0), -dst.weights()(j)});
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.x < b.x; });
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
    diff += atoms[k].dw;
    total += std::abs(diff) * (atoms[k + 1].x - atoms[k].x);
  }
  return total;
}

TransportPlan solve_sinkhorn(const EmpiricalMeasure& src,
                             const EmpiricalMeasure& dst,
                             const SinkhornOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  check_pair(src, dst, std::numeric_limits<std::size_t>::max());
  const Matrix costs =
      kernels::parallel::cost_matrix(src.points(), dst.points(), opts.cost);
  const Index n = costs.rows();
  const Index m = costs.cols();
  const double eps = opts.epsilon;
  const Vector log_w = src.weights().array().log();
  const Vector log_v = dst.weights().array().log();
  Vector f = Vector::Zero(n);
  Vector g = Vector::Zero(m);

  auto logsumexp = [](const double* terms, Index count) {
    double mx = -kInf;
    for (Index k = 0; k < count; ++k) mx = std::max(mx, terms[k]);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (Index k = 0; k < count; ++k) s += std::exp(terms[k] - mx);
    return mx + std::log(s);
  };

  std::vector<double> buf(static_cast<std::size_t>(std::max(n, m)));
  auto coupling = [&]() {
    Matrix p(n, m);
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < n; ++i) {
        p(i, j) = std::exp((f(i) + g(j) - costs(i, j)) / eps + log_w(i) +
                           log_v(j));
      }
    }
    return p;
  };

  std::size_t it = 0;
  double err = kInf;
  Matrix plan;
  while (it < opts.max_iter) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) {
        buf[j] = (g(j) - costs(i, j)) / eps + log_v(j);
      }
      f(i) = -eps * logsumexp(buf.data(), m);
    }
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < n; ++i) {
        buf[i] = (f(i) - costs(i, j)) / eps + log_w(i);
      }
      g(j) = -eps * logsumexp(buf.data(), n);
    }
    ++it;
    if (it % 10 == 0 || it == opts.max_iter) {
      plan = coupling();
      err = marginal_error(plan, src.weights(), dst.weights());
      if (err <= opts.tolerance) break;
    }
  }
  if (err > opts.tolerance) throw NoConvergence(opts.max_iter);
  TransportPlan out;
  out.coupling = std::move(plan);
  out.cost = plan_cost(out.coupling, costs);
  out.marginal_error = err;
  out.iterations = it;
  out.method = "sinkhorn";
  return out;
}

double gaussian_w2(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("gaussian dimensions differ");
  const Matrix s1h = spd_sqrt(a.covariance());
  Matrix inner = s1h * b.covariance() * s1h;
  inner = 0.5 * (inner + inner.transpose()).eval();
  const Matrix cross = spd_sqrt(inner);
  const double mean_term = (a.mean() - b.mean()).squaredNorm();
  const double cov_term =
      (a.covariance() + b.covariance() - 2.0 * cross).trace();
  return std::sqrt(std::max(0.0, mean_term + cov_term));
}

Matrix gaussian_w2_linear_map(const GaussianMeasure& a,
                              const GaussianMeasure& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("gaussian dimensions differ");
  const Matrix s1h = spd_sqrt(a.covariance());
  const Matrix s1ih = spd_inv_sqrt(a.covariance());
  Matrix inner = s1h * b.covariance() * s1h;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Matrix map = s1ih * spd_sqrt(inner) * s1ih;
  return 0.5 * (map + map.transpose());
}

Vector gaussian_w2_map(const GaussianMeasure& a, const GaussianMeasure& b,
                       const Vector& x) {
  if (x.size() != a.dim()) throw DimensionMismatch("point dimension differs");
  return b.mean() + gaussian_w2_linear_map(a, b) * (x - a.mean());
}

}  // namespace whitemetric
