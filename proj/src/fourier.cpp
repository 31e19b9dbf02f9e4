#include "whitemetric/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <omp.h>
#include <numeric>
#include <random>
#include <vector>

#include "whitemetric/errors.hpp"
#include "whitemetric/kernels.hpp"
#include "whitemetric/random.hpp"

namespace whitemetric {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kGridPerSide = 10;
constexpr std::size_t kGoldenSteps = 48;

struct Counted {
  const Objective& f;
  std::size_t calls = 0;
  double operator()(const Vector& x) {
    ++calls;
    const double v = f(x);
    return std::isfinite(v) ? v : kNegInf;
  }
};

struct Candidate {
  double value = kNegInf;
  Vector point;
  std::size_t evaluations = 0;
};

// Nelder-Mead ascent, standard coefficients.
void nelder_mead(Counted& f, Vector& x, double& fx, double step,
                 std::size_t max_iter, double tol) {
  const Index d = x.size();
  std::vector<Vector> pts(static_cast<std::size_t>(d + 1), x);
  std::vector<double> val(static_cast<std::size_t>(d + 1), fx);
  for (Index k = 0; k < d; ++k) {
    pts[k + 1](k) += step;
    val[k + 1] = f(pts[k + 1]);
  }
  std::vector<std::size_t> order(pts.size());
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    double diam = 0.0;
    for (const Vector& p : pts) diam = std::max(diam, (p - pts[best]).norm());
    if (std::isfinite(val[worst]) && val[best] - val[worst] <= tol * (1.0 + std::abs(val[best])) &&
        diam <= 1e-7 * (1.0 + pts[best].norm())) {
      break;
    }
    Vector centroid = Vector::Zero(d);
    for (std::size_t i : order) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(d);
    const Vector xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    if (fr > val[best]) {
      const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      if (fe > fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr > val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr > val[worst];
    const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                              : Vector(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    if (fc > std::max(fr, val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      val[i] = f(pts[i]);
    }
  }
  const auto top = static_cast<std::size_t>(
      std::max_element(val.begin(), val.end()) - val.begin());
  if (val[top] > fx) {
    x = pts[top];
    fx = val[top];
  }
}

void golden_polish(Counted& f, Vector& x, double& fx, double half_width) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (Index k = 0; k < x.size(); ++k) {
    double lo = x(k) - half_width;
    double hi = x(k) + half_width;
    Vector probe = x;
    auto at = [&](double t) {
      probe(k) = t;
      return f(probe);
    };
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = at(a);
    double fb = at(b);
    for (std::size_t s = 0; s < kGoldenSteps; ++s) {
      if (fa >= fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - inv_phi * (hi - lo);
        fa = at(a);
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + inv_phi * (hi - lo);
        fb = at(b);
      }
    }
    const double t = fa >= fb ? a : b;
    const double ft = std::max(fa, fb);
    if (ft > fx) {
      x(k) = t;
      fx = ft;
    }
  }
}

Candidate refine(const Objective& objective, Vector start, const SupSearchConfig& cfg) {
  Counted f{objective};
  double fx = f(start);
  const double step = std::max(0.05 * cfg.radius, 1e-3);
  nelder_mead(f, start, fx, step, cfg.max_iter, cfg.tol);
  golden_polish(f, start, fx, std::max(1e-3, 1e-2 * cfg.radius));
  golden_polish(f, start, fx, 1e-5);
  return {fx, std::move(start), f.calls};
}

Vector random_in_ball(Index dim, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector dir(dim);
  double nrm = 0.0;
  do {
    for (Index k = 0; k < dim; ++k) dir(k) = normal(rng);
    nrm = dir.norm();
  } while (nrm == 0.0);
  const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
  return dir * (r / nrm);
}

}  // namespace

CharFnEvaluation ecf_eval(const EmpiricalMeasure& m, const Vector& xi) {
  if (xi.size() != m.dim()) throw DimensionMismatch("ecf: frequency dimension differs from data");
  if (xi.isZero(0.0)) {
    const Vector mean = estimate_mean(m);
    return {{1.0, 0.0}, std::complex<double>(0.0, -1.0) * mean.cast<std::complex<double>>()};
  }
  kernels::EcfSum s = kernels::parallel::ecf(m.points(), m.weights(), xi);
  return {s.value, std::move(s.gradient)};
}

CharFnEvaluation gaussian_cf_eval(const GaussianMeasure& g, const Vector& xi) {
  if (xi.size() != g.dim()) throw DimensionMismatch("gaussian cf: frequency dimension differs");
  const Vector sxi = g.covariance() * xi;
  const std::complex<double> value =
      std::exp(std::complex<double>(-0.5 * xi.dot(sxi), -xi.dot(g.mean())));
  Eigen::VectorXcd grad(xi.size());
  for (Index k = 0; k < xi.size(); ++k) {
    grad(k) = std::complex<double>(-sxi(k), -g.mean()(k)) * value;
  }
  return {value, std::move(grad)};
}

CharFn empirical_cf(EmpiricalMeasure m) {
  return [m = std::move(m)](const Vector& xi) { return ecf_eval(m, xi); };
}

CharFn gaussian_cf(GaussianMeasure g) {
  return [g = std::move(g)](const Vector& xi) { return gaussian_cf_eval(g, xi); };
}

void SupSearchConfig::validate() const {
  if (n_starts == 0) throw InvalidArgument("n_starts must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("radius must be positive");
  if (max_iter == 0) throw InvalidArgument("max_iter must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
}

SupSearchResult sup_search(const Objective& objective, Index dim,
                           const SupSearchConfig& cfg,
                           std::span<const Vector> extra_starts) {
  cfg.validate();
  if (dim < 1) throw InvalidArgument("sup_search: dimension must be positive");
  for (const Vector& s : extra_starts) {
    if (s.size() != dim) throw DimensionMismatch("sup_search: start has wrong dimension");
  }

  SupSearchResult out;
  out.argmax = Vector::Zero(dim);
  out.value = objective(out.argmax);
  if (!std::isfinite(out.value)) out.value = kNegInf;
  out.evaluations = 1;

  // Coarse axis grid; its best point becomes a start.
  Vector grid_best = Vector::Zero(dim);
  double grid_val = kNegInf;
  for (Index k = 0; k < dim; ++k) {
    for (std::size_t j = 1; j <= kGridPerSide; ++j) {
      for (double sign : {1.0, -1.0}) {
        Vector p = Vector::Zero(dim);
        p(k) = sign * cfg.radius * static_cast<double>(j) / kGridPerSide;
        const double v = objective(p);
        ++out.evaluations;
        if (std::isfinite(v) && v > grid_val) {
          grid_val = v;
          grid_best = p;
        }
      }
    }
  }

  std::vector<Vector> starts;
  starts.reserve(1 + extra_starts.size() + cfg.n_starts);
  starts.push_back(grid_best);
  for (const Vector& s : extra_starts) starts.push_back(s);
  for (std::size_t k = 0; k < cfg.n_starts; ++k) {
    starts.push_back(random_in_ball(dim, cfg.radius, derive_seed(cfg.seed, k)));
  }

  std::vector<Candidate> results(starts.size());
  const auto count = static_cast<std::ptrdiff_t>(starts.size());
  const int threads = kernels::thread_cap();
#pragma omp parallel for schedule(dynamic, 1) if (threads != 1) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    results[static_cast<std::size_t>(s)] = refine(objective, starts[static_cast<std::size_t>(s)], cfg);
  }

  // Highest value wins; ties go to the earliest candidate.
  for (const Candidate& c : results) {
    out.evaluations += c.evaluations;
    if (c.value > out.value) {
      out.value = c.value;
      out.argmax = c.point;
    }
  }
  return out;
}

SupSearchResult d1_search(const CharFn& f, const Vector& mean_f, const CharFn& g,
                          const Vector& mean_g, const SupSearchConfig& cfg) {
  const Index d = mean_f.size();
  if (mean_g.size() != d) throw DimensionMismatch("d1: dimensions differ");
  const Vector dm = mean_f - mean_g;
  Objective obj = [&](const Vector& xi) {
    const double r = xi.norm();
    if (r == 0.0) return dm.norm();
    if (r < 1e-8) return std::abs(xi.dot(dm)) / r;
    return std::abs(f(xi).value - g(xi).value) / r;
  };
  std::vector<Vector> extra;
  if (dm.norm() > 0.0) extra.push_back(dm / dm.norm());
  return sup_search(obj, d, cfg, extra);
}

double d1_whitened(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                   const SupSearchConfig& cfg, WhiteningProcess process) {
  const EmpiricalMeasure wa = whiten_empirical(a, whitening_for(a, process));
  const EmpiricalMeasure wb = whiten_empirical(b, whitening_for(b, process));
  return d1_search(empirical_cf(wa), estimate_mean(wa), empirical_cf(wb),
                   estimate_mean(wb), cfg)
      .value;
}

double d1_whitened(const GaussianMeasure& a, const GaussianMeasure& b,
                   const SupSearchConfig& cfg, WhiteningProcess process) {
  const GaussianMeasure wa = whiten_gaussian(a, whitening_for(a, process));
  const GaussianMeasure wb = whiten_gaussian(b, whitening_for(b, process));
  return d1_search(gaussian_cf(wa), wa.mean(), gaussian_cf(wb), wb.mean(), cfg).value;
}

}  // namespace whitemetric
