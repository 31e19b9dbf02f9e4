#include "whitemetric/property_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "whitemetric/errors.hpp"
#include "whitemetric/random.hpp"

namespace whitemetric {

namespace {

constexpr Index kDims[] = {1, 2, 3, 5};
constexpr Index kMinPoints = 8;
constexpr Index kMaxPoints = 64;
constexpr std::size_t kMaxResample = 100;
constexpr Index kGaussianMcDraws = 20'000;

class Tally {
 public:
  Tally(std::string name, std::uint64_t seed) {
    report_.check_name = std::move(name);
    report_.seed = seed;
    report_.worst_slack = std::numeric_limits<double>::infinity();
  }

  // One instance may contribute several margins; it fails if any does.
  void instance(std::initializer_list<std::pair<double, double>> margins) {
    ++report_.instances;
    bool ok = true;
    for (const auto& [slack, tol] : margins) {
      report_.worst_slack = std::min(report_.worst_slack, slack);
      if (!(slack >= -tol)) ok = false;
    }
    if (!ok) ++report_.failures;
  }

  CheckReport done() {
    if (report_.instances == 0) report_.worst_slack = 0.0;
    return report_;
  }

 private:
  CheckReport report_;
};

Matrix random_spd(std::mt19937_64& rng, Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  return a * a.transpose() + 0.1 * Matrix::Identity(d, d);
}

EmpiricalMeasure draw_instance(std::uint64_t seed, Index dim, Index n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix pts(n, dim);
  if (unif(rng) < 0.5) {
    Vector shift(dim);
    for (Index k = 0; k < dim; ++k) shift(k) = 2.0 * normal(rng);
    const GaussianMeasure g(shift, random_spd(rng, dim));
    pts = sample_gaussian(g, n, rng()).points();
  } else {
    for (Index k = 0; k < dim; ++k) {
      const double lo = 2.0 * normal(rng);
      const double width = 0.5 + 2.5 * unif(rng);
      for (Index i = 0; i < n; ++i) pts(i, k) = lo + width * unif(rng);
    }
  }
  if (unif(rng) < 0.75) return EmpiricalMeasure(std::move(pts));
  std::exponential_distribution<double> expo(1.0);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = 0.05 + expo(rng);
  return EmpiricalMeasure::with_unnormalized_weights(std::move(pts), std::move(w));
}

bool whitenable(const EmpiricalMeasure& m) {
  try {
    whitening_for(m);
    return true;
  } catch (const Error&) {
    return false;
  }
}

EmpiricalMeasure instance_of_size(std::uint64_t seed, Index dim, Index n) {
  for (std::size_t attempt = 0; attempt < kMaxResample; ++attempt) {
    EmpiricalMeasure m = draw_instance(derive_seed(seed, attempt), dim, n);
    if (whitenable(m)) return m;
  }
  throw NearSingular("instance generator could not draw a whitenable measure");
}

Index pick_dim(std::mt19937_64& rng) {
  return kDims[std::uniform_int_distribution<int>(0, 3)(rng)];
}

Index pick_size(std::mt19937_64& rng) {
  return std::uniform_int_distribution<Index>(kMinPoints, kMaxPoints)(rng);
}

Matrix scale_columns(const Matrix& pts, const Vector& q) { return pts * q.asDiagonal(); }

Matrix shift_rows(const Matrix& pts, const Vector& c) {
  Matrix out = pts;
  out.rowwise() += c.transpose();
  return out;
}

double discrepancy(DiscrepancyKind kind, const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                   const SupSearchConfig& cfg) {
  switch (kind) {
    case DiscrepancyKind::white_wasserstein: return white_wasserstein(a, b).value;
    case DiscrepancyKind::white_fourier: return white_fourier(a, b, cfg).value;
    case DiscrepancyKind::gini: return gini_discrepancy(a, b).value;
    case DiscrepancyKind::d1_whitened: return d1_discrepancy(a, b, cfg).value;
    case DiscrepancyKind::gini_upper: break;
  }
  throw InvalidArgument("no empirical form for this discrepancy kind");
}

std::string kind_suffix(DiscrepancyKind kind) {
  switch (kind) {
    case DiscrepancyKind::white_wasserstein: return "wasserstein";
    case DiscrepancyKind::white_fourier: return "fourier";
    case DiscrepancyKind::gini: return "gini";
    case DiscrepancyKind::d1_whitened: return "d1";
    case DiscrepancyKind::gini_upper: return "gini_upper";
  }
  return "unknown";
}

// Whitened copy of an empirical measure with its own ZCA-cor matrix.
struct Whitened {
  EmpiricalMeasure points;
  Vector mean;
};

Whitened whitened(const EmpiricalMeasure& m) {
  EmpiricalMeasure w = whiten_empirical(m, whitening_for(m));
  Vector mean = estimate_mean(w);
  return {std::move(w), std::move(mean)};
}

double mean_distance_to(const EmpiricalMeasure& m, const Vector& p) {
  double s = 0.0;
  for (Index i = 0; i < m.size(); ++i) {
    s += m.weights()(i) * (m.points().row(i).transpose() - p).norm();
  }
  return s;
}

}  // namespace

SupSearchConfig suite_search_config(std::uint64_t seed) {
  SupSearchConfig cfg;
  cfg.n_starts = 16;
  cfg.seed = seed;
  return cfg;
}

EmpiricalMeasure random_instance(std::uint64_t seed, Index dim) {
  std::mt19937_64 rng(derive_seed(seed, "size"));
  return instance_of_size(seed, dim, pick_size(rng));
}

InstancePair random_instance_pair(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, "shape"));
  const Index d = pick_dim(rng);
  const Index na = pick_size(rng);
  const Index nb = std::bernoulli_distribution(0.5)(rng) ? na : pick_size(rng);
  return {instance_of_size(derive_seed(seed, "a"), d, na),
          instance_of_size(derive_seed(seed, "b"), d, nb)};
}

GaussianMeasure random_gaussian(std::uint64_t seed, Index dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector mean(dim);
  for (Index k = 0; k < dim; ++k) mean(k) = 2.0 * normal(rng);
  Matrix cov = random_spd(rng, dim);
  // Random per-coordinate scales exercise the correlation split.
  std::uniform_real_distribution<double> logscale(std::log(0.2), std::log(5.0));
  Vector s(dim);
  for (Index k = 0; k < dim; ++k) s(k) = std::exp(logscale(rng));
  return GaussianMeasure(mean, s.asDiagonal() * cov * s.asDiagonal());
}

CheckReport check_scale_invariance(DiscrepancyKind kind, std::size_t n_instances,
                                   std::uint64_t seed, double q_min, double q_max) {
  const std::string name = "scale_invariance_" + kind_suffix(kind);
  const std::uint64_t check_seed = derive_seed(seed, name);
  Tally tally(name, check_seed);
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::uint64_t s = derive_seed(check_seed, i);
    const InstancePair p = random_instance_pair(s);
    std::mt19937_64 rng(derive_seed(s, "q"));
    std::uniform_real_distribution<double> logq(std::log(q_min), std::log(q_max));
    Vector q1(p.a.dim());
    Vector q2(p.a.dim());
    for (Index k = 0; k < q1.size(); ++k) q1(k) = std::exp(logq(rng));
    for (Index k = 0; k < q2.size(); ++k) q2(k) = std::exp(logq(rng));
    const EmpiricalMeasure qa(scale_columns(p.a.points(), q1), p.a.weights());
    const EmpiricalMeasure qb(scale_columns(p.b.points(), q2), p.b.weights());
    const SupSearchConfig cfg = suite_search_config(derive_seed(s, "search"));
    const double base = discrepancy(kind, p.a, p.b, cfg);
    const double scaled = discrepancy(kind, qa, qb, cfg);
    tally.instance({{-std::abs(scaled - base), kScaleTolerance * (1.0 + base)}});
  }
  return tally.done();
}

CheckReport check_uniform_redistribution(DiscrepancyKind kind, std::size_t n_instances,
                                         std::uint64_t seed) {
  const std::string name = "uniform_redistribution_" + kind_suffix(kind);
  const std::uint64_t check_seed = derive_seed(seed, name);
  Tally tally(name, check_seed);
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::uint64_t s = derive_seed(check_seed, i);
    std::mt19937_64 rng(derive_seed(s, "shift"));
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    if (kind == DiscrepancyKind::white_fourier) {
      std::mt19937_64 drng(derive_seed(s, "dim"));
      const Index d = pick_dim(drng);
      const GaussianMeasure a = random_gaussian(derive_seed(s, "a"), d);
      const GaussianMeasure b = random_gaussian(derive_seed(s, "b"), d);
      Vector c1(d);
      Vector c2(d);
      for (Index k = 0; k < d; ++k) c1(k) = unif(rng);
      for (Index k = 0; k < d; ++k) c2(k) = unif(rng);
      const GaussianMeasure ac(a.mean() + c1, a.covariance());
      const GaussianMeasure bc(b.mean() + c2, b.covariance());
      const double base = white_fourier_gaussian(a, b).value;
      const double shifted = white_fourier_gaussian(ac, bc).value;
      const double extra =
          (whitening_for(a).matrix() * c1 - whitening_for(b).matrix() * c2).norm();
      tally.instance({{base + extra - shifted, kBoundTolerance}});
      continue;
    }
    const InstancePair p = random_instance_pair(s);
    const Index d = p.a.dim();
    Vector c1(d);
    Vector c2(d);
    for (Index k = 0; k < d; ++k) c1(k) = unif(rng);
    for (Index k = 0; k < d; ++k) c2(k) = unif(rng);
    const EmpiricalMeasure ac(shift_rows(p.a.points(), c1), p.a.weights());
    const EmpiricalMeasure bc(shift_rows(p.b.points(), c2), p.b.weights());
    const SupSearchConfig cfg = suite_search_config(derive_seed(s, "search"));
    const double base = discrepancy(kind, p.a, p.b, cfg);
    const double shifted = discrepancy(kind, ac, bc, cfg);
    const double extra =
        (whitening_for(p.a).matrix() * c1 - whitening_for(p.b).matrix() * c2).norm();
    tally.instance({{base + extra - shifted, kBoundTolerance}});
  }
  return tally.done();
}

CheckReport check_prop41(std::size_t n_instances, std::uint64_t seed) {
  const std::string name = "prop41";
  const std::uint64_t check_seed = derive_seed(seed, name);
  Tally tally(name, check_seed);
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::uint64_t s = derive_seed(check_seed, i);
    const InstancePair p = random_instance_pair(s);
    const SupSearchConfig cfg = suite_search_config(derive_seed(s, "search"));
    const double f = white_fourier(p.a, p.b, cfg).value;
    const double g = gini_discrepancy(p.a, p.b).value;
    tally.instance({{g - f, kBoundTolerance}});
  }
  // Gaussian pairs: F is exact; each draw contributes
  // |x - y| - |x - m1| - |y - m2|, whose mean must not exceed F.
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::uint64_t s = derive_seed(check_seed, n_instances + i);
    std::mt19937_64 drng(derive_seed(s, "dim"));
    const Index d = pick_dim(drng);
    const GaussianMeasure a = random_gaussian(derive_seed(s, "a"), d);
    const GaussianMeasure b = random_gaussian(derive_seed(s, "b"), d);
    const GaussianMeasure wa = whiten_gaussian(a, whitening_for(a));
    const GaussianMeasure wb = whiten_gaussian(b, whitening_for(b));
    const Matrix xs = sample_gaussian(wa, kGaussianMcDraws, derive_seed(s, "x")).points();
    const Matrix ys = sample_gaussian(wb, kGaussianMcDraws, derive_seed(s, "y")).points();
    double mean = 0.0;
    double m2 = 0.0;
    for (Index k = 0; k < kGaussianMcDraws; ++k) {
      const Vector x = xs.row(k).transpose();
      const Vector y = ys.row(k).transpose();
      const double v = (x - y).norm() - (x - wa.mean()).norm() - (y - wb.mean()).norm();
      const double delta = v - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (v - mean);
    }
    const double se = std::sqrt(m2 / static_cast<double>(kGaussianMcDraws - 1) /
                                static_cast<double>(kGaussianMcDraws));
    const double f = white_fourier_gaussian(a, b).value;
    tally.instance({{f - mean, 3.0 * se + kBoundTolerance}});
  }
  return tally.done();
}

CheckReport check_prop42(std::size_t n_instances, std::uint64_t seed) {
  const std::string name = "prop42";
  const std::uint64_t check_seed = derive_seed(seed, name);
  Tally tally(name, check_seed);
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::uint64_t s = derive_seed(check_seed, i);
    const InstancePair p = random_instance_pair(s);
    if (i % 10 == 9) {
      // nu = a single point, identity whitening: every coupling is the
      // product coupling, so G = W + min(G(mu), 0) = W.
      const Whitened x = whitened(p.a);
      std::mt19937_64 rng(derive_seed(s, "dirac"));
      std::normal_distribution<double> normal(0.0, 2.0);
      Matrix pt(1, p.a.dim());
      for (Index k = 0; k < pt.cols(); ++k) pt(0, k) = normal(rng);
      const EmpiricalMeasure nu(pt);
      const WhiteningMatrix id = identity_whitening(estimate_mean(nu), estimate_covariance(nu));
      const WhiteningMatrix wa = whitening_for(p.a);
      const double w = white_wasserstein(p.a, wa, nu, id).value;
      const double g = gini_discrepancy(p.a, wa, nu, id).value;
      const double bound = w + std::min(gini_self(p.a, wa), gini_self(nu, id));
      tally.instance({{g - w, kBoundTolerance},
                      {bound - g, kBoundTolerance},
                      {-std::abs(g - bound), kBoundTolerance}});
      continue;
    }
    const double w = white_wasserstein(p.a, p.b).value;
    const double g = gini_discrepancy(p.a, p.b).value;
    const double bound = w + std::min(gini_self(p.a), gini_self(p.b));
    tally.instance({{g - w, kBoundTolerance}, {bound - g, kBoundTolerance}});
  }
  return tally.done();
}

CheckReport check_prop43(std::size_t n_instances, std::uint64_t seed) {
  const std::string name = "prop43";
  const std::uint64_t check_seed = derive_seed(seed, name);
  Tally tally(name, check_seed);
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::uint64_t s = derive_seed(check_seed, i);
    const InstancePair p = random_instance_pair(s);
    const Whitened x = whitened(p.a);
    const Whitened y = whitened(p.b);
    const Matrix costs = kernels::parallel::cost_matrix(x.points.points(), y.points.points(),
                                                        GroundCost::euclidean);
    const TransportPlan plan =
        solve_exact_on_costs(costs, x.points.weights(), y.points.weights());
    const double w = plan.cost;
    const double dm = (x.mean - y.mean).norm();

    const Matrix xc = x.points.points().rowwise() - x.mean.transpose();
    const Matrix yc = y.points.points().rowwise() - y.mean.transpose();
    const double cross = (plan.coupling.cwiseProduct(xc * yc.transpose())).sum();
    const double n = static_cast<double>(p.a.dim());
    const double bound1 = dm + std::sqrt(std::max(0.0, 2.0 * n - 2.0 * cross));

    const SupSearchConfig cfg = suite_search_config(derive_seed(s, "search"));
    const double f = white_fourier(p.a, p.b, cfg).value;
    const Matrix product = x.points.weights() * y.points.weights().transpose();
    const double bound2 = w + costs.cwiseProduct((plan.coupling - product).cwiseAbs()).sum();
    tally.instance({{bound1 - w, kBoundTolerance}, {bound2 - f, kBoundTolerance}});
  }
  return tally.done();
}

CheckReport check_corollary_dirac(std::size_t n_instances, std::uint64_t seed) {
  const std::string name = "corollary_dirac";
  const std::uint64_t check_seed = derive_seed(seed, name);
  Tally tally(name, check_seed);
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::uint64_t s = derive_seed(check_seed, i);
    std::mt19937_64 rng(derive_seed(s, "dim"));
    const Index d = pick_dim(rng);
    const Whitened x = whitened(random_instance(derive_seed(s, "mu"), d));
    std::normal_distribution<double> normal(0.0, 2.0);
    Vector m2(d);
    for (Index k = 0; k < d; ++k) m2(k) = normal(rng);
    const EmpiricalMeasure nu(Matrix(m2.transpose()));
    const WhiteningMatrix id_x = identity_whitening(x.mean, Matrix::Identity(d, d));
    const WhiteningMatrix id_nu = identity_whitening(m2, Matrix::Zero(d, d));

    const double dm = (x.mean - m2).norm();
    const double f0 = fourier_objective(empirical_cf(x.points), empirical_cf(nu), Vector::Zero(d));
    const double w = white_wasserstein(x.points, id_x, nu, id_nu).value;
    const double e_to_m2 = mean_distance_to(x.points, m2);
    const double e_to_m1 = mean_distance_to(x.points, x.mean);
    tally.instance({{f0 - dm, kBoundTolerance},
                    {w - f0, kBoundTolerance},
                    {-std::abs(w - e_to_m2), kBoundTolerance},
                    {dm + e_to_m1 - w, kBoundTolerance}});
  }
  return tally.done();
}

std::vector<CheckReport> run_suite(std::uint64_t seed) {
  std::vector<CheckReport> out;
  for (DiscrepancyKind k : {DiscrepancyKind::white_wasserstein, DiscrepancyKind::white_fourier,
                            DiscrepancyKind::gini}) {
    out.push_back(check_scale_invariance(k, 100, seed));
  }
  for (DiscrepancyKind k : {DiscrepancyKind::white_wasserstein, DiscrepancyKind::white_fourier,
                            DiscrepancyKind::gini}) {
    out.push_back(check_uniform_redistribution(k, 100, seed));
  }
  out.push_back(check_prop41(50, seed));
  out.push_back(check_prop42(100, seed));
  out.push_back(check_prop43(50, seed));
  out.push_back(check_corollary_dirac(50, seed));
  return out;
}

}  // namespace whitemetric
