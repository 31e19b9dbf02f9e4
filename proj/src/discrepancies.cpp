#include "whitemetric/discrepancies.hpp"

#include <cmath>

#include "whitemetric/errors.hpp"
#include "whitemetric/kernels.hpp"
#include "whitemetric/random.hpp"

namespace whitemetric {

namespace {

void check_dims(Index a, Index b) {
  if (a != b) {
    throw DimensionMismatch("measures have dimensions " + std::to_string(a) + " and " +
                            std::to_string(b));
  }
}

DiscrepancyResult make_result(double value, DiscrepancyKind kind, bool exact) {
  DiscrepancyResult r;
  r.value = value;
  r.kind = kind;
  r.exact = exact;
  return r;
}

void record_search(DiscrepancyResult& r, const SupSearchConfig& cfg, const SupSearchResult& s) {
  r.metadata["n_starts"] = static_cast<double>(cfg.n_starts);
  r.metadata["radius"] = cfg.radius;
  r.metadata["max_iter"] = static_cast<double>(cfg.max_iter);
  r.metadata["seed"] = static_cast<double>(cfg.seed);
  r.metadata["evaluations"] = static_cast<double>(s.evaluations);
  r.metadata["argmax_norm"] = s.argmax.norm();
}

SupSearchResult fourier_search(const CharFn& f1, const Vector& m1, const CharFn& f2,
                               const Vector& m2, const SupSearchConfig& cfg) {
  Objective obj = [&](const Vector& xi) { return fourier_objective(f1, f2, xi); };
  std::vector<Vector> extra;
  const Vector dm = m1 - m2;
  if (dm.norm() > 0.0) extra.push_back(dm / dm.norm());
  return sup_search(obj, m1.size(), cfg, extra);
}

Vector gaussian_whitened_mean(const GaussianMeasure& g) {
  return whitening_for(g).whitened_mean();
}

}  // namespace

std::string_view to_string(DiscrepancyKind k) noexcept {
  switch (k) {
    case DiscrepancyKind::white_wasserstein: return "white_wasserstein";
    case DiscrepancyKind::white_fourier: return "white_fourier";
    case DiscrepancyKind::gini: return "gini";
    case DiscrepancyKind::gini_upper: return "gini_upper";
    case DiscrepancyKind::d1_whitened: return "d1_whitened";
  }
  return "unknown";
}

double fourier_objective(const CharFn& f1, const CharFn& f2, const Vector& xi) {
  const CharFnEvaluation a = f1(xi);
  const CharFnEvaluation b = f2(xi);
  return (a.value * b.gradient - b.value * a.gradient).norm();
}

DiscrepancyResult white_wasserstein(const EmpiricalMeasure& a, const WhiteningMatrix& wa,
                                    const EmpiricalMeasure& b, const WhiteningMatrix& wb) {
  check_dims(a.dim(), b.dim());
  const EmpiricalMeasure xa = whiten_empirical(a, wa);
  const EmpiricalMeasure xb = whiten_empirical(b, wb);
  const TransportPlan plan = solve_w1_exact(xa, xb);
  DiscrepancyResult r = make_result(plan.cost, DiscrepancyKind::white_wasserstein, false);
  r.metadata["method"] = plan.method;
  r.metadata["marginal_error"] = plan.marginal_error;
  r.metadata["whitening"] = std::string(to_string(wa.process()));
  return r;
}

DiscrepancyResult white_wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                    WhiteningProcess process) {
  check_dims(a.dim(), b.dim());
  return white_wasserstein(a, whitening_for(a, process), b, whitening_for(b, process));
}

DiscrepancyResult white_fourier(const EmpiricalMeasure& a, const WhiteningMatrix& wa,
                                const EmpiricalMeasure& b, const WhiteningMatrix& wb,
                                const SupSearchConfig& cfg) {
  check_dims(a.dim(), b.dim());
  EmpiricalMeasure xa = whiten_empirical(a, wa);
  EmpiricalMeasure xb = whiten_empirical(b, wb);
  const Vector ma = estimate_mean(xa);
  const Vector mb = estimate_mean(xb);
  const SupSearchResult s =
      fourier_search(empirical_cf(std::move(xa)), ma, empirical_cf(std::move(xb)), mb, cfg);
  DiscrepancyResult r = make_result(s.value, DiscrepancyKind::white_fourier, false);
  record_search(r, cfg, s);
  r.metadata["whitening"] = std::string(to_string(wa.process()));
  return r;
}

DiscrepancyResult white_fourier(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                const SupSearchConfig& cfg, WhiteningProcess process) {
  check_dims(a.dim(), b.dim());
  return white_fourier(a, whitening_for(a, process), b, whitening_for(b, process), cfg);
}

DiscrepancyResult gini_discrepancy(const EmpiricalMeasure& a, const WhiteningMatrix& wa,
                                   const EmpiricalMeasure& b, const WhiteningMatrix& wb) {
  check_dims(a.dim(), b.dim());
  const EmpiricalMeasure xa = whiten_empirical(a, wa);
  const EmpiricalMeasure xb = whiten_empirical(b, wb);
  const double v =
      kernels::parallel::mean_pair_distance(xa.points(), xa.weights(), xb.points(), xb.weights());
  DiscrepancyResult r = make_result(v, DiscrepancyKind::gini, false);
  r.metadata["whitening"] = std::string(to_string(wa.process()));
  return r;
}

DiscrepancyResult gini_discrepancy(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                   WhiteningProcess process) {
  check_dims(a.dim(), b.dim());
  return gini_discrepancy(a, whitening_for(a, process), b, whitening_for(b, process));
}

double gini_self(const EmpiricalMeasure& a, const WhiteningMatrix& wa) {
  const EmpiricalMeasure xa = whiten_empirical(a, wa);
  return kernels::parallel::mean_pair_distance(xa.points(), xa.weights(), xa.points(),
                                               xa.weights());
}

double gini_self(const EmpiricalMeasure& a, WhiteningProcess process) {
  return gini_self(a, whitening_for(a, process));
}

DiscrepancyResult d1_discrepancy(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                 const SupSearchConfig& cfg, WhiteningProcess process) {
  check_dims(a.dim(), b.dim());
  EmpiricalMeasure xa = whiten_empirical(a, whitening_for(a, process));
  EmpiricalMeasure xb = whiten_empirical(b, whitening_for(b, process));
  const Vector ma = estimate_mean(xa);
  const Vector mb = estimate_mean(xb);
  const SupSearchResult s =
      d1_search(empirical_cf(std::move(xa)), ma, empirical_cf(std::move(xb)), mb, cfg);
  DiscrepancyResult r = make_result(s.value, DiscrepancyKind::d1_whitened, false);
  record_search(r, cfg, s);
  return r;
}

DiscrepancyResult white_wasserstein_gaussian(const GaussianMeasure& a, const GaussianMeasure& b) {
  check_dims(a.dim(), b.dim());
  const double v = (gaussian_whitened_mean(a) - gaussian_whitened_mean(b)).norm();
  return make_result(v, DiscrepancyKind::white_wasserstein, true);
}

DiscrepancyResult white_fourier_gaussian(const GaussianMeasure& a, const GaussianMeasure& b) {
  DiscrepancyResult r = white_wasserstein_gaussian(a, b);
  r.kind = DiscrepancyKind::white_fourier;
  return r;
}

DiscrepancyResult gini_gaussian_upper(const GaussianMeasure& a, const GaussianMeasure& b) {
  check_dims(a.dim(), b.dim());
  const double dm = (gaussian_whitened_mean(a) - gaussian_whitened_mean(b)).squaredNorm();
  const double v = std::sqrt(2.0 * static_cast<double>(a.dim()) + dm);
  return make_result(v, DiscrepancyKind::gini_upper, true);
}

McEstimate gini_gaussian_mc(const GaussianMeasure& a, const GaussianMeasure& b, Index n,
                            std::uint64_t seed) {
  check_dims(a.dim(), b.dim());
  if (n < 2) throw InvalidArgument("gini_gaussian_mc needs at least two draws");
  const GaussianMeasure wa = whiten_gaussian(a, whitening_for(a));
  const GaussianMeasure wb = whiten_gaussian(b, whitening_for(b));
  const EmpiricalMeasure xs = sample_gaussian(wa, n, derive_seed(seed, "gini_mc_x"));
  const EmpiricalMeasure ys = sample_gaussian(wb, n, derive_seed(seed, "gini_mc_y"));
  // Welford accumulation of |x - y|.
  double mean = 0.0;
  double m2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double v = (xs.points().row(i) - ys.points().row(i)).norm();
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

DiscrepancyResult white_fourier_numeric(const GaussianMeasure& a, const GaussianMeasure& b,
                                        const SupSearchConfig& cfg) {
  check_dims(a.dim(), b.dim());
  const GaussianMeasure wa = whiten_gaussian(a, whitening_for(a));
  const GaussianMeasure wb = whiten_gaussian(b, whitening_for(b));
  const SupSearchResult s = fourier_search(gaussian_cf(wa), wa.mean(), gaussian_cf(wb),
                                           wb.mean(), cfg);
  DiscrepancyResult r = make_result(s.value, DiscrepancyKind::white_fourier, false);
  record_search(r, cfg, s);
  return r;
}

SupSearchResult tau_search(const CharFn& f, const Vector& whitened_mean,
                           const SupSearchConfig& cfg) {
  const double mnorm = whitened_mean.norm();
  if (!(mnorm > kZeroMeanThreshold)) throw ZeroMean("whitened mean norm at or below 1e-12");
  const Eigen::VectorXcd g0 =
      std::complex<double>(0.0, -1.0) * whitened_mean.cast<std::complex<double>>();
  const double denom = 2.0 * mnorm;
  Objective obj = [&](const Vector& xi) {
    const CharFnEvaluation e = f(xi);
    return (g0 * e.value - e.gradient).norm() / denom;
  };
  std::vector<Vector> extra;
  extra.push_back(whitened_mean / mnorm);
  return sup_search(obj, whitened_mean.size(), cfg, extra);
}

double tau_index(const EmpiricalMeasure& a, const SupSearchConfig& cfg,
                 WhiteningProcess process) {
  EmpiricalMeasure xa = whiten_empirical(a, whitening_for(a, process));
  const Vector m = estimate_mean(xa);
  return tau_search(empirical_cf(std::move(xa)), m, cfg).value;
}

double tau_index(const GaussianMeasure& g, const SupSearchConfig& cfg) {
  const GaussianMeasure wg = whiten_gaussian(g, whitening_for(g));
  return tau_search(gaussian_cf(wg), wg.mean(), cfg).value;
}

double cvn_gaussian(const GaussianMeasure& g) {
  // |W m|^2 = m^T S^{-1} m for any whitening W.
  const double r = gaussian_whitened_mean(g).norm();
  if (!(r > kZeroMeanThreshold)) throw ZeroMean("whitened mean norm at or below 1e-12");
  return 1.0 / r;
}

double tau_gaussian(const GaussianMeasure& g) {
  return cvn_gaussian(g) / (2.0 * std::sqrt(std::exp(1.0)));
}

}  // namespace whitemetric
