#include "whitemetric/model_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "whitemetric/discrepancies.hpp"
#include "whitemetric/errors.hpp"
#include "whitemetric/random.hpp"

namespace whitemetric {

namespace {

constexpr double kScoreMeans[] = {0.65, 0.76, 0.51, 0.62};
constexpr double kScoreSds[] = {0.11, 0.17, 0.23, 0.15};
constexpr double kSectorShares[] = {0.3305, 0.0132, 0.0518, 0.5452, 0.0593};

// Log-scale location and spread per response; exp(s^2 / 2) matches the
// published mean-to-median ratios.
constexpr double kLogMedian[] = {10.6878, 9.6195, 10.6810};
constexpr double kLogSd[] = {1.6588, 1.6858, 1.6530};
constexpr double kCommonLoading = 0.9;
// Score effects (E, S, G) and sector shifts on the log scale.
constexpr double kScoreEffect[3][3] = {{0.3, 0.4, 1.2}, {0.2, 0.6, 1.4}, {0.3, 0.3, 1.1}};
constexpr double kSectorEffect[3][5] = {{0.0, -0.6, 0.3, 0.2, -0.5},
                                        {0.0, -0.5, 0.0, 0.2, -0.6},
                                        {0.0, -0.5, 1.0, 0.1, -0.7}};

const std::vector<std::string> kSectorNames = {"consumer", "financials", "health_utilities",
                                               "manufacturing", "tech_comm"};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Columns E, S, G of the score block.
Matrix esg_parts(const RegressionDataset& d) { return d.scores.rightCols(3); }

std::vector<Index> present_sectors(const RegressionDataset& train) {
  std::vector<bool> seen(train.sector_names.size(), false);
  for (Index s : train.sector) seen[static_cast<std::size_t>(s)] = true;
  std::vector<Index> cols;
  bool baseline_taken = false;
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k]) continue;
    if (!baseline_taken) {
      baseline_taken = true;
      continue;
    }
    cols.push_back(static_cast<Index>(k));
  }
  return cols;
}

Matrix knn_features(const RegressionDataset& d) {
  Matrix f(d.size(), 3 + static_cast<Index>(d.sector_names.size()));
  f.leftCols(3) = esg_parts(d);
  f.rightCols(static_cast<Index>(d.sector_names.size())) = d.sector_indicators();
  return f;
}

Matrix knn_predict(Index k, const RegressionDataset& train, const RegressionDataset& test) {
  const Index n = train.size();
  if (k < 1 || k > n) {
    throw InvalidArgument("knn: k must be in [1, " + std::to_string(n) + "]");
  }
  Matrix ftrain = knn_features(train);
  Matrix ftest = knn_features(test);
  const Vector mean = ftrain.colwise().mean();
  Vector sd = ((ftrain.rowwise() - mean.transpose()).array().square().colwise().mean()).sqrt();
  for (Index j = 0; j < sd.size(); ++j) {
    if (!(sd(j) > 0.0)) sd(j) = 1.0;
  }
  ftrain = (ftrain.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
  ftest = (ftest.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();

  Matrix pred(test.size(), train.responses.cols());
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < test.size(); ++i) {
    for (Index j = 0; j < n; ++j) {
      dist[static_cast<std::size_t>(j)] = {(ftrain.row(j) - ftest.row(i)).squaredNorm(), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    Vector acc = Vector::Zero(train.responses.cols());
    for (Index j = 0; j < k; ++j) {
      acc += train.responses.row(dist[static_cast<std::size_t>(j)].second).transpose();
    }
    pred.row(i) = acc.transpose() / static_cast<double>(k);
  }
  return pred;
}

void pick_winners(EvalReport& r) {
  struct Metric {
    const char* name;
    std::optional<double> (*get)(const ModelScores&);
  };
  static const Metric metrics[] = {
      {"rmse_o", [](const ModelScores& m) -> std::optional<double> { return m.rmse_original; }},
      {"rmse_w", [](const ModelScores& m) -> std::optional<double> { return m.rmse_normalised; }},
      {"wass",
       [](const ModelScores& m) -> std::optional<double> {
         if (!m.whitened_original) return std::nullopt;
         return m.whitened_original->wass;
       }},
      {"gini_upper",
       [](const ModelScores& m) -> std::optional<double> {
         if (!m.whitened_original) return std::nullopt;
         return m.whitened_original->gini_upper;
       }},
  };
  for (const Metric& metric : metrics) {
    std::string best;
    double best_value = 0.0;
    for (const ModelScores& m : r.models) {
      const std::optional<double> v = metric.get(m);
      if (!v) continue;
      if (best.empty() || *v < best_value) {
        best = m.name;
        best_value = *v;
      }
    }
    r.winners.emplace_back(metric.name, best);
  }
}

ModelScores score_model(std::string name, const Matrix& truth_o, const Matrix& pred_o,
                        const Matrix& truth_w, const Matrix& pred_w) {
  ModelScores m;
  m.name = std::move(name);
  m.rmse_original = rmse(pred_o, truth_o);
  m.rmse_normalised = rmse(pred_w, truth_w);
  try {
    m.whitened_original = whitened_scores(pred_o, truth_o);
    m.whitened_normalised = whitened_scores(pred_w, truth_w);
  } catch (const Error& e) {
    m.whitened_original.reset();
    m.whitened_normalised.reset();
    m.error = std::string(to_string(e.code())) + ": " + e.what();
  }
  return m;
}

void finish(EvalReport& r) {
  for (const ModelScores& m : r.models) {
    if (!m.whitened_original || !m.whitened_normalised) continue;
    const WhitenedScores& o = *m.whitened_original;
    const WhitenedScores& w = *m.whitened_normalised;
    const double gap = std::max(std::abs(o.wass - w.wass), std::abs(o.gini_upper - w.gini_upper));
    r.whitened_gap = std::max(r.whitened_gap, gap);
    const double scale = 1.0 + std::max(o.wass, o.gini_upper);
    if (gap > kNormalisationTolerance * scale) r.whitened_consistent = false;
  }
  pick_winners(r);
}

}  // namespace

const std::vector<std::string>& RegressionDataset::score_columns() {
  static const std::vector<std::string> cols = {"esg", "e_sc", "s_sc", "g_sc"};
  return cols;
}

const std::vector<std::string>& RegressionDataset::response_columns() {
  static const std::vector<std::string> cols = {"tass", "sfnd", "tovr"};
  return cols;
}

Matrix RegressionDataset::sector_indicators() const {
  Matrix m = Matrix::Zero(size(), static_cast<Index>(sector_names.size()));
  for (Index i = 0; i < size(); ++i) m(i, sector[static_cast<std::size_t>(i)]) = 1.0;
  return m;
}

RegressionDataset RegressionDataset::rows(const std::vector<Index>& idx) const {
  RegressionDataset out;
  out.sector_names = sector_names;
  out.scores.resize(static_cast<Index>(idx.size()), scores.cols());
  out.responses.resize(static_cast<Index>(idx.size()), responses.cols());
  out.sector.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.scores.row(static_cast<Index>(r)) = scores.row(idx[r]);
    out.responses.row(static_cast<Index>(r)) = responses.row(idx[r]);
    out.sector.push_back(sector[static_cast<std::size_t>(idx[r])]);
  }
  return out;
}

RegressionDataset RegressionDataset::with_responses(Matrix r) const {
  if (r.rows() != responses.rows() || r.cols() != responses.cols()) {
    throw ShapeMismatch("replacement responses have a different shape");
  }
  RegressionDataset out = *this;
  out.responses = std::move(r);
  return out;
}

void RegressionDataset::validate() const {
  if (scores.cols() != 4) throw InvalidArgument("dataset needs four score columns");
  if (responses.cols() != 3) throw InvalidArgument("dataset needs three response columns");
  if (scores.rows() != responses.rows() ||
      static_cast<Index>(sector.size()) != responses.rows()) {
    throw InvalidArgument("dataset columns have different lengths");
  }
  if (sector_names.empty()) throw InvalidArgument("dataset has no sector labels");
  for (Index s : sector) {
    if (s < 0 || s >= static_cast<Index>(sector_names.size())) {
      throw InvalidArgument("sector index out of range");
    }
  }
  if (!scores.allFinite() || !responses.allFinite()) {
    throw InvalidArgument("dataset contains non-finite values");
  }
}

double clipped_normal_mean(double mu, double sd, double lo, double hi) {
  const double a = (lo - mu) / sd;
  const double b = (hi - mu) / sd;
  const double pa = normal_cdf(a);
  const double pb = normal_cdf(b);
  return lo * pa + hi * (1.0 - pb) + mu * (pb - pa) + sd * (normal_pdf(a) - normal_pdf(b));
}

double clipped_normal_location(double target, double sd, double lo, double hi) {
  if (!(target > lo && target < hi)) throw InvalidArgument("clipped mean target outside bounds");
  // The clipped mean is increasing in mu.
  double left = lo - 10.0 * sd;
  double right = hi + 10.0 * sd;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (left + right);
    if (clipped_normal_mean(mid, sd, lo, hi) < target) {
      left = mid;
    } else {
      right = mid;
    }
  }
  return 0.5 * (left + right);
}

RegressionDataset synth_esg_dataset(Index n, std::uint64_t seed) {
  if (n < 50) throw InvalidArgument("synth_esg_dataset needs n >= 50");
  RegressionDataset d;
  d.sector_names = kSectorNames;
  d.scores.resize(n, 4);
  d.responses.resize(n, 3);
  d.sector.resize(static_cast<std::size_t>(n));

  std::mt19937_64 score_rng(derive_seed(seed, "scores"));
  std::mt19937_64 sector_rng(derive_seed(seed, "sectors"));
  std::mt19937_64 response_rng(derive_seed(seed, "responses"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::discrete_distribution<Index> sectors(std::begin(kSectorShares), std::end(kSectorShares));

  double loc[4];
  for (int j = 0; j < 4; ++j) loc[j] = clipped_normal_location(kScoreMeans[j], kScoreSds[j], 0.0, 1.0);

  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) {
      d.scores(i, j) = std::clamp(loc[j] + kScoreSds[j] * normal(score_rng), 0.0, 1.0);
    }
    const Index s = sectors(sector_rng);
    d.sector[static_cast<std::size_t>(i)] = s;
    const double common = normal(response_rng);
    for (int r = 0; r < 3; ++r) {
      double shift = kSectorEffect[r][s];
      for (int j = 0; j < 3; ++j) {
        shift += kScoreEffect[r][j] * (d.scores(i, j + 1) - kScoreMeans[j + 1]);
      }
      const double z = kCommonLoading * common +
                       std::sqrt(1.0 - kCommonLoading * kCommonLoading) * normal(response_rng);
      d.responses(i, r) = std::exp(kLogMedian[r] + shift + kLogSd[r] * z);
    }
  }
  return d;
}

Split train_test_split(const RegressionDataset& d, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("split ratio must lie in (0, 1)");
  std::vector<Index> perm(static_cast<std::size_t>(d.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(derive_seed(seed, "split"));
  // Explicit Fisher-Yates so the permutation does not depend on the
  // standard library's shuffle.
  for (std::size_t i = perm.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(d.size())));
  Split out;
  out.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  out.train = d.rows(out.train_rows);
  out.test = d.rows(out.test_rows);
  return out;
}

std::string PredictorSpec::name() const {
  switch (kind) {
    case PredictorKind::lin: return "lin";
    case PredictorKind::lins: return "lins";
    case PredictorKind::knn: return k == 5 ? "knn" : "knn=" + std::to_string(k);
  }
  return "unknown";
}

PredictorSpec parse_predictor(const std::string& s) {
  if (s == "lin") return {PredictorKind::lin, 5};
  if (s == "lins") return {PredictorKind::lins, 5};
  if (s == "knn") return {PredictorKind::knn, 5};
  if (s.rfind("knn=", 0) == 0) {
    try {
      std::size_t used = 0;
      const long long k = std::stoll(s.substr(4), &used);
      if (used == s.size() - 4 && k >= 1) return {PredictorKind::knn, static_cast<Index>(k)};
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument("unknown model '" + s + "'");
}

Matrix design_matrix(PredictorKind kind, const RegressionDataset& d,
                     const std::vector<Index>& sector_columns) {
  const Index extra = kind == PredictorKind::lins ? static_cast<Index>(sector_columns.size()) : 0;
  Matrix x(d.size(), 4 + extra);
  x.col(0).setOnes();
  x.middleCols(1, 3) = esg_parts(d);
  for (Index c = 0; c < extra; ++c) {
    const Index s = sector_columns[static_cast<std::size_t>(c)];
    for (Index i = 0; i < d.size(); ++i) {
      x(i, 4 + c) = d.sector[static_cast<std::size_t>(i)] == s ? 1.0 : 0.0;
    }
  }
  return x;
}

Matrix ols_fit(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw ShapeMismatch("ols: row counts differ");
  if (x.rows() < x.cols()) throw RankDeficient("ols: fewer rows than coefficients");
  const Matrix gram = x.transpose() * x;
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(ev(0) > 1e-10 * ev(ev.size() - 1))) {
    throw RankDeficient("ols: normal equations are singular");
  }
  return x.colPivHouseholderQr().solve(y);
}

Matrix fit_predict(const PredictorSpec& spec, const RegressionDataset& train,
                   const RegressionDataset& test) {
  train.validate();
  test.validate();
  if (spec.kind == PredictorKind::knn) return knn_predict(spec.k, train, test);
  const std::vector<Index> cols =
      spec.kind == PredictorKind::lins ? present_sectors(train) : std::vector<Index>{};
  const Matrix coef = ols_fit(design_matrix(spec.kind, train, cols), train.responses);
  return design_matrix(spec.kind, test, cols) * coef;
}

double rmse(const Matrix& pred, const Matrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw ShapeMismatch("rmse: prediction is " + std::to_string(pred.rows()) + "x" +
                        std::to_string(pred.cols()) + ", truth is " +
                        std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  }
  if (pred.size() == 0) throw ShapeMismatch("rmse: empty input");
  return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

WhitenedScores whitened_scores(const Matrix& pred, const Matrix& truth) {
  if (pred.cols() != truth.cols()) throw ShapeMismatch("whitened_scores: column counts differ");
  const EmpiricalMeasure p(pred);
  const EmpiricalMeasure t(truth);
  const GaussianMeasure gp(estimate_mean(p), estimate_covariance(p));
  const GaussianMeasure gt(estimate_mean(t), estimate_covariance(t));
  return {white_wasserstein_gaussian(gp, gt).value, gini_gaussian_upper(gp, gt).value};
}

Vector response_maxima(const Matrix& responses) {
  Vector mx = responses.colwise().maxCoeff();
  for (Index j = 0; j < mx.size(); ++j) {
    if (!(mx(j) > 0.0)) throw InvalidArgument("response column maximum must be positive");
  }
  return mx;
}

EvalReport evaluate_models(const RegressionDataset& d, const std::vector<PredictorSpec>& specs,
                           std::uint64_t split_seed, double ratio) {
  if (specs.size() < 2) throw InvalidArgument("evaluate_models needs at least two models");
  d.validate();
  const Vector mx = response_maxima(d.responses);
  const Matrix normalised = d.responses * mx.cwiseInverse().asDiagonal();
  const Split so = train_test_split(d, ratio, split_seed);
  const Split sw = train_test_split(d.with_responses(normalised), ratio, split_seed);
  EvalReport r;
  for (const PredictorSpec& spec : specs) {
    const Matrix po = fit_predict(spec, so.train, so.test);
    const Matrix pw = fit_predict(spec, sw.train, sw.test);
    r.models.push_back(score_model(spec.name(), so.test.responses, po, sw.test.responses, pw));
  }
  finish(r);
  return r;
}

EvalReport compare_predictions(const Matrix& truth, const std::vector<Matrix>& predictions,
                               const std::vector<std::string>& names) {
  if (predictions.size() != names.size()) throw InvalidArgument("one name per prediction");
  const Vector mx = response_maxima(truth);
  const auto scale = mx.cwiseInverse().asDiagonal();
  const Matrix truth_w = truth * scale;
  EvalReport r;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    r.models.push_back(
        score_model(names[k], truth, predictions[k], truth_w, predictions[k] * scale));
  }
  finish(r);
  return r;
}

FlipDemo rmse_flip_demo(std::uint64_t seed, Index n) {
  // Column 0 is five orders of magnitude larger than the others. Predictor
  // a is precise on it and sloppy elsewhere, b the reverse; raw RMSE only
  // sees column 0.
  const double scale[3] = {1e5, 1.0, 1.0};
  const double err_a[3] = {0.01, 1.0, 1.0};
  const double err_b[3] = {0.2, 0.05, 0.05};
  std::mt19937_64 rng(derive_seed(seed, "flip"));
  std::normal_distribution<double> normal(0.0, 1.0);
  FlipDemo demo{Matrix(n, 3), Matrix(n, 3), Matrix(n, 3)};
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double t = scale[j] * (10.0 + normal(rng));
      demo.truth(i, j) = t;
      demo.pred_a(i, j) = t + scale[j] * err_a[j] * normal(rng);
      demo.pred_b(i, j) = t + scale[j] * err_b[j] * normal(rng);
    }
  }
  return demo;
}

}  // namespace whitemetric
