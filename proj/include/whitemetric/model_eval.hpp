#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "whitemetric/stats_core.hpp"

namespace whitemetric {

/// ESG-style scores, a categorical sector and three positive responses.
struct RegressionDataset {
  /// N x 4: overall ESG, E, S and G scores.
  Matrix scores;
  /// Sector index per row into `sector_names`; the first name is the
  /// regression baseline.
  std::vector<Index> sector;
  std::vector<std::string> sector_names;
  /// N x 3: total assets, shareholders' funds, turnover.
  Matrix responses;

  static const std::vector<std::string>& score_columns();
  static const std::vector<std::string>& response_columns();

  Index size() const noexcept { return responses.rows(); }
  /// N x K indicator matrix over all sector names.
  Matrix sector_indicators() const;
  RegressionDataset rows(const std::vector<Index>& idx) const;
  RegressionDataset with_responses(Matrix r) const;
  /// Throws InvalidArgument on shape or label inconsistencies.
  void validate() const;
};

/// Synthetic data calibrated to published summaries: clipped-Gaussian scores
/// whose means match (0.65, 0.76, 0.51, 0.62), sectors drawn with shares
/// (0.3305, 0.0132, 0.0518, 0.5452, 0.0593), log-normal responses whose
/// median sits far below the mean. Requires n >= 50.
RegressionDataset synth_esg_dataset(Index n, std::uint64_t seed);

/// Location of N(mu, sd) that gives mean `target` after clipping to [lo, hi].
double clipped_normal_location(double target, double sd, double lo, double hi);
double clipped_normal_mean(double mu, double sd, double lo, double hi);

struct Split {
  RegressionDataset train;
  RegressionDataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

/// floor(ratio N) rows for training after a seeded shuffle.
Split train_test_split(const RegressionDataset& d, double ratio, std::uint64_t seed);

enum class PredictorKind { lin, lins, knn };

struct PredictorSpec {
  PredictorKind kind = PredictorKind::lin;
  Index k = 5;

  std::string name() const;
};

/// "lin", "lins", "knn" or "knn=K".
PredictorSpec parse_predictor(const std::string& s);

/// lin: OLS on E, S, G with intercept. lins: adds sector indicators for the
/// sectors seen in training, baseline dropped. knn: mean response of the k
/// nearest training rows in standardized (E, S, G, sector) space, ties by
/// row order.
Matrix fit_predict(const PredictorSpec& spec, const RegressionDataset& train,
                   const RegressionDataset& test);

/// Design matrix used by the linear predictors.
Matrix design_matrix(PredictorKind kind, const RegressionDataset& d,
                     const std::vector<Index>& sector_columns);
/// Least squares coefficients; RankDeficient when the normal matrix is
/// singular beyond 1e-10 relative.
Matrix ols_fit(const Matrix& x, const Matrix& y);

double rmse(const Matrix& pred, const Matrix& truth);

struct WhitenedScores {
  double wass = 0.0;
  double gini_upper = 0.0;
};

/// Gaussian moments fitted to both samples, then the closed forms.
WhitenedScores whitened_scores(const Matrix& pred, const Matrix& truth);

struct ModelScores {
  std::string name;
  double rmse_original = 0.0;
  double rmse_normalised = 0.0;
  std::optional<WhitenedScores> whitened_original;
  std::optional<WhitenedScores> whitened_normalised;
  /// Set when the whitened scores could not be computed.
  std::string error;
};

struct EvalReport {
  std::vector<ModelScores> models;
  /// Winning model name per metric: rmse_o, rmse_w, wass, gini_upper.
  std::vector<std::pair<std::string, std::string>> winners;
  /// Largest |original - normalised| whitened score difference.
  double whitened_gap = 0.0;
  bool whitened_consistent = true;
};

inline constexpr double kNormalisationTolerance = 1e-8;

/// Pooled column maxima of the responses.
Vector response_maxima(const Matrix& responses);

/// Fit every spec on an 80/20 split, once on the original responses and once
/// after dividing each response column by its pooled maximum.
EvalReport evaluate_models(const RegressionDataset& d, const std::vector<PredictorSpec>& specs,
                           std::uint64_t split_seed, double ratio = 0.8);

/// Score given predictions against truth on both scales.
EvalReport compare_predictions(const Matrix& truth, const std::vector<Matrix>& predictions,
                               const std::vector<std::string>& names);

/// Two predictors whose RMSE order flips once columns are max-normalised.
struct FlipDemo {
  Matrix truth;
  Matrix pred_a;
  Matrix pred_b;
};
FlipDemo rmse_flip_demo(std::uint64_t seed, Index n = 200);

}  // namespace whitemetric
