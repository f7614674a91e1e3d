#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "comboreg/solver.hpp"

namespace comboreg {

enum class Criterion { Bic, Cv };

struct SelectionResult {
  Index chosen_index = 0;
  std::vector<double> criterion_values;
  Criterion criterion = Criterion::Bic;
  int cv_folds = 0;
  int skipped_folds = 0;            // CV folds dropped for a degenerate training design
  std::vector<bool> rss_floored;    // BIC only: RSS/n hit the 1e-300 floor
};

/// n log(max(RSS/n, 1e-300)) + df log n.
double bic_value(double rss, Index n, Index df);

/// Ties resolve to the earliest (largest-lambda) point.
SelectionResult bic_select(const PathResult& path, const RegressionProblem& prob);

struct CvOptions {
  SolverOptions solver;
  double lambda0 = 0;  // L1 level held fixed across the grid
};

/// Fold id for every row: a seeded shuffle dealt round-robin into `folds` groups.
std::vector<int> make_folds(Index n, int folds, std::uint64_t seed);

/// K-fold CV over a decreasing grid of lambda for the penalty kind in
/// prob.penalty. Each training split is re-standardized; held-out error is the
/// mean squared prediction error over all held-out rows.
SelectionResult cv_select(const RegressionProblem& prob, const std::vector<double>& grid, int folds,
                          std::uint64_t seed, const CvOptions& opts = {});

SelectionResult cv_select_with_folds(const RegressionProblem& prob, const std::vector<double>& grid,
                                     const std::vector<int>& fold_ids, const CvOptions& opts = {});

struct TuningOptions {
  Index grid_size = 50;
  double min_ratio = 0.01;
  int folds = 10;
  std::uint64_t seed = 0;
  SolverOptions solver;
  /// lambda0 candidates are multiplier * sigma_hat * sqrt(log(max(n,p)) / n).
  std::vector<double> c_multipliers{0.5, 1.0, 2.0};
  /// When set, lambda0 = universal_lambda0(n, p, fixed_c) and no c search.
  std::optional<double> fixed_c;
  /// When set, lambda0 is used as given.
  std::optional<double> fixed_lambda0;
  /// When set, skips CV for the lasso initializer.
  std::optional<double> lasso_level;
};

struct LassoInit {
  double level = 0;
  FitResult fit;
  double sigma_hat = 0;  // sqrt(RSS / max(n - df, 1)) of the initializer
  std::optional<SelectionResult> cv;
};

LassoInit lasso_initializer(const RegressionProblem& prob, const TuningOptions& opts);

std::vector<double> lambda0_candidates(const RegressionProblem& prob, const TuningOptions& opts, double sigma_hat);

struct TunedFit {
  FitResult fit;
  double lambda = 0;
  double lambda0 = 0;
  std::size_t path_index = 0;   // which lambda0 path
  Index grid_index = 0;         // position on that path
  std::vector<PathResult> paths;
  std::vector<double> bic;      // concatenated over paths
  LassoInit init;
};

/// Paths over the concave lambda for each lambda0 candidate, warm-started from
/// the lasso initializer; BIC picks one fit over all of them. Ties go to the
/// smaller support, then the larger lambda.
TunedFit tune_combined(const RegressionProblem& prob, const TuningOptions& opts);
TunedFit tune_combined(const RegressionProblem& prob, const TuningOptions& opts, const LassoInit& init);

/// Plain lasso path from lambda_max, selected by BIC.
TunedFit tune_lasso_bic(const RegressionProblem& prob, const TuningOptions& opts);

}  // namespace comboreg
