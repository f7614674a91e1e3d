#pragma once

// Cyclic coordinate descent for
//   (2n)^{-1} ||y - X beta||^2 + lambda0 ||beta||_1 + sum_j p_lambda(|beta_j|)
// on designs whose columns have L2 norm sqrt(n).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comboreg/penalty.hpp"

namespace comboreg {

using Index = Eigen::Index;

class DegenerateColumnError : public std::invalid_argument {
 public:
  explicit DegenerateColumnError(Index column)
      : std::invalid_argument("degenerate design: column " + std::to_string(column) + " has zero norm"),
        column_(column) {}
  Index column() const { return column_; }

 private:
  Index column_;
};

/// Thrown when a full sweep increases the objective; each coordinate update is
/// a global scalar minimization, so this signals a bug.
class MonotonicityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Standardized {
  Eigen::MatrixXd X;
  Eigen::VectorXd scale;  // X_out = X_in * diag(scale)
};

Standardized standardize(const Eigen::MatrixXd& X);

/// c * sqrt(log(max(n, p)) / n).
double universal_lambda0(Index n, Index p, double c);

struct RegressionProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  PenaltySpec<double> penalty;
  bool standardized = false;
  bool intercept = false;
  Eigen::VectorXd scale;         // ones unless standardized
  Eigen::RowVectorXd x_center;   // zeros unless intercept
  double y_center = 0;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }

  void validate() const;
  void require_standardized() const;

  Eigen::VectorXd to_original_scale(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd to_problem_scale(const Eigen::VectorXd& beta_original) const;
  /// Predictions on raw (uncentered, unscaled) rows.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X_raw, const Eigen::VectorXd& beta) const;
};

/// Centers (when intercept) and standardizes (when standardize) the raw inputs.
RegressionProblem make_problem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PenaltySpec<double>& penalty,
                               bool standardize_columns = true, bool intercept = false);

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 10000;
  bool random_order = false;
  std::uint64_t order_seed = 0;
};

struct FitResult {
  Eigen::VectorXd beta;
  std::vector<Index> support;
  double objective = 0;
  int iterations = 0;
  bool converged = false;
  double kkt_inf = 0;  // ||n^{-1} X^T (y - X beta)||_inf
  bool coordinatewise_global = false;
  double max_sweep_increase = 0;  // largest relative objective increase seen over a sweep
  double rss = 0;
  PenaltySpec<double> penalty;
};

struct PathResult {
  std::vector<double> lambdas;
  std::vector<FitResult> fits;
  double lambda0 = 0;
};

double combined_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PenaltySpec<double>& penalty,
                          const Eigen::VectorXd& beta);

/// ||n^{-1} X^T y||_inf: smallest lasso level with an all-zero solution.
double lambda_max(const RegressionProblem& prob);

/// Geometric grid from lambda_max down to min_ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, Index size = 50, double min_ratio = 0.01);

FitResult fit_lasso(const RegressionProblem& prob, double lambda, const SolverOptions& opts = {},
                    const std::optional<Eigen::VectorXd>& init = std::nullopt);

FitResult fit_combined(const RegressionProblem& prob, const Eigen::VectorXd& init, const SolverOptions& opts = {});

/// Runs fit_combined with an explicit penalty instead of prob.penalty.
FitResult fit_with_penalty(const RegressionProblem& prob, const PenaltySpec<double>& penalty,
                           const Eigen::VectorXd& init, const SolverOptions& opts = {});

/// Warm-started path over a strictly decreasing lambda grid with fixed lambda0.
/// The first point starts from `init` (typically a lasso fit).
PathResult fit_path(const RegressionProblem& prob, const std::vector<double>& grid, double lambda0,
                    const Eigen::VectorXd& init, const SolverOptions& opts = {});

/// Path whose first point starts from fit_lasso at `lasso_level`.
PathResult fit_path_from_lasso(const RegressionProblem& prob, const std::vector<double>& grid, double lambda0,
                               double lasso_level, const SolverOptions& opts = {});

struct Theorem3Report {
  bool sparsity_ok = false;  // ||beta||_0 <= c2 * s_hat
  bool residual_ok = false;  // kkt_inf <= kkt_constant * lambda0
  bool level_ok = false;     // lambda >= c3 * lambda0
  Index support_size = 0;
  double kkt_ratio = 0;      // kkt_inf / lambda0

  bool holds() const { return sparsity_ok && residual_ok && level_ok; }
};

Theorem3Report theorem3_certificate(const FitResult& fit, Index s_hat, double c2, double c3, double lambda0,
                                    double kkt_constant = 4.0);

/// Least squares on the given columns, zeros elsewhere. Coefficients are in
/// the problem's (standardized) coordinates.
Eigen::VectorXd refit_ls(const RegressionProblem& prob, const std::vector<Index>& support);

std::vector<Index> support_of(const Eigen::VectorXd& beta);

struct SweepStats {
  double max_relative_increase = 0;
  std::uint64_t sweeps = 0;
};

/// Process-wide record of sweep-level objective changes across every fit.
SweepStats sweep_stats();
void reset_sweep_stats();

}  // namespace comboreg
