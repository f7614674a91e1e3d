#include "comboreg/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "comboreg/scalar_prox.hpp"

namespace comboreg {

namespace {

constexpr double kMonotonicityTol = 1e-12;

std::atomic<double> g_max_increase{0.0};
std::atomic<std::uint64_t> g_sweeps{0};

void record_sweep(double rel_increase) {
  g_sweeps.fetch_add(1, std::memory_order_relaxed);
  double cur = g_max_increase.load(std::memory_order_relaxed);
  while (rel_increase > cur && !g_max_increase.compare_exchange_weak(cur, rel_increase)) {
  }
}

double penalty_sum(const PenaltySpec<double>& pen, const Eigen::VectorXd& beta) {
  double total = 0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double t = std::abs(beta(j));
    total += pen.lambda0 * t + penalty_value(pen, t);
  }
  return total;
}

double objective_from_residual(const Eigen::VectorXd& r, const PenaltySpec<double>& pen, const Eigen::VectorXd& beta) {
  return r.squaredNorm() / (2.0 * static_cast<double>(r.size())) + penalty_sum(pen, beta);
}

}  // namespace

Standardized standardize(const Eigen::MatrixXd& X) {
  const double root_n = std::sqrt(static_cast<double>(X.rows()));
  Standardized out{X, Eigen::VectorXd(X.cols())};
  for (Index j = 0; j < X.cols(); ++j) {
    const double norm = X.col(j).norm();
    if (!(norm > 0)) throw DegenerateColumnError(j);
    out.scale(j) = root_n / norm;
    out.X.col(j) *= out.scale(j);
  }
  return out;
}

double universal_lambda0(Index n, Index p, double c) {
  if (n < 1) throw std::domain_error("universal_lambda0: n must be >= 1");
  if (p < 2) throw std::domain_error("universal_lambda0: p must be >= 2");
  if (!(c >= 0)) throw std::domain_error("universal_lambda0: c must be >= 0");
  const double dim = static_cast<double>(std::max(n, p));
  return c * std::sqrt(std::log(dim) / static_cast<double>(n));
}

void RegressionProblem::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("problem: design must be at least 1x1");
  if (y.size() != X.rows()) throw std::invalid_argument("problem: response length does not match design rows");
  if (!X.allFinite()) throw std::invalid_argument("problem: design has non-finite entries");
  if (!y.allFinite()) throw std::invalid_argument("problem: response has non-finite entries");
  penalty.validate();
}

void RegressionProblem::require_standardized() const {
  const double root_n = std::sqrt(static_cast<double>(n()));
  for (Index j = 0; j < p(); ++j) {
    if (std::abs(X.col(j).norm() - root_n) > 1e-8 * root_n) {
      throw std::invalid_argument("problem: column " + std::to_string(j) + " is not standardized to norm sqrt(n)");
    }
  }
}

Eigen::VectorXd RegressionProblem::to_original_scale(const Eigen::VectorXd& beta) const {
  return beta.cwiseProduct(scale);
}

Eigen::VectorXd RegressionProblem::to_problem_scale(const Eigen::VectorXd& beta_original) const {
  return beta_original.cwiseQuotient(scale);
}

Eigen::VectorXd RegressionProblem::predict(const Eigen::MatrixXd& X_raw, const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd b = to_original_scale(beta);
  Eigen::VectorXd out = X_raw * b;
  out.array() += y_center - x_center.dot(b);
  return out;
}

RegressionProblem make_problem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PenaltySpec<double>& penalty,
                               bool standardize_columns, bool intercept) {
  RegressionProblem prob;
  prob.X = X;
  prob.y = y;
  prob.penalty = penalty;
  prob.intercept = intercept;
  prob.validate();
  prob.x_center = Eigen::RowVectorXd::Zero(X.cols());
  if (intercept) {
    prob.x_center = X.colwise().mean();
    prob.y_center = y.mean();
    prob.X.rowwise() -= prob.x_center;
    prob.y.array() -= prob.y_center;
  }
  prob.scale = Eigen::VectorXd::Ones(X.cols());
  if (standardize_columns) {
    Standardized s = standardize(prob.X);
    prob.X = std::move(s.X);
    prob.scale = std::move(s.scale);
    prob.standardized = true;
  }
  return prob;
}

double combined_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PenaltySpec<double>& penalty,
                          const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = y - X * beta;
  return objective_from_residual(r, penalty, beta);
}

double lambda_max(const RegressionProblem& prob) {
  return (prob.X.transpose() * prob.y).cwiseAbs().maxCoeff() / static_cast<double>(prob.n());
}

std::vector<double> lambda_grid(double lmax, Index size, double min_ratio) {
  if (size < 1) throw std::invalid_argument("lambda_grid: size must be >= 1");
  if (!(lmax > 0)) throw std::invalid_argument("lambda_grid: lambda_max must be positive");
  if (!(min_ratio > 0 && min_ratio < 1)) throw std::invalid_argument("lambda_grid: min_ratio must lie in (0, 1)");
  std::vector<double> grid(static_cast<std::size_t>(size));
  if (size == 1) {
    grid[0] = lmax;
    return grid;
  }
  const double step = std::log(min_ratio) / static_cast<double>(size - 1);
  for (Index k = 0; k < size; ++k) grid[static_cast<std::size_t>(k)] = lmax * std::exp(step * static_cast<double>(k));
  return grid;
}

std::vector<Index> support_of(const Eigen::VectorXd& beta) {
  std::vector<Index> s;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0) s.push_back(j);
  return s;
}

FitResult fit_with_penalty(const RegressionProblem& prob, const PenaltySpec<double>& pen, const Eigen::VectorXd& init,
                           const SolverOptions& opts) {
  prob.validate();
  prob.require_standardized();
  pen.validate();
  if (init.size() != prob.p()) throw std::invalid_argument("fit: init length does not match design columns");
  if (!(opts.tol > 0)) throw std::invalid_argument("fit: tol must be positive");

  const Eigen::MatrixXd& X = prob.X;
  const double inv_n = 1.0 / static_cast<double>(prob.n());
  const Index p = prob.p();

  FitResult fit;
  fit.penalty = pen;
  fit.beta = init;
  Eigen::VectorXd r = prob.y - X * fit.beta;
  double obj = objective_from_residual(r, pen, fit.beta);

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 order_rng(opts.order_seed);

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    if (opts.random_order) std::shuffle(order.begin(), order.end(), order_rng);
    double max_change = 0;
    for (Index j : order) {
      const double bj = fit.beta(j);
      const double z = X.col(j).dot(r) * inv_n + bj;
      const double nb = prox_combined(pen, z);
      const double d = nb - bj;
      if (d != 0) {
        r.noalias() -= d * X.col(j);
        fit.beta(j) = nb;
        max_change = std::max(max_change, std::abs(d));
      }
    }
    const double next = objective_from_residual(r, pen, fit.beta);
    const double rel = (next - obj) / std::max(std::abs(obj), std::numeric_limits<double>::min());
    record_sweep(rel);
    fit.max_sweep_increase = std::max(fit.max_sweep_increase, rel);
    if (rel > kMonotonicityTol) {
      std::ostringstream msg;
      msg << "internal error: coordinate sweep " << iter << " increased the objective from " << obj << " to " << next;
      throw MonotonicityError(msg.str());
    }
    obj = next;
    fit.iterations = iter;
    if (max_change < opts.tol) {
      fit.converged = true;
      break;
    }
  }

  // Verification sweep from a freshly computed residual.
  r = prob.y - X * fit.beta;
  double max_gap = 0;
  for (Index j = 0; j < p; ++j) {
    const double z = X.col(j).dot(r) * inv_n + fit.beta(j);
    max_gap = std::max(max_gap, std::abs(prox_combined(pen, z) - fit.beta(j)));
  }
  fit.coordinatewise_global = fit.converged && max_gap < opts.tol;
  fit.rss = r.squaredNorm();
  fit.objective = objective_from_residual(r, pen, fit.beta);
  fit.kkt_inf = (X.transpose() * r).cwiseAbs().maxCoeff() * inv_n;
  fit.support = support_of(fit.beta);
  return fit;
}

FitResult fit_lasso(const RegressionProblem& prob, double lambda, const SolverOptions& opts,
                    const std::optional<Eigen::VectorXd>& init) {
  const auto pen = PenaltySpec<double>::make(PenaltyKind::L1, lambda, 0.0);
  return fit_with_penalty(prob, pen, init.value_or(Eigen::VectorXd::Zero(prob.p())), opts);
}

FitResult fit_combined(const RegressionProblem& prob, const Eigen::VectorXd& init, const SolverOptions& opts) {
  return fit_with_penalty(prob, prob.penalty, init, opts);
}

PathResult fit_path(const RegressionProblem& prob, const std::vector<double>& grid, double lambda0,
                    const Eigen::VectorXd& init, const SolverOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("fit_path: empty lambda grid");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0)) throw std::invalid_argument("fit_path: lambda grid must be positive");
    if (k > 0 && !(grid[k] < grid[k - 1])) throw std::invalid_argument("fit_path: lambda grid must be strictly decreasing");
  }
  PathResult path;
  path.lambda0 = lambda0;
  path.lambdas = grid;
  path.fits.reserve(grid.size());
  const PenaltySpec<double> base = prob.penalty.with_lambda0(lambda0);
  Eigen::VectorXd warm = init;
  for (double lam : grid) {
    path.fits.push_back(fit_with_penalty(prob, base.with_lambda(lam), warm, opts));
    warm = path.fits.back().beta;
  }
  return path;
}

PathResult fit_path_from_lasso(const RegressionProblem& prob, const std::vector<double>& grid, double lambda0,
                               double lasso_level, const SolverOptions& opts) {
  const FitResult init = fit_lasso(prob, lasso_level, opts);
  return fit_path(prob, grid, lambda0, init.beta, opts);
}

Theorem3Report theorem3_certificate(const FitResult& fit, Index s_hat, double c2, double c3, double lambda0,
                                    double kkt_constant) {
  Theorem3Report rep;
  rep.support_size = static_cast<Index>(fit.support.size());
  rep.sparsity_ok = static_cast<double>(rep.support_size) <= c2 * static_cast<double>(s_hat);
  rep.residual_ok = fit.kkt_inf <= kkt_constant * lambda0;
  rep.level_ok = fit.penalty.lambda >= c3 * lambda0;
  rep.kkt_ratio = lambda0 > 0 ? fit.kkt_inf / lambda0 : std::numeric_limits<double>::infinity();
  return rep;
}

Eigen::VectorXd refit_ls(const RegressionProblem& prob, const std::vector<Index>& support) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(prob.p());
  if (support.empty()) return beta;
  if (static_cast<Index>(support.size()) > prob.n())
    throw std::invalid_argument("refit_ls: support larger than the number of observations");

  Eigen::MatrixXd sub(prob.n(), static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] < 0 || support[k] >= prob.p()) throw std::out_of_range("refit_ls: support index out of range");
    sub.col(static_cast<Index>(k)) = prob.X.col(support[k]);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) {
    std::ostringstream msg;
    msg << "refit_ls: rank-deficient support submatrix (condition number " << cond << ")";
    throw std::runtime_error(msg.str());
  }
  const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(prob.y);
  for (std::size_t k = 0; k < support.size(); ++k) beta(support[k]) = coef(static_cast<Index>(k));
  return beta;
}

SweepStats sweep_stats() {
  return {g_max_increase.load(), g_sweeps.load()};
}

void reset_sweep_stats() {
  g_max_increase.store(0.0);
  g_sweeps.store(0);
}

}  // namespace comboreg
