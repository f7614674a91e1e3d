#include "comboreg/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace comboreg {

namespace {

constexpr double kRssFloor = 1e-300;

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& y, const std::vector<Index>& rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = y(rows[i]);
  return out;
}

}  // namespace

double bic_value(double rss, Index n, Index df) {
  const double nd = static_cast<double>(n);
  return nd * std::log(std::max(rss / nd, kRssFloor)) + static_cast<double>(df) * std::log(nd);
}

SelectionResult bic_select(const PathResult& path, const RegressionProblem& prob) {
  if (path.fits.empty()) throw std::invalid_argument("bic_select: empty path");
  SelectionResult sel;
  sel.criterion = Criterion::Bic;
  sel.criterion_values.reserve(path.fits.size());
  for (const auto& fit : path.fits) {
    sel.rss_floored.push_back(fit.rss / static_cast<double>(prob.n()) < kRssFloor);
    sel.criterion_values.push_back(bic_value(fit.rss, prob.n(), static_cast<Index>(fit.support.size())));
  }
  for (std::size_t k = 1; k < sel.criterion_values.size(); ++k)
    if (sel.criterion_values[k] < sel.criterion_values[static_cast<std::size_t>(sel.chosen_index)])
      sel.chosen_index = static_cast<Index>(k);
  return sel;
}

std::vector<int> make_folds(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cv: folds must be >= 2");
  if (n < folds) throw std::invalid_argument("cv: need at least as many observations as folds");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < perm.size(); ++k) ids[static_cast<std::size_t>(perm[k])] = static_cast<int>(k % folds);
  return ids;
}

SelectionResult cv_select_with_folds(const RegressionProblem& prob, const std::vector<double>& grid,
                                     const std::vector<int>& fold_ids, const CvOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("cv: empty lambda grid");
  if (static_cast<Index>(fold_ids.size()) != prob.n()) throw std::invalid_argument("cv: fold ids do not match rows");
  const int folds = fold_ids.empty() ? 0 : *std::max_element(fold_ids.begin(), fold_ids.end()) + 1;
  if (folds < 2) throw std::invalid_argument("cv: folds must be >= 2");

  SelectionResult sel;
  sel.criterion = Criterion::Cv;
  sel.cv_folds = folds;
  std::vector<double> sse(grid.size(), 0.0);
  Index held_out = 0;

  for (int k = 0; k < folds; ++k) {
    std::vector<Index> train, test;
    for (Index i = 0; i < prob.n(); ++i) (fold_ids[static_cast<std::size_t>(i)] == k ? test : train).push_back(i);
    if (test.empty() || train.empty()) {
      ++sel.skipped_folds;
      continue;
    }
    RegressionProblem sub;
    try {
      sub = make_problem(take_rows(prob.X, train), take_rows(prob.y, train), prob.penalty, true, prob.intercept);
    } catch (const DegenerateColumnError&) {
      ++sel.skipped_folds;
      continue;
    }
    const PathResult path = fit_path(sub, grid, opts.lambda0, Eigen::VectorXd::Zero(sub.p()), opts.solver);
    const Eigen::MatrixXd X_test = take_rows(prob.X, test);
    const Eigen::VectorXd y_test = take_rows(prob.y, test);
    for (std::size_t g = 0; g < grid.size(); ++g)
      sse[g] += (y_test - sub.predict(X_test, path.fits[g].beta)).squaredNorm();
    held_out += static_cast<Index>(test.size());
  }
  if (held_out == 0) throw std::runtime_error("cv: every fold was degenerate");

  sel.criterion_values.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) sel.criterion_values[g] = sse[g] / static_cast<double>(held_out);
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (sel.criterion_values[g] < sel.criterion_values[static_cast<std::size_t>(sel.chosen_index)])
      sel.chosen_index = static_cast<Index>(g);
  return sel;
}

SelectionResult cv_select(const RegressionProblem& prob, const std::vector<double>& grid, int folds,
                          std::uint64_t seed, const CvOptions& opts) {
  return cv_select_with_folds(prob, grid, make_folds(prob.n(), folds, seed), opts);
}

LassoInit lasso_initializer(const RegressionProblem& prob, const TuningOptions& opts) {
  LassoInit init;
  const double lmax = lambda_max(prob);
  if (opts.lasso_level) {
    init.level = *opts.lasso_level;
  } else if (lmax > 0) {
    RegressionProblem lasso = prob;
    lasso.penalty = PenaltySpec<double>::make(PenaltyKind::L1, 0.0, 0.0);
    const auto grid = lambda_grid(lmax, opts.grid_size, opts.min_ratio);
    CvOptions cv_opts;
    cv_opts.solver = opts.solver;
    init.cv = cv_select(lasso, grid, opts.folds, opts.seed, cv_opts);
    init.level = grid[static_cast<std::size_t>(init.cv->chosen_index)];
  }
  if (init.level > 0) {
    init.fit = fit_lasso(prob, init.level, opts.solver);
  } else {
    init.fit = fit_lasso(prob, std::max(lmax, 1.0), opts.solver);
  }
  const double dof = std::max<double>(static_cast<double>(prob.n()) - static_cast<double>(init.fit.support.size()), 1.0);
  init.sigma_hat = std::sqrt(init.fit.rss / dof);
  return init;
}

std::vector<double> lambda0_candidates(const RegressionProblem& prob, const TuningOptions& opts, double sigma_hat) {
  if (opts.fixed_lambda0) return {*opts.fixed_lambda0};
  const Index p_eff = std::max<Index>(prob.p(), 2);
  if (opts.fixed_c) return {universal_lambda0(prob.n(), p_eff, *opts.fixed_c)};
  const double unit = universal_lambda0(prob.n(), p_eff, 1.0);
  std::vector<double> out;
  for (double m : opts.c_multipliers) out.push_back(m * sigma_hat * unit);
  return out;
}

namespace {

struct Candidate {
  std::size_t path;
  Index grid;
};

TunedFit select_by_bic(const RegressionProblem& prob, std::vector<PathResult> paths, LassoInit init) {
  TunedFit out;
  out.init = std::move(init);
  bool have = false;
  double best_bic = 0;
  Candidate best{0, 0};
  for (std::size_t q = 0; q < paths.size(); ++q) {
    for (std::size_t g = 0; g < paths[q].fits.size(); ++g) {
      const FitResult& f = paths[q].fits[g];
      const double b = bic_value(f.rss, prob.n(), static_cast<Index>(f.support.size()));
      out.bic.push_back(b);
      bool better = !have || b < best_bic;
      if (have && b == best_bic) {
        const FitResult& cur = paths[best.path].fits[static_cast<std::size_t>(best.grid)];
        if (f.support.size() != cur.support.size()) {
          better = f.support.size() < cur.support.size();
        } else {
          better = paths[q].lambdas[g] > paths[best.path].lambdas[static_cast<std::size_t>(best.grid)];
        }
      }
      if (better) {
        have = true;
        best_bic = b;
        best = {q, static_cast<Index>(g)};
      }
    }
  }
  out.path_index = best.path;
  out.grid_index = best.grid;
  out.fit = paths[best.path].fits[static_cast<std::size_t>(best.grid)];
  out.lambda = paths[best.path].lambdas[static_cast<std::size_t>(best.grid)];
  out.lambda0 = paths[best.path].lambda0;
  out.paths = std::move(paths);
  return out;
}

}  // namespace

TunedFit tune_combined(const RegressionProblem& prob, const TuningOptions& opts) {
  return tune_combined(prob, opts, lasso_initializer(prob, opts));
}

TunedFit tune_combined(const RegressionProblem& prob, const TuningOptions& opts, const LassoInit& init) {
  const double lmax = lambda_max(prob);
  const auto grid = lambda_grid(lmax > 0 ? lmax : 1.0, opts.grid_size, opts.min_ratio);
  std::vector<PathResult> paths;
  for (double l0 : lambda0_candidates(prob, opts, init.sigma_hat))
    paths.push_back(fit_path(prob, grid, l0, init.fit.beta, opts.solver));
  return select_by_bic(prob, std::move(paths), init);
}

TunedFit tune_lasso_bic(const RegressionProblem& prob, const TuningOptions& opts) {
  RegressionProblem lasso = prob;
  lasso.penalty = PenaltySpec<double>::make(PenaltyKind::L1, 0.0, 0.0);
  const double lmax = lambda_max(prob);
  const auto grid = lambda_grid(lmax > 0 ? lmax : 1.0, opts.grid_size, opts.min_ratio);
  std::vector<PathResult> paths;
  paths.push_back(fit_path(lasso, grid, 0.0, Eigen::VectorXd::Zero(prob.p()), opts.solver));
  return select_by_bic(prob, std::move(paths), LassoInit{});
}

}  // namespace comboreg
