#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "comboreg/io.hpp"
#include "comboreg/metrics.hpp"
#include "comboreg/simulate.hpp"
#include "comboreg/solver.hpp"
#include "comboreg/tuning.hpp"

namespace comboreg::cli {

namespace {

struct PenaltyFlags {
  std::string kind = "hard";
  std::optional<double> lambda;
  std::optional<double> lambda0;
  std::optional<double> c;
  std::optional<double> shape;
  double tol = 1e-7;
  int max_iter = 10000;
  bool intercept = false;
  bool no_standardize = false;

  void attach(CLI::App& cmd) {
    cmd.add_option("--penalty", kind, "Concave penalty: l1, hard, scad, mcp, sica")
        ->check(CLI::IsMember({"l1", "hard", "scad", "mcp", "sica"}));
    cmd.add_option("--lambda", lambda, "Concave-component level lambda");
    cmd.add_option("--lambda0", lambda0, "L1-component level (overrides --c)");
    cmd.add_option("--c", c, "Universal constant: lambda0 = c * sqrt(log(max(n,p)) / n)");
    cmd.add_option("--shape", shape, "Shape parameter a (SCAD 3.7, MCP 3, SICA 0.1 by default)");
    cmd.add_option("--tol", tol, "Convergence tolerance on the largest coordinate change");
    cmd.add_option("--max-iter", max_iter, "Maximum coordinate sweeps");
    cmd.add_flag("--intercept", intercept, "Center the response and columns before fitting");
    cmd.add_flag("--no-standardize", no_standardize, "Use the design as given (columns must have norm sqrt(n))");
  }

  SolverOptions solver() const {
    SolverOptions s;
    s.tol = tol;
    s.max_iter = max_iter;
    return s;
  }

  double resolve_lambda0(Index n, Index p) const {
    if (lambda0) return *lambda0;
    return universal_lambda0(n, p, c.value_or(1.0));
  }

  PenaltySpec<double> penalty(double lam, double l0) const {
    return PenaltySpec<double>::make(parse_penalty_kind(kind), lam, l0, shape);
  }
};

struct Inputs {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Inputs load_inputs(const std::string& design, const std::string& response) {
  Inputs in;
  in.X = read_csv(design).values;
  in.y = read_vector_csv(response);
  if (in.X.rows() == 0 || in.X.cols() == 0) throw std::invalid_argument("design has no data rows");
  if (in.y.size() != in.X.rows())
    throw std::invalid_argument("response has " + std::to_string(in.y.size()) + " rows but design has " +
                                std::to_string(in.X.rows()));
  return in;
}

std::string join_support(const std::vector<Index>& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? ";" : "") + std::to_string(s[k]);
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot write '" + path + "'");
  return os;
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
  std::string design, response, out = "fit.csv";
  PenaltyFlags pen;
  std::optional<double> lasso_level;
  std::optional<Index> s_hat;
  double c2 = 3, c3 = 1, kkt_constant = 4;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Inputs in = load_inputs(a.design, a.response);
  if (!a.pen.lambda) throw std::invalid_argument("fit requires --lambda");
  const double l0 = a.pen.resolve_lambda0(in.X.rows(), in.X.cols());
  const RegressionProblem prob =
      make_problem(in.X, in.y, a.pen.penalty(*a.pen.lambda, l0), !a.pen.no_standardize, a.pen.intercept);
  const SolverOptions opts = a.pen.solver();

  Eigen::VectorXd init = Eigen::VectorXd::Zero(prob.p());
  if (a.lasso_level) init = fit_lasso(prob, *a.lasso_level, opts).beta;
  const FitResult fit = fit_combined(prob, init, opts);
  const Eigen::VectorXd beta = prob.to_original_scale(fit.beta);

  auto os = open_output(a.out);
  os << "index,beta,beta_standardized,in_support\n";
  for (Index j = 0; j < prob.p(); ++j)
    os << j << ',' << format_double(beta(j)) << ',' << format_double(fit.beta(j)) << ',' << (fit.beta(j) != 0)
       << '\n';

  const Index s_hat = a.s_hat.value_or(static_cast<Index>(fit.support.size()));
  const Theorem3Report cert = theorem3_certificate(fit, s_hat, a.c2, a.c3, l0, a.kkt_constant);
  out << "penalty=" << to_string(prob.penalty.kind) << '\n'
      << "lambda=" << format_double(prob.penalty.lambda) << '\n'
      << "lambda0=" << format_double(l0) << '\n'
      << "objective=" << format_double(fit.objective) << '\n'
      << "rss=" << format_double(fit.rss) << '\n'
      << "kkt_inf=" << format_double(fit.kkt_inf) << '\n'
      << "iterations=" << fit.iterations << '\n'
      << "converged=" << fit.converged << '\n'
      << "coordinatewise_global=" << fit.coordinatewise_global << '\n'
      << "support_size=" << fit.support.size() << '\n'
      << "support=" << join_support(fit.support) << '\n'
      << "cert_sparsity=" << cert.sparsity_ok << '\n'
      << "cert_residual=" << cert.residual_ok << '\n'
      << "cert_level=" << cert.level_ok << '\n';
  return fit.converged ? kOk : kNotConverged;
}

// ---- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string design, response, coefficients;
  PenaltyFlags pen;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const Inputs in = load_inputs(a.design, a.response);
  const CsvTable coef = read_csv(a.coefficients);
  const auto col = std::find(coef.header.begin(), coef.header.end(), "beta");
  Eigen::VectorXd beta;
  if (col != coef.header.end()) {
    beta = coef.values.col(std::distance(coef.header.begin(), col));
  } else if (coef.values.cols() == 1) {
    beta = coef.values.col(0);
  } else {
    throw std::invalid_argument("coefficient file needs a 'beta' column");
  }
  if (beta.size() != in.X.cols()) throw std::invalid_argument("coefficient count does not match design columns");
  if (!a.pen.lambda) throw std::invalid_argument("score requires --lambda");
  const double l0 = a.pen.resolve_lambda0(in.X.rows(), in.X.cols());
  const RegressionProblem prob =
      make_problem(in.X, in.y, a.pen.penalty(*a.pen.lambda, l0), !a.pen.no_standardize, a.pen.intercept);
  const Eigen::VectorXd b = prob.to_problem_scale(beta);
  out << "objective=" << format_double(combined_objective(prob.X, prob.y, prob.penalty, b)) << '\n';
  return kOk;
}

// ---- path ------------------------------------------------------------------

struct PathArgs {
  std::string design, response, out = "path.csv";
  PenaltyFlags pen;
  std::vector<double> lambdas;
  Index grid_size = 50;
  double min_ratio = 0.01;
  bool cv = false;
  int folds = 10;
  std::uint64_t seed = 0;
  std::optional<double> lasso_level;
};

int cmd_path(const PathArgs& a, std::ostream& out) {
  const Inputs in = load_inputs(a.design, a.response);
  const double l0 = a.pen.resolve_lambda0(in.X.rows(), in.X.cols());
  const RegressionProblem prob =
      make_problem(in.X, in.y, a.pen.penalty(0.0, l0), !a.pen.no_standardize, a.pen.intercept);
  const SolverOptions opts = a.pen.solver();

  std::vector<double> grid = a.lambdas;
  if (grid.empty()) {
    const double lmax = lambda_max(prob);
    grid = lambda_grid(lmax > 0 ? lmax : 1.0, a.grid_size, a.min_ratio);
  }
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!(grid[k] > 0) || (k > 0 && !(grid[k] < grid[k - 1])))
      throw std::invalid_argument("lambda grid must be positive and strictly decreasing");

  TuningOptions topts;
  topts.solver = opts;
  topts.folds = a.folds;
  topts.seed = a.seed;
  topts.grid_size = a.grid_size;
  topts.min_ratio = a.min_ratio;
  topts.lasso_level = a.lasso_level;
  if (!a.lasso_level && prob.n() < a.folds)
    throw std::invalid_argument("fewer observations than CV folds; pass --lasso-level or lower --folds");
  const LassoInit init = lasso_initializer(prob, topts);
  const PathResult path = fit_path(prob, grid, l0, init.fit.beta, opts);
  const SelectionResult bic = bic_select(path, prob);

  std::optional<SelectionResult> cv;
  if (a.cv) {
    CvOptions cv_opts;
    cv_opts.solver = opts;
    cv_opts.lambda0 = l0;
    cv = cv_select(prob, grid, a.folds, a.seed, cv_opts);
  }
  const Index selected = cv ? cv->chosen_index : bic.chosen_index;

  auto os = open_output(a.out);
  os << "index,lambda,lambda0,support_size,l1_norm,support,kkt_inf,objective,rss,bic,converged";
  if (cv) os << ",cv_error";
  os << ",selected\n";
  bool all_converged = true;
  for (std::size_t k = 0; k < path.fits.size(); ++k) {
    const FitResult& f = path.fits[k];
    all_converged = all_converged && f.converged;
    os << k << ',' << format_double(path.lambdas[k]) << ',' << format_double(l0) << ',' << f.support.size() << ','
       << format_double(prob.to_original_scale(f.beta).lpNorm<1>()) << ',' << join_support(f.support) << ','
       << format_double(f.kkt_inf) << ',' << format_double(f.objective) << ',' << format_double(f.rss) << ','
       << format_double(bic.criterion_values[k]) << ',' << f.converged;
    if (cv) os << ',' << format_double(cv->criterion_values[k]);
    os << ',' << (static_cast<Index>(k) == selected) << '\n';
  }
  out << "points=" << path.fits.size() << '\n'
      << "lambda0=" << format_double(l0) << '\n'
      << "selected_index=" << selected << '\n'
      << "selected_lambda=" << format_double(path.lambdas[static_cast<std::size_t>(selected)]) << '\n'
      << "criterion=" << (cv ? "cv" : "bic") << '\n';
  return all_converged ? kOk : kNotConverged;
}

// ---- study -----------------------------------------------------------------

struct StudyArgs {
  std::string config;
  std::string report = "report.csv";
  std::string raw = "raw.csv";
  std::optional<int> threads;
};

int cmd_study(const StudyArgs& a, std::ostream& out) {
  SimConfig cfg;
  cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (!a.config.empty()) cfg = sim_config_from(parse_config(std::filesystem::path(a.config)), cfg);
  if (a.threads) cfg.threads = *a.threads;
  cfg.validate();

  const StudyReport report = run_study(cfg);
  {
    auto os = open_output(a.report);
    write_report_csv(os, report);
  }
  {
    auto os = open_output(a.raw);
    write_raw_csv(os, report);
  }
  write_table(out, report);
  const bool all_converged =
      std::all_of(report.rows.begin(), report.rows.end(), [](const ReplicateRow& r) { return r.converged; });
  return all_converged ? kOk : kNotConverged;
}

// ---- audit -----------------------------------------------------------------

struct AuditArgs {
  std::string design, out = "audit.csv";
  Index s = 1;
  std::uint64_t budget = 100000;
  Index samples = 10000;
  std::uint64_t seed = 0;
  bool no_standardize = false;
};

int cmd_audit(const AuditArgs& a, std::ostream& out) {
  if (a.s < 1) throw std::invalid_argument("--s must be >= 1");
  Eigen::MatrixXd X = read_csv(a.design).values;
  if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("design has no data rows");
  if (!a.no_standardize) X = standardize(X).X;

  const ConditionDiagnostics k0 = sparse_eigenvalue(X, 2 * a.s, a.budget, a.samples, a.seed);
  const double re = restricted_eigenvalue_estimate(X, a.s, 7.0, a.samples, a.seed);
  const double phi = gram_max_eigenvalue(X);
  const char* method = k0.method == DiagnosticMethod::Exhaustive ? "exhaustive" : "sampled";

  auto os = open_output(a.out);
  os << "quantity,value,detail\n";
  os << "kappa0," << format_double(k0.kappa0_hat) << ',' << method << " k=" << k0.k << " supports=" << k0.samples
     << '\n';
  os << "kappa_re_upper," << format_double(re) << ",sampled s=" << a.s << " cone=7 samples=" << a.samples << '\n';
  os << "phi_max," << format_double(phi) << ",largest eigenvalue of X^T X / n\n";
  for (double rho : {0.0, 0.25, 0.5, 0.75, 0.9}) {
    os << "equicorr_infnorm," << format_double(equicorr_gram_infnorm(a.s, rho)) << ",s=" << a.s
       << " rho=" << rho << " bound=" << format_double(2.0 / (1.0 - rho)) << '\n';
  }
  out << "kappa0=" << format_double(k0.kappa0_hat) << " (" << method << ")\n"
      << "kappa_re_upper=" << format_double(re) << '\n'
      << "phi_max=" << format_double(phi) << '\n';
  return kOk;
}

std::string study_keys_help() {
  std::ostringstream ss;
  ss << "\nConfig keys (key = value, # comments):\n";
  for (const auto& [k, d] : study_config_keys()) ss << "  " << k << ": " << d << '\n';
  ss << "\nreport.csv columns: method,metric,mean,se\nraw.csv columns: " << raw_csv_header() << '\n';
  return ss.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse regression with combined L1 and concave penalties"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one penalized least-squares problem; writes coefficients");
  fit_cmd->add_option("design", fit.design, "Design CSV (header row, n rows x p columns)")->required();
  fit_cmd->add_option("response", fit.response, "Response CSV (header row, single column)")->required();
  fit_cmd->add_option("--out", fit.out, "Coefficient CSV: index,beta,beta_standardized,in_support");
  fit.pen.attach(*fit_cmd);
  fit_cmd->add_option("--lasso-level", fit.lasso_level, "Start from the lasso fit at this level (default: zeros)");
  fit_cmd->add_option("--s-hat", fit.s_hat, "Sparsity reference for the certificate (default: fitted support size)");
  fit_cmd->add_option("--c2", fit.c2, "Certificate sparsity constant");
  fit_cmd->add_option("--c3", fit.c3, "Certificate level constant");
  fit_cmd->add_option("--kkt-constant", fit.kkt_constant, "Certificate residual-correlation constant");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Evaluate the penalized objective of given coefficients");
  score_cmd->add_option("design", score.design)->required();
  score_cmd->add_option("response", score.response)->required();
  score_cmd->add_option("coefficients", score.coefficients, "CSV with a 'beta' column (e.g. fit output)")->required();
  score.pen.attach(*score_cmd);

  PathArgs path;
  auto* path_cmd = app.add_subcommand("path", "Warm-started path over a decreasing lambda grid");
  path_cmd->add_option("design", path.design)->required();
  path_cmd->add_option("response", path.response)->required();
  path_cmd->add_option("--out", path.out, "Path CSV");
  path.pen.attach(*path_cmd);
  path_cmd->add_option("--lambdas", path.lambdas, "Explicit strictly decreasing grid")->delimiter(',');
  path_cmd->add_option("--grid-size", path.grid_size, "Grid points from lambda_max down");
  path_cmd->add_option("--min-ratio", path.min_ratio, "Smallest grid value as a fraction of lambda_max");
  auto* bic_flag = path_cmd->add_flag("--bic", "Mark the BIC-selected row (default)");
  auto* cv_flag = path_cmd->add_flag("--cv", path.cv, "Mark the cross-validation-selected row");
  bic_flag->excludes(cv_flag);
  path_cmd->add_option("--folds", path.folds, "Cross-validation folds");
  path_cmd->add_option("--seed", path.seed, "Seed for fold assignment");
  path_cmd->add_option("--lasso-level", path.lasso_level, "Lasso initializer level (default: chosen by CV)");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("study", "Monte-Carlo study; writes report and raw CSVs");
  study_cmd->add_option("--config", study.config, "Config file with key = value lines");
  study_cmd->add_option("--report", study.report, "Aggregate CSV path");
  study_cmd->add_option("--raw", study.raw, "Per-replicate CSV path");
  study_cmd->add_option("--threads", study.threads, "Worker threads (default: available cores)")
      ->check(CLI::PositiveNumber);
  study_cmd->footer(study_keys_help());

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Sparse and restricted eigenvalue diagnostics of a design");
  audit_cmd->add_option("design", audit.design)->required();
  audit_cmd->add_option("--out", audit.out, "Audit CSV: quantity,value,detail");
  audit_cmd->add_option("--s", audit.s, "Sparsity level s");
  audit_cmd->add_option("--budget", audit.budget, "Largest number of supports enumerated exhaustively");
  audit_cmd->add_option("--samples", audit.samples, "Random draws for sampled bounds");
  audit_cmd->add_option("--seed", audit.seed, "Seed for sampled bounds");
  audit_cmd->add_flag("--no-standardize", audit.no_standardize, "Audit the design as given");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*score_cmd) return cmd_score(score, out);
    if (*path_cmd) return cmd_path(path, out);
    if (*study_cmd) return cmd_study(study, out);
    if (*audit_cmd) return cmd_audit(audit, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace comboreg::cli
