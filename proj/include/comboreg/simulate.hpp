#pragma once

// Monte-Carlo study: AR(1) Gaussian designs, sparse linear responses, and
// per-method accuracy and selection summaries.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "comboreg/tuning.hpp"

namespace comboreg {

enum class Method { Lasso, L1Scad, L1Hard, L1Sica, L1Mcp, Oracle };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

enum class Metric { PE, L2, L1, Linf, FP, FN, FS };
inline constexpr std::array<Metric, 7> kAllMetrics{Metric::PE, Metric::L2, Metric::L1, Metric::Linf,
                                                   Metric::FP, Metric::FN, Metric::FS};
std::string_view to_string(Metric m);

struct TestMode {
  bool sampled = false;
  Index size = 10000;
};

/// (1, -0.5, 0.7, -1.2, -0.9, 0.3, 0.55, 0, ..., 0) of length p.
Eigen::VectorXd table1_beta0(Index p);

struct SimConfig {
  Index n = 80;
  Index p = 200;
  Eigen::VectorXd beta0 = table1_beta0(200);
  double rho = 0.5;
  double sigma = 0.25;
  Index reps = 20;
  std::uint64_t seed = 20130101;
  std::vector<Method> methods{Method::Lasso, Method::L1Scad, Method::L1Hard, Method::L1Sica, Method::Oracle};
  TestMode test_mode;
  TuningOptions tuning;
  /// c for the noise event ||n^{-1} X^T eps||_inf <= lambda0 / 2; negative means 2 sigma.
  double noise_c = -1;
  /// Shape overrides; zero keeps the penalty default.
  double scad_shape = 0, mcp_shape = 0, sica_shape = 0;
  int threads = 1;

  void validate() const;
};

/// Rows i.i.d. N(0, Sigma0) with Sigma0 = (rho^{|i-j|}), via the AR(1) recursion.
Eigen::MatrixXd gen_design(Index n, Index p, double rho, std::uint64_t seed);
Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta0, double sigma, std::uint64_t seed);
Eigen::MatrixXd ar1_covariance(Index p, double rho);

std::uint64_t replicate_seed(std::uint64_t seed, Index replicate);

struct ReplicateRow {
  Index replicate = 0;
  Method method = Method::Oracle;
  std::array<double, 7> metric{};  // indexed by Metric
  Index support_size = 0;
  double lambda = 0;
  double lambda0 = 0;
  double kkt_inf = 0;
  bool converged = true;
  bool cert_sparsity = true;
  bool cert_residual = true;
  bool noise_event = false;
  bool exact_support = false;

  double get(Metric m) const { return metric[static_cast<std::size_t>(m)]; }
};

struct MetricSummary {
  double mean = 0;
  double se = 0;
};

struct MethodSummary {
  Method method;
  std::array<MetricSummary, 7> metric{};
  const MetricSummary& get(Metric m) const { return metric[static_cast<std::size_t>(m)]; }
};

struct StudyReport {
  std::vector<MethodSummary> methods;
  double noise_event_frequency = 0;
  std::vector<ReplicateRow> rows;  // replicate-major, methods in config order

  const MethodSummary& summary(Method m) const;
};

/// Data for one replicate, as the study generates it.
struct ReplicateData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd eps;
};
ReplicateData gen_replicate(const SimConfig& cfg, Index replicate);

struct MethodFit {
  Eigen::VectorXd beta;  // original scale
  FitResult fit;         // problem (standardized) scale
  double lambda = 0;
  double lambda0 = 0;
};

PenaltySpec<double> method_penalty(const SimConfig& cfg, Method m);

/// Fits one method on a standardized problem. Combined methods reuse `init`.
MethodFit fit_method(const SimConfig& cfg, Method m, const RegressionProblem& prob, const LassoInit& init,
                     const Eigen::VectorXd& beta0);

std::vector<ReplicateRow> run_replicate(const SimConfig& cfg, Index replicate);

/// Replicates run on cfg.threads workers; output does not depend on the thread count.
StudyReport run_study(const SimConfig& cfg);

StudyReport summarize(const SimConfig& cfg, std::vector<ReplicateRow> rows);

/// CSV: method,metric,mean,se (17 significant digits).
void write_report_csv(std::ostream& os, const StudyReport& report);
/// CSV: one row per replicate x method (column list in raw_csv_header()).
void write_raw_csv(std::ostream& os, const StudyReport& report);
std::string raw_csv_header();
/// Human-readable table with means and standard errors in parentheses.
void write_table(std::ostream& os, const StudyReport& report);

}  // namespace comboreg
