#pragma once

// Selection and estimation diagnostics, plus design-condition audits.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace comboreg {

using Index = Eigen::Index;

struct SelectionMetrics {
  Index fs = 0;
  Index fp = 0;
  Index fn = 0;
};

namespace detail {

template <typename Scalar>
int sgn(Scalar x) {
  return (Scalar(0) < x) - (x < Scalar(0));
}

template <typename A, typename B>
void require_same_length(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("metrics: coefficient vectors differ in length");
}

}  // namespace detail

/// |{j : sgn(beta_hat_j) != sgn(beta0_j)}| with sgn(0) = 0.
template <typename A, typename B>
Index false_signs(const Eigen::MatrixBase<A>& beta_hat, const Eigen::MatrixBase<B>& beta0) {
  detail::require_same_length(beta_hat, beta0);
  Index count = 0;
  for (Index j = 0; j < beta_hat.size(); ++j) count += detail::sgn(beta_hat(j)) != detail::sgn(beta0(j));
  return count;
}

template <typename A, typename B>
std::pair<Index, Index> fp_fn(const Eigen::MatrixBase<A>& beta_hat, const Eigen::MatrixBase<B>& beta0) {
  detail::require_same_length(beta_hat, beta0);
  Index fp = 0, fn = 0;
  for (Index j = 0; j < beta_hat.size(); ++j) {
    const bool selected = beta_hat(j) != 0;
    const bool active = beta0(j) != 0;
    fp += selected && !active;
    fn += active && !selected;
  }
  return {fp, fn};
}

template <typename A, typename B>
SelectionMetrics selection_metrics(const Eigen::MatrixBase<A>& beta_hat, const Eigen::MatrixBase<B>& beta0) {
  const auto [fp, fn] = fp_fn(beta_hat, beta0);
  return {false_signs(beta_hat, beta0), fp, fn};
}

/// ||beta_hat - beta0||_q for q in [1, 2] or q = infinity.
template <typename A, typename B>
double lq_loss(const Eigen::MatrixBase<A>& beta_hat, const Eigen::MatrixBase<B>& beta0, double q) {
  detail::require_same_length(beta_hat, beta0);
  const bool inf = std::isinf(q) && q > 0;
  if (!inf && !(q >= 1 && q <= 2)) throw std::domain_error("lq_loss: q must lie in [1, 2] or be infinity");
  const Eigen::VectorXd d = (beta_hat - beta0).template cast<double>();
  if (d.size() == 0) return 0.0;
  if (inf) return d.cwiseAbs().maxCoeff();
  if (q == 1) return d.cwiseAbs().sum();
  if (q == 2) return d.norm();
  return std::pow(d.cwiseAbs().array().pow(q).sum(), 1.0 / q);
}

/// sigma^2 + (beta_hat - beta0)^T Sigma0 (beta_hat - beta0).
double prediction_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0, double sigma,
                        const Eigen::MatrixXd& Sigma0);

struct SampledPredictionError {
  double value = 0;
  double standard_error = 0;
};

/// Mean squared error on a fresh test set of rows x ~ N(0, Sigma0), Y = x^T beta0 + sigma z.
SampledPredictionError prediction_error_sampled(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0,
                                                double sigma, const Eigen::MatrixXd& Sigma0, Index test_size,
                                                std::uint64_t seed);

enum class DiagnosticMethod { Exhaustive, Sampled };

struct ConditionDiagnostics {
  double kappa0_hat = std::numeric_limits<double>::quiet_NaN();
  double kappa_re_hat = std::numeric_limits<double>::quiet_NaN();
  DiagnosticMethod method = DiagnosticMethod::Exhaustive;
  Index samples = 0;
  Index k = 0;
};

/// min over supports S with |S| = k of sigma_min(X_S) / sqrt(n). Exhaustive
/// when C(p, k) <= budget; otherwise the minimum over `samples` random
/// supports, which is an upper bound.
ConditionDiagnostics sparse_eigenvalue(const Eigen::MatrixXd& X, Index k, std::uint64_t budget,
                                       Index samples = 10000, std::uint64_t seed = 0);

/// Monte-Carlo upper bound on kappa(s, cone_factor): the running minimum of
/// n^{-1/2} ||X delta|| / max(||delta_1||, ||delta_2'||) over random cone
/// directions. Sample i draws from its own seed, so a larger budget only
/// extends the sequence.
double restricted_eigenvalue_estimate(const Eigen::MatrixXd& X, Index s, double cone_factor, Index samples,
                                      std::uint64_t seed);

/// ||n^{-1} X^T eps||_inf <= lambda0 / 2.
bool noise_event_check(const Eigen::MatrixXd& X, const Eigen::VectorXd& eps, double lambda0);

/// ||((1 - rho) I_s + rho 1 1^T)^{-1}||_inf in closed form.
double equicorr_gram_infnorm(Index s, double rho);

/// Largest eigenvalue of n^{-1} X^T X.
double gram_max_eigenvalue(const Eigen::MatrixXd& X);

/// C(p, k), saturating at uint64 max.
std::uint64_t binomial_saturating(Index p, Index k);

}  // namespace comboreg
