#include "comboreg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "comboreg/rng.hpp"

namespace comboreg {

namespace {

double min_singular_scaled(const Eigen::MatrixXd& X, const std::vector<Index>& cols) {
  const Index k = static_cast<Index>(cols.size());
  if (k > X.rows()) return 0.0;
  Eigen::MatrixXd sub(X.rows(), k);
  for (Index c = 0; c < k; ++c) sub.col(c) = X.col(cols[static_cast<std::size_t>(c)]);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  return svd.singularValues()(k - 1) / std::sqrt(static_cast<double>(X.rows()));
}

Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& Sigma0) {
  if (Sigma0.rows() != Sigma0.cols()) throw std::invalid_argument("Sigma0 must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma0);
  if (llt.info() != Eigen::Success || !Sigma0.isApprox(Sigma0.transpose()))
    throw std::invalid_argument("Sigma0 is not positive definite");
  return llt;
}

}  // namespace

double prediction_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0, double sigma,
                        const Eigen::MatrixXd& Sigma0) {
  detail::require_same_length(beta_hat, beta0);
  if (Sigma0.rows() != beta0.size()) throw std::invalid_argument("prediction_error: Sigma0 dimension mismatch");
  const auto llt = checked_cholesky(Sigma0);
  const Eigen::VectorXd d = beta_hat - beta0;
  const Eigen::VectorXd Ld = llt.matrixU() * d;
  return sigma * sigma + Ld.squaredNorm();
}

SampledPredictionError prediction_error_sampled(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0,
                                                double sigma, const Eigen::MatrixXd& Sigma0, Index test_size,
                                                std::uint64_t seed) {
  detail::require_same_length(beta_hat, beta0);
  if (test_size < 2) throw std::invalid_argument("prediction_error_sampled: test_size must be >= 2");
  const auto llt = checked_cholesky(Sigma0);
  const Eigen::MatrixXd L = llt.matrixL();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const Index p = beta0.size();
  Eigen::VectorXd z(p);
  double mean = 0, m2 = 0;
  for (Index i = 0; i < test_size; ++i) {
    for (Index j = 0; j < p; ++j) z(j) = normal(rng);
    const Eigen::VectorXd x = L * z;
    const double y = x.dot(beta0) + sigma * normal(rng);
    const double e = y - x.dot(beta_hat);
    const double sq = e * e;
    const double delta = sq - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (sq - mean);
  }
  const double var = m2 / static_cast<double>(test_size - 1);
  return {mean, std::sqrt(var / static_cast<double>(test_size))};
}

std::uint64_t binomial_saturating(Index p, Index k) {
  if (k < 0 || k > p) return 0;
  k = std::min(k, p - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 acc = 1;
  for (Index i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned __int128>(p - k + i) / static_cast<unsigned __int128>(i);
    if (acc > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(acc);
}

ConditionDiagnostics sparse_eigenvalue(const Eigen::MatrixXd& X, Index k, std::uint64_t budget, Index samples,
                                       std::uint64_t seed) {
  if (k < 1) throw std::domain_error("sparse_eigenvalue: k must be >= 1");
  const Index p = X.cols();
  k = std::min(k, p);
  ConditionDiagnostics out;
  out.k = k;

  if (binomial_saturating(p, k) <= budget) {
    out.method = DiagnosticMethod::Exhaustive;
    std::vector<Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), Index{0});
    double best = std::numeric_limits<double>::infinity();
    Index visited = 0;
    while (true) {
      best = std::min(best, min_singular_scaled(X, idx));
      ++visited;
      // Next combination in lexicographic order.
      Index i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    out.kappa0_hat = best;
    out.samples = visited;
    return out;
  }

  if (samples < 1) throw std::domain_error("sparse_eigenvalue: samples must be >= 1");
  out.method = DiagnosticMethod::Sampled;
  out.samples = samples;
  std::vector<Index> pool(static_cast<std::size_t>(p));
  double best = std::numeric_limits<double>::infinity();
  for (Index s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, p - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<Index> cols(pool.begin(), pool.begin() + k);
    std::sort(cols.begin(), cols.end());
    best = std::min(best, min_singular_scaled(X, cols));
  }
  out.kappa0_hat = best;
  return out;
}

double restricted_eigenvalue_estimate(const Eigen::MatrixXd& X, Index s, double cone_factor, Index samples,
                                      std::uint64_t seed) {
  if (s < 1) throw std::domain_error("restricted_eigenvalue_estimate: s must be >= 1");
  if (samples < 1) throw std::domain_error("restricted_eigenvalue_estimate: samples must be >= 1");
  const Index p = X.cols();
  s = std::min(s, p);
  const Index rest = p - s;
  const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(X.rows()));

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd delta(p);
  std::vector<Index> order(static_cast<std::size_t>(rest));
  for (Index i = 0; i < samples; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index j = 0; j < p; ++j) delta(j) = normal(rng);
    const double head_l1 = delta.head(s).cwiseAbs().sum();
    double tail_l2_top = 0;
    if (rest > 0) {
      const double tail_l1 = delta.tail(rest).cwiseAbs().sum();
      const double u = 1.0 - unit(rng);  // (0, 1]
      if (tail_l1 > 0) delta.tail(rest) *= u * cone_factor * head_l1 / tail_l1;
      // s largest |entries| of the tail; ties go to the lower index.
      std::iota(order.begin(), order.end(), Index{0});
      const Index top = std::min(s, rest);
      std::partial_sort(order.begin(), order.begin() + top, order.end(), [&](Index a, Index b) {
        const double fa = std::abs(delta(s + a)), fb = std::abs(delta(s + b));
        return fa != fb ? fa > fb : a < b;
      });
      for (Index t = 0; t < top; ++t) {
        const double v = delta(s + order[static_cast<std::size_t>(t)]);
        tail_l2_top += v * v;
      }
      tail_l2_top = std::sqrt(tail_l2_top);
    }
    const double denom = std::max(delta.head(s).norm(), tail_l2_top);
    if (denom > 0) best = std::min(best, inv_root_n * (X * delta).norm() / denom);
  }
  return best;
}

bool noise_event_check(const Eigen::MatrixXd& X, const Eigen::VectorXd& eps, double lambda0) {
  if (X.rows() != eps.size()) throw std::invalid_argument("noise_event_check: dimension mismatch");
  const double corr = (X.transpose() * eps).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
  return corr <= lambda0 / 2;
}

double equicorr_gram_infnorm(Index s, double rho) {
  if (s < 1) throw std::domain_error("equicorr_gram_infnorm: s must be >= 1");
  if (!(rho >= 0 && rho < 1)) throw std::domain_error("equicorr_gram_infnorm: rho must lie in [0, 1)");
  const double sd = static_cast<double>(s);
  return (1.0 + rho * (sd - 2.0) / (1.0 + (sd - 1.0) * rho)) / (1.0 - rho);
}

double gram_max_eigenvalue(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd gram = X.transpose() * X / static_cast<double>(X.rows());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace comboreg
