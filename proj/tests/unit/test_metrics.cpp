#include <bit>
#include <cmath>
#include <limits>

#include "doctest.h"

#include "comboreg/metrics.hpp"
#include "comboreg/simulate.hpp"
#include "support/fixtures.hpp"

using namespace comboreg;
using comboreg::testing::gaussian_matrix;
using comboreg::testing::gaussian_vector;
using comboreg::testing::hadamard;

namespace {

double sparse_eig_by_bitmask(const Eigen::MatrixXd& X, int k) {
  const int p = static_cast<int>(X.cols());
  const double n = static_cast<double>(X.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    if (std::popcount(mask) != k) continue;
    Eigen::MatrixXd sub(X.rows(), k);
    for (int j = 0, c = 0; j < p; ++j)
      if (mask & (1u << j)) sub.col(c++) = X.col(j);
    const Eigen::MatrixXd gram = sub.transpose() * sub / n;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    best = std::min(best, std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0)));
  }
  return best;
}

Eigen::MatrixXd equicorr(Index s, double rho) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Constant(s, s, rho);
  M.diagonal().setOnes();
  return M;
}

}  // namespace

TEST_CASE("sign and support counts") {
  Eigen::VectorXd b0(7);
  b0 << 1, -0.5, 0.7, -1.2, -0.9, 0.3, 0.55;
  CHECK(false_signs(b0, b0) == 0);
  CHECK(false_signs(Eigen::VectorXd::Zero(7), b0) == 7);
  Eigen::Vector3d a(1, -1, 0), b(1, 1, 0);
  CHECK(false_signs(a, b) == 1);
  CHECK(fp_fn(b0, b0) == std::pair<Index, Index>{0, 0});

  Eigen::VectorXd big = table1_beta0(20), noisy = big;
  noisy(10) = 0.1;
  noisy(11) = -0.2;
  noisy(15) = 0.3;
  CHECK(fp_fn(noisy, big) == std::pair<Index, Index>{3, 0});
  noisy(5) = 0;
  const auto m = selection_metrics(noisy, big);
  CHECK(m.fp == 3);
  CHECK(m.fn == 1);
  CHECK(m.fs == 4);
  CHECK_THROWS_AS(false_signs(a, b0), std::invalid_argument);
  CHECK_THROWS_AS(fp_fn(a, b0), std::invalid_argument);
}

TEST_CASE("false signs agree with a naive loop") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> tri(-1, 1);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd x(9), y(9);
    for (int j = 0; j < 9; ++j) {
      x(j) = 0.5 * tri(rng);
      y(j) = 0.25 * tri(rng);
    }
    Index naive = 0;
    for (int j = 0; j < 9; ++j) {
      const int sx = x(j) > 0 ? 1 : (x(j) < 0 ? -1 : 0);
      const int sy = y(j) > 0 ? 1 : (y(j) < 0 ? -1 : 0);
      naive += sx != sy;
    }
    CHECK(false_signs(x, y) == naive);
    CHECK((false_signs(x, y) == 0) == (x.array().sign() == y.array().sign()).all());
  }
}

TEST_CASE("lq losses") {
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd e1 = z;
  e1(0) = 1;
  for (double q : {1.0, 1.5, 2.0, std::numeric_limits<double>::infinity()}) {
    CHECK(lq_loss(z, z, q) == 0.0);
    CHECK(lq_loss(e1, z, q) == doctest::Approx(1.0));
  }
  Eigen::VectorXd d = z;
  d(0) = 3;
  d(1) = -4;
  CHECK(lq_loss(d, z, 2.0) == doctest::Approx(5.0));
  CHECK(lq_loss(d, z, 1.0) == doctest::Approx(7.0));
  CHECK(lq_loss(d, z, std::numeric_limits<double>::infinity()) == doctest::Approx(4.0));
  CHECK(lq_loss(d, z, 1.5) == doctest::Approx(std::pow(std::pow(3.0, 1.5) + std::pow(4.0, 1.5), 1 / 1.5)));
  CHECK_THROWS_AS(lq_loss(d, z, 0.5), std::domain_error);
  CHECK_THROWS_AS(lq_loss(d, z, 3.0), std::domain_error);
}

TEST_CASE("analytic prediction error") {
  const Eigen::VectorXd b0 = table1_beta0(12);
  const Eigen::MatrixXd S = ar1_covariance(12, 0.5);
  CHECK(prediction_error(b0, b0, 0.25, S) == 0.0625);
  CHECK(prediction_error(b0, b0, 0.0, S) == 0.0);
  Eigen::VectorXd b = b0;
  b(3) += 0.2;
  b(8) = -0.1;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(12, 12);
  CHECK(prediction_error(b, b0, 0.25, I) - 0.0625 == doctest::Approx((b - b0).squaredNorm()));
  CHECK(prediction_error(b, b0, 0.25, S) == doctest::Approx(0.0625 + (b - b0).dot(S * (b - b0))));
  Eigen::MatrixXd bad = -I;
  CHECK_THROWS(prediction_error(b, b0, 0.25, bad));
  CHECK_THROWS(prediction_error(b, b0, 0.25, Eigen::MatrixXd::Identity(5, 5)));
}

TEST_CASE("sampled prediction error agrees with the analytic value") {
  const Eigen::VectorXd b0 = table1_beta0(30);
  Eigen::VectorXd b = b0;
  b(0) = 0.7;
  b(20) = 0.15;
  const Eigen::MatrixXd S = ar1_covariance(30, 0.5);
  const double exact = prediction_error(b, b0, 0.25, S);
  const auto est = prediction_error_sampled(b, b0, 0.25, S, 10000, 2026);
  CHECK(est.standard_error > 0);
  CHECK(std::abs(est.value - exact) <= 3 * est.standard_error);
  const auto again = prediction_error_sampled(b, b0, 0.25, S, 10000, 2026);
  CHECK(again.value == est.value);
}

TEST_CASE("sparse eigenvalue") {
  const Eigen::MatrixXd H = hadamard(8);
  for (Index k = 1; k <= 8; ++k) CHECK(sparse_eigenvalue(H, k, 1000).kappa0_hat == doctest::Approx(1.0));

  Eigen::MatrixXd dup = gaussian_matrix(15, 6, 4);
  dup.col(4) = dup.col(1);
  CHECK(sparse_eigenvalue(dup, 2, 1000).kappa0_hat == doctest::Approx(0.0).scale(1.0));

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Eigen::MatrixXd X = gaussian_matrix(10, 12, 50 + seed);
    for (int k : {1, 2, 3, 4}) {
      const auto d = sparse_eigenvalue(X, k, 1u << 20);
      CHECK(d.method == DiagnosticMethod::Exhaustive);
      CHECK(d.samples == static_cast<Index>(binomial_saturating(12, k)));
      CHECK(d.kappa0_hat == doctest::Approx(sparse_eig_by_bitmask(X, k)).epsilon(1e-10));
    }
  }
}

TEST_CASE("sampled sparse eigenvalue bounds the exhaustive one from above") {
  const Eigen::MatrixXd X = gaussian_matrix(20, 40, 8);
  const auto exact = sparse_eigenvalue(X, 4, 1u << 20);
  REQUIRE(exact.method == DiagnosticMethod::Exhaustive);
  const auto sampled = sparse_eigenvalue(X, 4, 10, 10000, 1);
  CHECK(sampled.method == DiagnosticMethod::Sampled);
  CHECK(sampled.samples == 10000);
  CHECK(sampled.kappa0_hat >= exact.kappa0_hat);
  CHECK(sparse_eigenvalue(X, 4, 10, 10000, 1).kappa0_hat == sampled.kappa0_hat);
  CHECK(sparse_eigenvalue(X, 25, 0, 10, 1).kappa0_hat == 0.0);
  CHECK_THROWS(sparse_eigenvalue(X, 0, 10));
}

TEST_CASE("binomial coefficients saturate") {
  CHECK(binomial_saturating(12, 4) == 495);
  CHECK(binomial_saturating(5, 0) == 1);
  CHECK(binomial_saturating(5, 6) == 0);
  CHECK(binomial_saturating(1000, 500) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("restricted eigenvalue estimate") {
  const Index n = 16;
  const Eigen::MatrixXd I = std::sqrt(double(n)) * Eigen::MatrixXd::Identity(n, n);
  for (Index s : {1, 3, 5}) CHECK(restricted_eigenvalue_estimate(I, s, 7.0, 500, 9) >= 1.0 - 1e-12);

  const Eigen::MatrixXd X = gaussian_matrix(40, 80, 10);
  const double one = restricted_eigenvalue_estimate(X, 4, 7.0, 1, 3);
  const double ten = restricted_eigenvalue_estimate(X, 4, 7.0, 10, 3);
  const double many = restricted_eigenvalue_estimate(X, 4, 7.0, 1000, 3);
  CHECK(std::isfinite(one));
  CHECK(ten <= one);
  CHECK(many <= ten);
  CHECK(many > 0);
  CHECK(restricted_eigenvalue_estimate(X, 4, 7.0, 1000, 3) == many);
  CHECK_THROWS(restricted_eigenvalue_estimate(X, 0, 7.0, 10, 3));
  CHECK_THROWS(restricted_eigenvalue_estimate(X, 2, 7.0, 0, 3));
}

TEST_CASE("noise event") {
  const Eigen::MatrixXd X = gaussian_matrix(30, 10, 2);
  CHECK(noise_event_check(X, Eigen::VectorXd::Zero(30), 0.0));
  const Eigen::VectorXd eps = gaussian_vector(30, 3);
  CHECK_FALSE(noise_event_check(X, eps, 0.0));
  const double corr = (X.transpose() * eps).cwiseAbs().maxCoeff() / 30.0;
  CHECK(noise_event_check(X, eps, 2 * corr));
  CHECK_FALSE(noise_event_check(X, eps, 2 * corr * (1 - 1e-9)));
  CHECK_THROWS(noise_event_check(X, Eigen::VectorXd::Zero(5), 1.0));
}

TEST_CASE("equicorrelation inverse norm") {
  CHECK(equicorr_gram_infnorm(7, 0.0) == 1.0);
  CHECK(equicorr_gram_infnorm(2, 0.5) == doctest::Approx(2.0));
  CHECK(equicorr_gram_infnorm(10, 0.5) == doctest::Approx(2.0 * (1 + 4 / 5.5)));
  for (Index s = 1; s <= 50; ++s) {
    for (int r = 0; r <= 9; ++r) {
      const double rho = 0.1 * r;
      const Eigen::MatrixXd inv = equicorr(s, rho).inverse();
      const double direct = inv.cwiseAbs().rowwise().sum().maxCoeff();
      CHECK(std::abs(equicorr_gram_infnorm(s, rho) - direct) <= 1e-10);
      CHECK(equicorr_gram_infnorm(s, rho) <= 2 / (1 - rho) + 1e-12);
    }
  }
  CHECK_THROWS(equicorr_gram_infnorm(0, 0.5));
  CHECK_THROWS(equicorr_gram_infnorm(3, 1.0));
  CHECK_THROWS(equicorr_gram_infnorm(3, -0.1));
}

TEST_CASE("largest gram eigenvalue") {
  CHECK(gram_max_eigenvalue(hadamard(16)) == doctest::Approx(1.0));
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10, 4);
  CHECK(gram_max_eigenvalue(X) == doctest::Approx(4.0));
}
