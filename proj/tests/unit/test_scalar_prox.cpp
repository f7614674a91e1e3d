#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"

#include "comboreg/scalar_prox.hpp"
#include "support/prox_oracle.hpp"

using namespace comboreg;
using comboreg::testing::prox_oracle;
using P = PenaltySpec<double>;

namespace {

P random_combined(std::mt19937_64& rng) {
  const PenaltyKind kinds[] = {PenaltyKind::L1, PenaltyKind::Hard, PenaltyKind::Scad, PenaltyKind::Mcp,
                               PenaltyKind::Sica};
  const PenaltyKind kind = kinds[std::uniform_int_distribution<int>(0, 4)(rng)];
  const double l0 = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
  const double lam = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
  double shape = 0;
  if (kind == PenaltyKind::Scad) shape = std::uniform_real_distribution<double>(2.1, 6.0)(rng);
  if (kind == PenaltyKind::Mcp) shape = std::uniform_real_distribution<double>(1.1, 5.0)(rng);
  if (kind == PenaltyKind::Sica) shape = std::uniform_real_distribution<double>(0.01, 2.0)(rng);
  return P::make(kind, lam, l0, shape);
}

}  // namespace

TEST_CASE("hard closed form examples") {
  const auto p = P::make(PenaltyKind::Hard, 0.5, 0.2);
  CHECK(prox_combined(p, 1.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(prox_combined(p, 0.6) == 0.0);
  CHECK(prox_combined(p, -1.0) == doctest::Approx(-0.8).epsilon(1e-15));
  // the indicator is strict
  CHECK(prox_combined(p, 0.7) == 0.0);
  CHECK(prox_combined(p, std::nextafter(0.7, 1.0)) > 0.0);
  CHECK(prox_combined(ScalarProblem<double>{1.0, p}) == prox_combined(p, 1.0));
}

TEST_CASE("oracle reproduces the fixed examples") {
  CHECK(prox_oracle(P::make(PenaltyKind::Hard, 0.5, 0.2), 1.0) == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(prox_oracle(P::make(PenaltyKind::L1, 0.0, 0.2), 0.5) == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(prox_oracle(P::make(PenaltyKind::Scad, 0.4, 0.1), 0.0) == 0.0);
  CHECK_THROWS(prox_oracle(P::make(PenaltyKind::Hard, 0.5), 1.0, 1000));
}

TEST_CASE("l1 kind is soft thresholding at lambda + lambda0") {
  const auto p = P::make(PenaltyKind::L1, 0.1, 0.2);
  CHECK(prox_combined(p, 0.5) == doctest::Approx(0.2));
  CHECK(prox_combined(p, -0.25) == 0.0);
  CHECK(soft_threshold(0.5, 0.2) == doctest::Approx(0.3));
  CHECK(soft_threshold(-0.5, 0.2) == doctest::Approx(-0.3));
  CHECK(soft_threshold(0.1, 0.2) == 0.0);
}

TEST_CASE("scad example matches the oracle") {
  const auto p = P::make(PenaltyKind::Scad, 0.4, 0.1, 3.7);
  CHECK(std::abs(prox_combined(p, 1.5) - prox_oracle(p, 1.5)) <= 1e-6);
  // stationary point of the middle piece: ((|z| - lambda0)(a - 1) - a lambda) / (a - 2)
  CHECK(prox_combined(p, 1.5) == doctest::Approx(23.0 / 17.0).epsilon(1e-14));
}

TEST_CASE("non-finite input is a domain error") {
  const auto p = P::make(PenaltyKind::Hard, 0.5, 0.2);
  CHECK_THROWS_AS(prox_combined(p, std::nan("")), std::domain_error);
  CHECK_THROWS_AS(prox_combined(p, std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("random problems agree with the brute-force oracle") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> zdist(-3.0, 3.0);
  int worst_kind = -1;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_combined(rng);
    const double z = zdist(rng);
    const double err = std::abs(prox_combined(p, z) - prox_oracle(p, z));
    if (err > worst) {
      worst = err;
      worst_kind = static_cast<int>(p.kind);
    }
  }
  CAPTURE(worst_kind);
  CHECK(worst <= 1e-5);
}

TEST_CASE("hard-thresholding feature for penalties that pass the shape check") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> zdist(-3.0, 3.0);
  std::vector<P> specs{P::make(PenaltyKind::Hard, 0.5, 0.1), P::make(PenaltyKind::Hard, 1.2, 0.0),
                       P::make(PenaltyKind::Sica, 0.5, 0.1, 0.01), P::make(PenaltyKind::Sica, 1.0, 0.0, 0.02)};
  for (const auto& p : specs) {
    const auto c1 = smallest_prop1_c1(p);
    REQUIRE(c1.has_value());
    for (int i = 0; i < 2000; ++i) {
      const double b = prox_combined(p, zdist(rng));
      if (b != 0.0) CHECK(std::abs(b) > (1 - *c1) * p.lambda - 1e-9);
    }
  }
}

TEST_CASE("monotone, odd and shrinking in z") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> zdist(-3.0, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = random_combined(rng);
    std::vector<double> zs(400);
    for (double& z : zs) z = zdist(rng);
    std::sort(zs.begin(), zs.end());
    double prev = -std::numeric_limits<double>::infinity();
    for (double z : zs) {
      const double b = prox_combined(p, z);
      CHECK(b >= prev);
      prev = b;
      CHECK(prox_combined(p, -z) == -b);
      CHECK(std::abs(b) <= std::abs(z));
      CHECK((b == 0.0 || (b > 0) == (z > 0)));
    }
  }
}

TEST_CASE("ties resolve toward zero") {
  // |z| = lambda: the objective equals lambda^2 / 2 at both 0 and z
  const auto p = P::make(PenaltyKind::Hard, 0.5, 0.0);
  CHECK(prox_combined(p, 0.5) == 0.0);
  CHECK(prox_combined(p, -0.5) == 0.0);
}

TEST_CASE("sica handles the concave and convex pieces") {
  // small a: behaves like a hard threshold; large a: close to soft thresholding
  const auto small = P::make(PenaltyKind::Sica, 0.5, 0.0, 0.01);
  const auto large = P::make(PenaltyKind::Sica, 0.2, 0.0, 50.0);
  for (double z : {0.05, 0.3, 0.6, 0.9, 1.5, 2.5}) {
    CHECK(std::abs(prox_combined(small, z) - prox_oracle(small, z)) <= 1e-6);
    CHECK(std::abs(prox_combined(large, z) - prox_oracle(large, z)) <= 1e-6);
  }
}

TEST_CASE("float instantiation") {
  const auto p = PenaltySpec<float>::make(PenaltyKind::Hard, 0.5f, 0.2f);
  CHECK(prox_combined(p, 1.0f) == doctest::Approx(0.8f));
  const auto s = PenaltySpec<float>::make(PenaltyKind::Scad, 0.4f, 0.1f);
  CHECK(prox_combined(s, 1.5f) == doctest::Approx(23.0f / 17.0f));
}
