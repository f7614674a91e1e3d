#include <cmath>
#include <sstream>

#include "doctest.h"

#include "comboreg/simulate.hpp"

using namespace comboreg;

namespace {

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd x = a.array() - a.mean(), y = b.array() - b.mean();
  return (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
}

SimConfig small_config() {
  SimConfig cfg;
  cfg.n = 40;
  cfg.p = 30;
  cfg.beta0 = table1_beta0(30);
  cfg.reps = 3;
  cfg.tuning.grid_size = 15;
  cfg.tuning.folds = 5;
  return cfg;
}

}  // namespace

TEST_CASE("coefficient vector and covariance") {
  const auto b = table1_beta0(10);
  CHECK(b.size() == 10);
  CHECK(b(0) == 1.0);
  CHECK(b(3) == -1.2);
  CHECK(b(6) == 0.55);
  CHECK(b.tail(3).isZero());
  const auto S = ar1_covariance(4, 0.5);
  CHECK(S(0, 0) == 1.0);
  CHECK(S(0, 3) == doctest::Approx(0.125));
  CHECK(S(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("design generation") {
  CHECK(gen_design(50, 8, 0.5, 1) == gen_design(50, 8, 0.5, 1));
  CHECK(gen_design(50, 8, 0.5, 1) != gen_design(50, 8, 0.5, 2));
  CHECK_THROWS(gen_design(5, 5, 1.0, 1));

  const Index n = 2000;
  const Eigen::MatrixXd iid = gen_design(n, 6, 0.0, 4);
  for (Index j = 1; j < 6; ++j) CHECK(std::abs(corr(iid.col(0), iid.col(j))) < 4 / std::sqrt(double(n)));

  const Eigen::MatrixXd X = gen_design(n, 10, 0.5, 5);
  for (Index j = 1; j < 10; ++j) CHECK(corr(X.col(j - 1), X.col(j)) == doctest::Approx(0.5).epsilon(0.12));
  CHECK(corr(X.col(0), X.col(2)) == doctest::Approx(0.25).epsilon(0.3));
  for (Index j = 0; j < 10; ++j) CHECK(X.col(j).squaredNorm() / n == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("response generation") {
  const Eigen::MatrixXd X = gen_design(100, 10, 0.5, 7);
  const Eigen::VectorXd b = table1_beta0(10);
  CHECK(gen_response(X, b, 0.0, 3) == X * b);
  CHECK(gen_response(X, b, 0.25, 3) == gen_response(X, b, 0.25, 3));
  const Eigen::MatrixXd big = gen_design(10000, 10, 0.5, 8);
  const Eigen::VectorXd r = gen_response(big, b, 0.25, 9) - big * b;
  const double var = (r.array() - r.mean()).square().sum() / (10000 - 1);
  CHECK(var == doctest::Approx(0.0625).epsilon(0.05));
  CHECK_THROWS(gen_response(X, table1_beta0(9), 0.25, 1));
}

TEST_CASE("replicate data") {
  const SimConfig cfg = small_config();
  CHECK(replicate_seed(cfg.seed, 0) != replicate_seed(cfg.seed, 1));
  const auto a = gen_replicate(cfg, 2), b = gen_replicate(cfg, 2), c = gen_replicate(cfg, 3);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(a.X != c.X);
  CHECK((a.y - a.X * cfg.beta0 - a.eps).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("method names and config validation") {
  for (Method m : {Method::Lasso, Method::L1Scad, Method::L1Hard, Method::L1Sica, Method::L1Mcp, Method::Oracle})
    CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS(parse_method("ridge"));
  SimConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.methods.clear();
  CHECK_THROWS(cfg.validate());
  cfg = small_config();
  cfg.beta0 = table1_beta0(29);
  CHECK_THROWS(cfg.validate());
  cfg = small_config();
  cfg.rho = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = small_config();
  cfg.sica_shape = 0.05;
  CHECK(method_penalty(cfg, Method::L1Sica).shape == 0.05);
  CHECK(method_penalty(cfg, Method::L1Scad).shape == 3.7);
  CHECK(method_penalty(cfg, Method::L1Hard).kind == PenaltyKind::Hard);
}

TEST_CASE("noiseless oracle study is exact") {
  SimConfig cfg = small_config();
  cfg.reps = 1;
  cfg.sigma = 0.0;
  cfg.methods = {Method::Oracle};
  const auto rep = run_study(cfg);
  REQUIRE(rep.rows.size() == 1);
  for (Metric m : kAllMetrics) CHECK(std::abs(rep.rows[0].get(m)) <= 1e-10);
  CHECK(std::abs(rep.summary(Method::Oracle).get(Metric::PE).mean) <= 1e-10);
  CHECK_THROWS_AS(rep.summary(Method::Lasso), std::out_of_range);
}

TEST_CASE("oracle never misses and summaries follow the raw rows") {
  SimConfig cfg = small_config();
  cfg.reps = 4;
  cfg.methods = {Method::Lasso, Method::L1Hard, Method::Oracle};
  const auto rep = run_study(cfg);
  REQUIRE(rep.rows.size() == 12);
  for (const auto& row : rep.rows) {
    if (row.method != Method::Oracle) continue;
    CHECK(row.get(Metric::FP) == 0);
    CHECK(row.get(Metric::FN) == 0);
    CHECK(row.get(Metric::FS) == 0);
    CHECK(row.exact_support);
  }
  for (const auto& s : rep.methods) {
    for (Metric m : kAllMetrics) {
      double sum = 0, sq = 0;
      int count = 0;
      for (const auto& row : rep.rows) {
        if (row.method != s.method) continue;
        sum += row.get(m);
        ++count;
      }
      const double mean = sum / count;
      for (const auto& row : rep.rows)
        if (row.method == s.method) sq += (row.get(m) - mean) * (row.get(m) - mean);
      CHECK(s.get(m).mean == doctest::Approx(mean).epsilon(1e-12));
      CHECK(s.get(m).se == doctest::Approx(std::sqrt(sq / (count - 1)) / std::sqrt(double(count))).epsilon(1e-10).scale(1e-15));
    }
  }
}

TEST_CASE("study output does not depend on threads") {
  SimConfig cfg = small_config();
  cfg.reps = 4;
  const auto one = run_study(cfg);
  cfg.threads = 4;
  const auto four = run_study(cfg);
  std::ostringstream a, b;
  write_raw_csv(a, one);
  write_raw_csv(b, four);
  CHECK(a.str() == b.str());
  std::ostringstream ra, rb;
  write_report_csv(ra, one);
  write_report_csv(rb, four);
  CHECK(ra.str() == rb.str());
  CHECK(ra.str().rfind("method,metric,mean,se\n", 0) == 0);
  CHECK(ra.str().find("all,noise_event_frequency,") != std::string::npos);
  CHECK(a.str().rfind(raw_csv_header(), 0) == 0);
  std::ostringstream table;
  write_table(table, one);
  CHECK(table.str().find("l1_hard") != std::string::npos);
}

TEST_CASE("noiseless combined fits recover the support") {
  SimConfig cfg;
  cfg.sigma = 0.0;
  cfg.reps = 3;
  cfg.methods = {Method::L1Scad, Method::L1Hard, Method::L1Sica, Method::L1Mcp};
  const auto rep = run_study(cfg);
  for (const auto& row : rep.rows) {
    CAPTURE(to_string(row.method));
    CAPTURE(row.replicate);
    CHECK(row.exact_support);
    CHECK(row.get(Metric::FS) == 0);
  }
}
