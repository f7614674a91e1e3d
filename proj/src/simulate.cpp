#include "comboreg/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "comboreg/metrics.hpp"
#include "comboreg/rng.hpp"

namespace comboreg {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Lasso: return "lasso";
    case Method::L1Scad: return "l1_scad";
    case Method::L1Hard: return "l1_hard";
    case Method::L1Sica: return "l1_sica";
    case Method::L1Mcp: return "l1_mcp";
    case Method::Oracle: return "oracle";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "lasso") return Method::Lasso;
  if (lower == "l1_scad") return Method::L1Scad;
  if (lower == "l1_hard") return Method::L1Hard;
  if (lower == "l1_sica") return Method::L1Sica;
  if (lower == "l1_mcp") return Method::L1Mcp;
  if (lower == "oracle") return Method::Oracle;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::PE: return "pe";
    case Metric::L2: return "l2";
    case Metric::L1: return "l1";
    case Metric::Linf: return "linf";
    case Metric::FP: return "fp";
    case Metric::FN: return "fn";
    case Metric::FS: return "fs";
  }
  return "unknown";
}

Eigen::VectorXd table1_beta0(Index p) {
  static constexpr std::array<double, 7> kHead{1.0, -0.5, 0.7, -1.2, -0.9, 0.3, 0.55};
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (Index j = 0; j < std::min<Index>(p, 7); ++j) b(j) = kHead[static_cast<std::size_t>(j)];
  return b;
}

void SimConfig::validate() const {
  if (n < 2) throw std::invalid_argument("config: n must be >= 2");
  if (p < 2) throw std::invalid_argument("config: p must be >= 2");
  if (beta0.size() != p) throw std::invalid_argument("config: beta0 length must equal p");
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (!(rho >= 0 && rho < 1)) throw std::invalid_argument("config: rho must lie in [0, 1)");
  if (!(sigma >= 0)) throw std::invalid_argument("config: sigma must be >= 0");
  if (methods.empty()) throw std::invalid_argument("config: methods list is empty");
  if (test_mode.sampled && test_mode.size < 2) throw std::invalid_argument("config: test size must be >= 2");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

Eigen::MatrixXd gen_design(Index n, Index p, double rho, std::uint64_t seed) {
  if (!(rho >= 0 && rho < 1)) throw std::domain_error("gen_design: rho must lie in [0, 1)");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double innov = std::sqrt(1.0 - rho * rho);
  Eigen::MatrixXd X(n, p);
  for (Index i = 0; i < n; ++i) {
    double prev = normal(rng);
    X(i, 0) = prev;
    for (Index j = 1; j < p; ++j) {
      prev = rho * prev + innov * normal(rng);
      X(i, j) = prev;
    }
  }
  return X;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta0, double sigma,
                             std::uint64_t seed) {
  if (X.cols() != beta0.size()) throw std::invalid_argument("gen_response: dimension mismatch");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd y = X * beta0;
  for (Index i = 0; i < y.size(); ++i) y(i) += sigma * normal(rng);
  return y;
}

Eigen::MatrixXd ar1_covariance(Index p, double rho) {
  Eigen::MatrixXd S(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) S(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return S;
}

std::uint64_t replicate_seed(std::uint64_t seed, Index replicate) {
  return derive_seed(seed, static_cast<std::uint64_t>(replicate));
}

ReplicateData gen_replicate(const SimConfig& cfg, Index replicate) {
  const std::uint64_t base = replicate_seed(cfg.seed, replicate);
  ReplicateData d;
  d.X = gen_design(cfg.n, cfg.p, cfg.rho, derive_seed(base, 1));
  d.y = gen_response(d.X, cfg.beta0, cfg.sigma, derive_seed(base, 2));
  d.eps = d.y - d.X * cfg.beta0;
  return d;
}

PenaltySpec<double> method_penalty(const SimConfig& cfg, Method m) {
  auto shaped = [](PenaltyKind k, double override_shape) {
    return PenaltySpec<double>::make(k, 0.0, 0.0,
                                     override_shape > 0 ? override_shape : default_shape<double>(k));
  };
  switch (m) {
    case Method::L1Scad: return shaped(PenaltyKind::Scad, cfg.scad_shape);
    case Method::L1Hard: return PenaltySpec<double>::make(PenaltyKind::Hard, 0.0);
    case Method::L1Sica: return shaped(PenaltyKind::Sica, cfg.sica_shape);
    case Method::L1Mcp: return shaped(PenaltyKind::Mcp, cfg.mcp_shape);
    default: return PenaltySpec<double>::make(PenaltyKind::L1, 0.0);
  }
}

namespace {

bool is_combined(Method m) {
  return m == Method::L1Scad || m == Method::L1Hard || m == Method::L1Sica || m == Method::L1Mcp;
}

double noise_lambda0(const SimConfig& cfg) {
  const double c = cfg.noise_c < 0 ? 2.0 * cfg.sigma : cfg.noise_c;
  return universal_lambda0(cfg.n, cfg.p, c);
}

}  // namespace

MethodFit fit_method(const SimConfig& cfg, Method m, const RegressionProblem& prob, const LassoInit& init,
                     const Eigen::VectorXd& beta0) {
  MethodFit out;
  if (m == Method::Oracle) {
    std::vector<Index> truth;
    for (Index j = 0; j < beta0.size(); ++j)
      if (beta0(j) != 0) truth.push_back(j);
    FitResult f;
    f.beta = refit_ls(prob, truth);
    const Eigen::VectorXd r = prob.y - prob.X * f.beta;
    f.rss = r.squaredNorm();
    f.kkt_inf = (prob.X.transpose() * r).cwiseAbs().maxCoeff() / static_cast<double>(prob.n());
    f.support = support_of(f.beta);
    f.converged = true;
    f.coordinatewise_global = false;
    f.penalty = PenaltySpec<double>::make(PenaltyKind::L1, 0.0);
    out.fit = std::move(f);
  } else if (m == Method::Lasso) {
    TunedFit t = tune_lasso_bic(prob, cfg.tuning);
    out.fit = std::move(t.fit);
    out.lambda = t.lambda;
    out.lambda0 = 0;
  } else {
    RegressionProblem combined = prob;
    combined.penalty = method_penalty(cfg, m);
    TunedFit t = tune_combined(combined, cfg.tuning, init);
    out.fit = std::move(t.fit);
    out.lambda = t.lambda;
    out.lambda0 = t.lambda0;
  }
  out.beta = prob.to_original_scale(out.fit.beta);
  return out;
}

std::vector<ReplicateRow> run_replicate(const SimConfig& cfg, Index replicate) {
  const std::uint64_t base = replicate_seed(cfg.seed, replicate);
  const ReplicateData data = gen_replicate(cfg, replicate);
  const RegressionProblem prob =
      make_problem(data.X, data.y, PenaltySpec<double>::make(PenaltyKind::L1, 0.0), true, false);

  const Eigen::MatrixXd Sigma0 = ar1_covariance(cfg.p, cfg.rho);
  const bool noise_event = noise_event_check(prob.X, data.eps, noise_lambda0(cfg));
  Index s = 0;
  for (Index j = 0; j < cfg.beta0.size(); ++j) s += cfg.beta0(j) != 0;

  LassoInit init;
  if (std::any_of(cfg.methods.begin(), cfg.methods.end(), is_combined)) {
    TuningOptions topts = cfg.tuning;
    topts.seed = derive_seed(base, 3);
    init = lasso_initializer(prob, topts);
  }

  std::vector<ReplicateRow> rows;
  for (Method m : cfg.methods) {
    const MethodFit mf = fit_method(cfg, m, prob, init, cfg.beta0);
    ReplicateRow row;
    row.replicate = replicate;
    row.method = m;
    const auto sel = selection_metrics(mf.beta, cfg.beta0);
    double pe;
    if (cfg.test_mode.sampled) {
      pe = prediction_error_sampled(mf.beta, cfg.beta0, cfg.sigma, Sigma0, cfg.test_mode.size,
                                    derive_seed(base, 100 + static_cast<std::uint64_t>(m)))
               .value;
    } else {
      pe = prediction_error(mf.beta, cfg.beta0, cfg.sigma, Sigma0);
    }
    row.metric = {pe,
                  lq_loss(mf.beta, cfg.beta0, 2.0),
                  lq_loss(mf.beta, cfg.beta0, 1.0),
                  lq_loss(mf.beta, cfg.beta0, std::numeric_limits<double>::infinity()),
                  static_cast<double>(sel.fp),
                  static_cast<double>(sel.fn),
                  static_cast<double>(sel.fs)};
    row.support_size = static_cast<Index>(mf.fit.support.size());
    row.lambda = mf.lambda;
    row.lambda0 = mf.lambda0;
    row.kkt_inf = mf.fit.kkt_inf;
    row.converged = mf.fit.converged;
    // Certificates against the row's own L1 level: lambda0 for combined fits,
    // lambda for the lasso, the noise-event level for the oracle.
    double level = mf.lambda0;
    if (m == Method::Lasso) level = mf.lambda;
    if (m == Method::Oracle) level = noise_lambda0(cfg);
    const Theorem3Report cert = theorem3_certificate(mf.fit, s, 3.0, 0.0, level, 4.0);
    row.cert_sparsity = cert.sparsity_ok;
    row.cert_residual = cert.residual_ok;
    row.noise_event = noise_event;
    row.exact_support = sel.fp == 0 && sel.fn == 0;
    rows.push_back(row);
  }
  return rows;
}

StudyReport summarize(const SimConfig& cfg, std::vector<ReplicateRow> rows) {
  StudyReport report;
  for (Method m : cfg.methods) {
    MethodSummary ms{m, {}};
    for (Metric metric : kAllMetrics) {
      double mean = 0, m2 = 0;
      Index count = 0;
      for (const auto& r : rows) {
        if (r.method != m) continue;
        const double x = r.get(metric);
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
      }
      const double sd = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0;
      ms.metric[static_cast<std::size_t>(metric)] = {mean, count > 0 ? sd / std::sqrt(static_cast<double>(count)) : 0.0};
    }
    report.methods.push_back(ms);
  }
  Index events = 0, reps = 0;
  for (const auto& r : rows) {
    if (r.method != cfg.methods.front()) continue;
    ++reps;
    events += r.noise_event;
  }
  report.noise_event_frequency = reps > 0 ? static_cast<double>(events) / static_cast<double>(reps) : 0.0;
  report.rows = std::move(rows);
  return report;
}

StudyReport run_study(const SimConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<ReplicateRow>> per_rep(static_cast<std::size_t>(cfg.reps));
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    while (!failed.load()) {
      const Index r = next.fetch_add(1);
      if (r >= cfg.reps) return;
      try {
        per_rep[static_cast<std::size_t>(r)] = run_replicate(cfg, r);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };

  const int workers = static_cast<int>(std::min<Index>(cfg.threads, cfg.reps));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ReplicateRow> rows;
  for (auto& rep : per_rep) rows.insert(rows.end(), rep.begin(), rep.end());
  return summarize(cfg, std::move(rows));
}

const MethodSummary& StudyReport::summary(Method m) const {
  for (const auto& ms : methods)
    if (ms.method == m) return ms;
  throw std::out_of_range("study report has no method '" + std::string(to_string(m)) + "'");
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& os, const StudyReport& report) {
  os << "method,metric,mean,se\n";
  for (const auto& ms : report.methods)
    for (Metric m : kAllMetrics)
      os << to_string(ms.method) << ',' << to_string(m) << ',' << fmt17(ms.get(m).mean) << ','
         << fmt17(ms.get(m).se) << '\n';
  os << "all,noise_event_frequency," << fmt17(report.noise_event_frequency) << ",0\n";
}

std::string raw_csv_header() {
  return "replicate,method,pe,l2,l1,linf,fp,fn,fs,support_size,lambda,lambda0,kkt_inf,converged,"
         "cert_sparsity,cert_residual,noise_event,exact_support";
}

void write_raw_csv(std::ostream& os, const StudyReport& report) {
  os << raw_csv_header() << '\n';
  for (const auto& r : report.rows) {
    os << r.replicate << ',' << to_string(r.method);
    for (Metric m : {Metric::PE, Metric::L2, Metric::L1, Metric::Linf}) os << ',' << fmt17(r.get(m));
    for (Metric m : {Metric::FP, Metric::FN, Metric::FS}) os << ',' << static_cast<long long>(r.get(m));
    os << ',' << r.support_size << ',' << fmt17(r.lambda) << ',' << fmt17(r.lambda0) << ',' << fmt17(r.kkt_inf) << ','
       << r.converged << ',' << r.cert_sparsity << ',' << r.cert_residual << ',' << r.noise_event << ','
       << r.exact_support << '\n';
  }
}

void write_table(std::ostream& os, const StudyReport& report) {
  struct Row {
    Metric metric;
    const char* label;
    double factor;
  };
  static constexpr std::array<Row, 6> kRows{{{Metric::PE, "PE (x1e-2)", 1e2},
                                             {Metric::L2, "L2-loss (x1e-2)", 1e2},
                                             {Metric::L1, "L1-loss (x1e-1)", 1e1},
                                             {Metric::Linf, "Linf-loss (x1e-2)", 1e2},
                                             {Metric::FP, "FP", 1.0},
                                             {Metric::FN, "FN", 1.0}}};
  os << std::left << std::setw(20) << "";
  for (const auto& ms : report.methods) os << std::setw(16) << to_string(ms.method);
  os << '\n';
  for (const auto& row : kRows) {
    os << std::setw(20) << row.label;
    for (const auto& ms : report.methods) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << ms.get(row.metric).mean * row.factor << " ("
           << ms.get(row.metric).se * row.factor << ")";
      os << std::setw(16) << cell.str();
    }
    os << '\n';
  }
  os << "noise event frequency: " << report.noise_event_frequency << '\n';
}

}  // namespace comboreg
