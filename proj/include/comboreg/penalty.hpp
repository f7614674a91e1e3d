#pragma once

// Concave penalty family p_lambda(t) used alongside the L1 term lambda0 * |t|.
//
// Kinds and their forms (t >= 0):
//   L1    lambda * t
//   HARD  (lambda^2 - (lambda - t)_+^2) / 2
//   SCAD  lambda * t                                  t <= lambda
//         (2 a lambda t - t^2 - lambda^2) / (2(a-1))  lambda < t <= a lambda
//         (a + 1) lambda^2 / 2                        t > a lambda
//   MCP   lambda * t - t^2 / (2a), capped at a lambda^2 / 2
//   SICA  lambda * (a + 1) t / (a + t)
//
// Derivatives at kinks (t = lambda for HARD/SCAD, t = a lambda for SCAD/MCP)
// are the left limits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace comboreg {

enum class PenaltyKind { L1, Hard, Scad, Mcp, Sica };

inline std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::Hard: return "hard";
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::Mcp: return "mcp";
    case PenaltyKind::Sica: return "sica";
  }
  return "unknown";
}

inline PenaltyKind parse_penalty_kind(std::string_view name) {
  if (name == "l1") return PenaltyKind::L1;
  if (name == "hard") return PenaltyKind::Hard;
  if (name == "scad") return PenaltyKind::Scad;
  if (name == "mcp") return PenaltyKind::Mcp;
  if (name == "sica") return PenaltyKind::Sica;
  throw std::invalid_argument("unknown penalty kind '" + std::string(name) + "'");
}

template <typename Scalar = double>
Scalar default_shape(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Scad: return Scalar(3.7);
    case PenaltyKind::Mcp: return Scalar(3);
    case PenaltyKind::Sica: return Scalar(0.1);
    default: return Scalar(0);
  }
}

template <typename Scalar = double>
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Hard;
  Scalar lambda = 0;   // concave-component level
  Scalar shape = 0;    // a for SCAD/MCP/SICA
  Scalar lambda0 = 0;  // L1-component level

  static PenaltySpec make(PenaltyKind kind, Scalar lambda, Scalar lambda0 = 0,
                          std::optional<Scalar> shape = std::nullopt) {
    PenaltySpec p{kind, lambda, shape.value_or(default_shape<Scalar>(kind)), lambda0};
    p.validate();
    return p;
  }

  void validate() const {
    using std::isfinite;
    if (!(lambda >= 0) || !isfinite(lambda)) throw std::domain_error("penalty: lambda must be finite and >= 0");
    if (!(lambda0 >= 0) || !isfinite(lambda0)) throw std::domain_error("penalty: lambda0 must be finite and >= 0");
    switch (kind) {
      case PenaltyKind::Scad:
        if (!(shape > 2)) throw std::domain_error("penalty: SCAD requires shape > 2");
        break;
      case PenaltyKind::Mcp:
        if (!(shape > 1)) throw std::domain_error("penalty: MCP requires shape > 1");
        break;
      case PenaltyKind::Sica:
        if (!(shape > 0) || !isfinite(shape)) throw std::domain_error("penalty: SICA requires shape > 0");
        break;
      default: break;
    }
  }

  PenaltySpec with_lambda(Scalar l) const {
    PenaltySpec p = *this;
    p.lambda = l;
    p.validate();
    return p;
  }

  PenaltySpec with_lambda0(Scalar l0) const {
    PenaltySpec p = *this;
    p.lambda0 = l0;
    p.validate();
    return p;
  }
};

namespace detail {

// Right limit at t = 0, left limit elsewhere.
template <typename Scalar>
Scalar derivative_unchecked(const PenaltySpec<Scalar>& p, Scalar t) {
  const Scalar lam = p.lambda;
  const Scalar a = p.shape;
  switch (p.kind) {
    case PenaltyKind::L1: return lam;
    case PenaltyKind::Hard: return t <= lam ? lam - t : Scalar(0);
    case PenaltyKind::Scad:
      if (t <= lam) return lam;
      if (t <= a * lam) return (a * lam - t) / (a - 1);
      return Scalar(0);
    case PenaltyKind::Mcp: return t <= a * lam ? lam - t / a : Scalar(0);
    case PenaltyKind::Sica: return lam * a * (a + 1) / ((a + t) * (a + t));
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar second_derivative_unchecked(const PenaltySpec<Scalar>& p, Scalar t) {
  const Scalar lam = p.lambda;
  const Scalar a = p.shape;
  switch (p.kind) {
    case PenaltyKind::L1: return Scalar(0);
    case PenaltyKind::Hard: return t <= lam && lam > 0 ? Scalar(-1) : Scalar(0);
    case PenaltyKind::Scad: return (t > lam && t <= a * lam) ? Scalar(-1) / (a - 1) : Scalar(0);
    case PenaltyKind::Mcp: return t <= a * lam && lam > 0 ? Scalar(-1) / a : Scalar(0);
    case PenaltyKind::Sica: {
      const Scalar w = a + t;
      return Scalar(-2) * lam * a * (a + 1) / (w * w * w);
    }
  }
  return Scalar(0);
}

}  // namespace detail

/// Value of the concave component only; the lambda0 term is not included.
template <typename Scalar>
Scalar penalty_value(const PenaltySpec<Scalar>& p, Scalar t) {
  if (!(t >= 0)) throw std::domain_error("penalty_value: t must be >= 0");
  const Scalar lam = p.lambda;
  const Scalar a = p.shape;
  switch (p.kind) {
    case PenaltyKind::L1: return lam * t;
    case PenaltyKind::Hard: {
      const Scalar gap = std::max(lam - t, Scalar(0));
      return Scalar(0.5) * (lam * lam - gap * gap);
    }
    case PenaltyKind::Scad:
      if (t <= lam) return lam * t;
      if (t <= a * lam) return (2 * a * lam * t - t * t - lam * lam) / (2 * (a - 1));
      return (a + 1) * lam * lam / 2;
    case PenaltyKind::Mcp:
      if (t <= a * lam) return lam * t - t * t / (2 * a);
      return a * lam * lam / 2;
    case PenaltyKind::Sica: return lam * (a + 1) * t / (a + t);
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar penalty_derivative(const PenaltySpec<Scalar>& p, Scalar t) {
  if (!(t > 0)) throw std::domain_error("penalty_derivative: t must be > 0");
  return detail::derivative_unchecked(p, t);
}

template <typename Scalar>
Scalar penalty_second_derivative(const PenaltySpec<Scalar>& p, Scalar t) {
  if (!(t > 0)) throw std::domain_error("penalty_second_derivative: t must be > 0");
  return detail::second_derivative_unchecked(p, t);
}

/// lim p(t) as t -> infinity; +inf for L1 (see penalty_is_bounded).
template <typename Scalar>
Scalar penalty_limit(const PenaltySpec<Scalar>& p) {
  const Scalar lam = p.lambda;
  const Scalar a = p.shape;
  switch (p.kind) {
    case PenaltyKind::L1:
      return lam > 0 ? std::numeric_limits<Scalar>::infinity() : Scalar(0);
    case PenaltyKind::Hard: return lam * lam / 2;
    case PenaltyKind::Scad: return (a + 1) * lam * lam / 2;
    case PenaltyKind::Mcp: return a * lam * lam / 2;
    case PenaltyKind::Sica: return lam * (a + 1);
  }
  return Scalar(0);
}

template <typename Scalar>
bool penalty_is_bounded(const PenaltySpec<Scalar>& p) {
  return p.kind != PenaltyKind::L1 || p.lambda == 0;
}

/// Points where the derivative is only one-sided.
template <typename Scalar>
std::vector<Scalar> penalty_kinks(const PenaltySpec<Scalar>& p) {
  switch (p.kind) {
    case PenaltyKind::Hard: return {p.lambda};
    case PenaltyKind::Scad: return {p.lambda, p.shape * p.lambda};
    case PenaltyKind::Mcp: return {p.shape * p.lambda};
    default: return {};
  }
}

template <typename Scalar>
Scalar hard_penalty_value(Scalar lambda, Scalar t) {
  const Scalar gap = std::max(lambda - t, Scalar(0));
  return Scalar(0.5) * (lambda * lambda - gap * gap);
}

enum class Prop1Check { Monotone, Concave, DominatesHard, DerivativeBound, CurvatureDecreasing };

inline std::string_view to_string(Prop1Check c) {
  switch (c) {
    case Prop1Check::Monotone: return "monotone";
    case Prop1Check::Concave: return "concave";
    case Prop1Check::DominatesHard: return "dominates_hard";
    case Prop1Check::DerivativeBound: return "derivative_bound";
    case Prop1Check::CurvatureDecreasing: return "curvature_decreasing";
  }
  return "unknown";
}

template <typename Scalar = double>
struct Prop1Failure {
  Prop1Check check;
  Scalar at;  // first grid point where the check was violated
};

template <typename Scalar = double>
struct Prop1Report {
  Scalar c1 = 0;
  bool passes = true;
  std::vector<Prop1Failure<Scalar>> failed_checks;

  bool failed(Prop1Check c) const {
    return std::any_of(failed_checks.begin(), failed_checks.end(),
                       [c](const auto& f) { return f.check == c; });
  }
};

/// Grid verification of the shape conditions that give coordinatewise global
/// minimizers the hard-thresholding feature with constant c1:
///   (a) nondecreasing, (b) concave, (c) p >= p_hard on [0, lambda],
///   (d) p'((1 - c1) lambda) <= c1 lambda, (e) -p'' nonincreasing on [0, (1 - c1) lambda].
template <typename Scalar>
Prop1Report<Scalar> check_prop1(const PenaltySpec<Scalar>& p, Scalar c1, int grid_n = 1000) {
  if (!(c1 >= 0 && c1 < 1)) throw std::domain_error("check_prop1: c1 must lie in [0, 1)");
  if (grid_n < 100) throw std::domain_error("check_prop1: grid_n must be >= 100");

  Prop1Report<Scalar> report;
  report.c1 = c1;
  auto fail = [&](Prop1Check c, Scalar at) { report.failed_checks.push_back({c, at}); };

  const Scalar lam = p.lambda;
  Scalar span = lam;
  if (p.kind == PenaltyKind::Scad || p.kind == PenaltyKind::Mcp) span = std::max(lam, p.shape * lam);
  const Scalar upper = span > 0 ? Scalar(4) * span : Scalar(1);
  const Scalar shape_tol = Scalar(1e-10);

  std::vector<Scalar> t(grid_n + 1), v(grid_n + 1);
  for (int i = 0; i <= grid_n; ++i) {
    t[i] = upper * Scalar(i) / Scalar(grid_n);
    v[i] = penalty_value(p, t[i]);
  }

  for (int i = 1; i <= grid_n; ++i) {
    if (v[i] < v[i - 1] - shape_tol) {
      fail(Prop1Check::Monotone, t[i]);
      break;
    }
  }
  for (int i = 1; i < grid_n; ++i) {
    if (v[i - 1] - 2 * v[i] + v[i + 1] > shape_tol) {
      fail(Prop1Check::Concave, t[i]);
      break;
    }
  }
  for (int i = 0; i <= grid_n; ++i) {
    const Scalar ti = lam * Scalar(i) / Scalar(grid_n);
    if (penalty_value(p, ti) < hard_penalty_value(lam, ti) - Scalar(1e-12)) {
      fail(Prop1Check::DominatesHard, ti);
      break;
    }
  }
  const Scalar knee = (1 - c1) * lam;
  if (detail::derivative_unchecked(p, knee) > c1 * lam + Scalar(1e-12)) fail(Prop1Check::DerivativeBound, knee);

  Scalar prev = -detail::second_derivative_unchecked(p, Scalar(0));
  for (int i = 1; i <= grid_n; ++i) {
    const Scalar ti = knee * Scalar(i) / Scalar(grid_n);
    const Scalar cur = -detail::second_derivative_unchecked(p, ti);
    if (cur > prev + shape_tol) {
      fail(Prop1Check::CurvatureDecreasing, ti);
      break;
    }
    prev = cur;
  }

  report.passes = report.failed_checks.empty();
  return report;
}

/// Smallest c1 on a uniform grid of step 1/steps for which check_prop1 passes.
template <typename Scalar>
std::optional<Scalar> smallest_prop1_c1(const PenaltySpec<Scalar>& p, int steps = 100, int grid_n = 1000) {
  for (int k = 0; k < steps; ++k) {
    const Scalar c1 = Scalar(k) / Scalar(steps);
    if (check_prop1(p, c1, grid_n).passes) return c1;
  }
  return std::nullopt;
}

}  // namespace comboreg
