#pragma once

// Global minimizer of the univariate problem
//   g(beta) = (z - beta)^2 / 2 + lambda0 |beta| + p_lambda(|beta|).

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "comboreg/penalty.hpp"

namespace comboreg {

template <typename Scalar = double>
struct ScalarProblem {
  Scalar z = 0;
  PenaltySpec<Scalar> penalty;
};

template <typename Scalar>
Scalar scalar_objective(const PenaltySpec<Scalar>& p, Scalar z, Scalar beta) {
  const Scalar r = z - beta;
  const Scalar t = std::abs(beta);
  return Scalar(0.5) * r * r + p.lambda0 * t + penalty_value(p, t);
}

namespace detail {

// Objective restricted to beta = t >= 0 with target u = |z|.
template <typename Scalar>
Scalar half_line_objective(const PenaltySpec<Scalar>& p, Scalar u, Scalar t) {
  const Scalar r = u - t;
  return Scalar(0.5) * r * r + p.lambda0 * t + penalty_value(p, t);
}

// Picks the candidate with the smallest objective; candidates are visited in
// ascending order and only a strict improvement replaces the incumbent, so
// ties resolve toward the sparser (smaller) magnitude.
template <typename Scalar, std::size_t N>
Scalar best_candidate(const PenaltySpec<Scalar>& p, Scalar u, std::array<Scalar, N> cand, std::size_t count) {
  std::sort(cand.begin(), cand.begin() + count);
  Scalar best_t = 0;
  Scalar best_g = half_line_objective(p, u, Scalar(0));
  for (std::size_t i = 0; i < count; ++i) {
    const Scalar g = half_line_objective(p, u, cand[i]);
    if (g < best_g) {
      best_g = g;
      best_t = cand[i];
    }
  }
  return best_t;
}

template <typename Scalar>
Scalar clamp_to(Scalar x, Scalar lo, Scalar hi) {
  return std::min(std::max(x, lo), hi);
}

// SICA: g'(t) = t - u + lambda0 + lambda a (a+1) / (a+t)^2 is convex in t, so g is
// concave on [0, t_c] and convex on [t_c, u], with t_c the inflection point.
template <typename Scalar>
Scalar sica_magnitude(const PenaltySpec<Scalar>& p, Scalar u) {
  const Scalar a = p.shape;
  const Scalar k = p.lambda * a * (a + 1);
  auto slope = [&](Scalar t) { return t - u + p.lambda0 + k / ((a + t) * (a + t)); };

  const Scalar inflection = clamp_to(std::cbrt(2 * k) - a, Scalar(0), u);
  Scalar convex_min;
  if (slope(inflection) >= 0) {
    convex_min = inflection;
  } else if (slope(u) <= 0) {
    convex_min = u;
  } else {
    Scalar lo = inflection, hi = u;
    for (int it = 0; it < 200; ++it) {
      const Scalar mid = lo + (hi - lo) / 2;
      if (mid <= lo || mid >= hi) break;
      (slope(mid) < 0 ? lo : hi) = mid;
    }
    convex_min = half_line_objective(p, u, lo) <= half_line_objective(p, u, hi) ? lo : hi;
  }
  return best_candidate<Scalar, 2>(p, u, {inflection, convex_min}, 2);
}

}  // namespace detail

/// Global minimizer of the scalar combined-penalty problem. For HARD this is
/// exactly sgn(z) (|z| - lambda0) 1{|z| > lambda + lambda0}; other kinds
/// enumerate the minimizer of every smooth piece and keep the best.
template <typename Scalar>
Scalar prox_combined(const PenaltySpec<Scalar>& p, Scalar z) {
  if (!std::isfinite(z)) throw std::domain_error("prox_combined: z must be finite");
  const Scalar u = std::abs(z);
  const Scalar sign = z < 0 ? Scalar(-1) : Scalar(1);
  if (u == 0) return Scalar(0);

  const Scalar lam = p.lambda;
  const Scalar l0 = p.lambda0;
  const Scalar a = p.shape;
  Scalar t = 0;

  switch (p.kind) {
    case PenaltyKind::L1:
      t = std::max(u - l0 - lam, Scalar(0));
      break;
    case PenaltyKind::Hard:
      if (u > lam + l0) return sign * (u - l0);
      return Scalar(0);
    case PenaltyKind::Scad: {
      std::array<Scalar, 3> cand{};
      std::size_t count = 0;
      // [0, lambda]: unit curvature.
      cand[count++] = detail::clamp_to(u - l0 - lam, Scalar(0), std::min(lam, u));
      // [lambda, a lambda]: curvature (a - 2) / (a - 1) > 0.
      if (lam <= u) {
        const Scalar stat = ((u - l0) * (a - 1) - a * lam) / (a - 2);
        cand[count++] = detail::clamp_to(stat, lam, std::min(a * lam, u));
      }
      // [a lambda, inf): penalty is flat.
      if (a * lam <= u) cand[count++] = detail::clamp_to(u - l0, a * lam, u);
      t = detail::best_candidate<Scalar, 3>(p, u, cand, count);
      break;
    }
    case PenaltyKind::Mcp: {
      std::array<Scalar, 2> cand{};
      std::size_t count = 0;
      // [0, a lambda]: curvature 1 - 1/a > 0.
      cand[count++] = detail::clamp_to((u - l0 - lam) * a / (a - 1), Scalar(0), std::min(a * lam, u));
      if (a * lam <= u) cand[count++] = detail::clamp_to(u - l0, a * lam, u);
      t = detail::best_candidate<Scalar, 2>(p, u, cand, count);
      break;
    }
    case PenaltyKind::Sica:
      t = detail::sica_magnitude(p, u);
      break;
  }
  return t == 0 ? Scalar(0) : sign * t;
}

template <typename Scalar>
Scalar prox_combined(const ScalarProblem<Scalar>& prob) {
  return prox_combined(prob.penalty, prob.z);
}

/// Soft-thresholding operator sgn(z) (|z| - level)_+.
template <typename Scalar>
Scalar soft_threshold(Scalar z, Scalar level) {
  const Scalar u = std::abs(z) - level;
  if (u <= 0) return Scalar(0);
  return z < 0 ? -u : u;
}

}  // namespace comboreg
