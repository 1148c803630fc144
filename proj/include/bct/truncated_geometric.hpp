#pragma once

// Truncated geometric distributions TG(x; kappa) on {0, ..., kappa}:
// Pr[X = t] = p q^t with mean x. Everything here is templated on the
// floating-point scalar and header-only.

#include <cmath>
#include <concepts>
#include <limits>

#include "bct/common.hpp"

namespace bct {

/// Largest finite cap for which geometric sums are evaluated term by term.
inline constexpr std::int64_t kHornerMaxCap = 64;

template <std::floating_point Scalar>
struct CellMoments {
  Scalar log_partition;  // ln sum_{t=0..cap} e^{t u}
  Scalar mean;
  Scalar variance;
};

namespace detail {

template <std::floating_point Scalar>
Scalar inv_four_sinh_sq(Scalar v) {
  const Scalar s = std::sinh(v / 2);
  return Scalar(1) / (4 * s * s);
}

// Moments for u <= 0 (q = e^u in (0, 1]) and a finite cap.
template <std::floating_point Scalar>
CellMoments<Scalar> nonpositive_moments(Scalar u, std::int64_t cap) {
  if (cap <= kHornerMaxCap) {
    const Scalar q = std::exp(u);
    Scalar s0 = 0, s1 = 0;
    for (std::int64_t t = cap; t >= 0; --t) {
      s0 = s0 * q + 1;
      s1 = s1 * q + Scalar(t);
    }
    const Scalar mean = s1 / s0;
    Scalar var = 0, w = 1;
    for (std::int64_t t = 0; t <= cap; ++t, w *= q) {
      const Scalar d = Scalar(t) - mean;
      var += d * d * w;
    }
    return {std::log(s0), mean, var / s0};
  }
  const Scalar k = Scalar(cap);
  const Scalar k1 = k + 1;
  if (k1 * std::abs(u) < Scalar(1e-2)) {
    // Expansion around the uniform distribution; odd/even in u.
    const Scalar u2 = u * u;
    const Scalar a4 = std::pow(k1, 4) - 1;
    const Scalar a6 = std::pow(k1, 6) - 1;
    const Scalar mean = k / 2 + u * k * (k + 2) / 12 - u * u2 * a4 / 720 + u * u2 * u2 * a6 / 30240;
    const Scalar var = k * (k + 2) / 12 - u2 * a4 / 240 + u2 * u2 * a6 / 6048;
    const Scalar log_z =
        std::log(k1) + u * k / 2 + u2 * k * (k + 2) / 24 - u2 * u2 * a4 / 2880 + u2 * u2 * u2 * a6 / 181440;
    return {log_z, mean, var};
  }
  // Closed forms of the finite geometric sums, written with expm1 so that
  // they stay accurate as q approaches 1.
  const Scalar log_z = std::log(-std::expm1(k1 * u)) - std::log(-std::expm1(u));
  const Scalar mean = Scalar(1) / std::expm1(-u) - k1 / std::expm1(-k1 * u);
  const Scalar var = inv_four_sinh_sq(u) - k1 * k1 * inv_four_sinh_sq(k1 * u);
  return {log_z, mean, var};
}

}  // namespace detail

/// Log-partition, mean and variance of the distribution on {0..cap}
/// proportional to e^{t u}; `cap` may be kUnbounded (geometric case, where
/// u >= 0 yields infinities).
template <std::floating_point Scalar>
CellMoments<Scalar> cell_moments(Scalar u, std::int64_t cap) {
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (cap == 0) return {0, 0, 0};
  if (cap == kUnbounded) {
    if (u >= 0) return {inf, inf, inf};
    return {-std::log(-std::expm1(u)), Scalar(1) / std::expm1(-u), detail::inv_four_sinh_sq(u)};
  }
  if (u <= 0) return detail::nonpositive_moments(u, cap);
  // Reflection t -> cap - t.
  const auto mirrored = detail::nonpositive_moments(-u, cap);
  return {Scalar(cap) * u + mirrored.log_partition, Scalar(cap) - mirrored.mean, mirrored.variance};
}

/// Parameters (p, q) of TG(x; kappa). The point mass at kappa is encoded as
/// p = 0, q = +inf.
template <std::floating_point Scalar = double>
struct TGParams {
  Kappa kappa;
  Scalar x;
  Scalar p;
  Scalar q;

  bool saturated() const { return p == 0 && std::isinf(q); }
};

namespace detail {

template <std::floating_point Scalar>
void check_mean_domain(Scalar x, Kappa kappa, const char* who) {
  if (!(x >= 0) || (kappa.is_finite() && x > Scalar(kappa.value())) || std::isinf(x))
    throw DomainError(std::string(who) + ": mean " + std::to_string(static_cast<double>(x)) +
                      " outside [0, " + to_string(kappa) + "]");
}

// sum_{t} q^t and sum_{t} t q^t for q in [0, 1].
template <std::floating_point Scalar>
Scalar mean_at_q(Scalar q, std::int64_t cap) {
  if (q == 0) return 0;
  if (cap <= kHornerMaxCap) {
    Scalar s0 = 0, s1 = 0;
    for (std::int64_t t = cap; t >= 0; --t) {
      s0 = s0 * q + 1;
      s1 = s1 * q + Scalar(t);
    }
    return s1 / s0;
  }
  return nonpositive_moments(std::log(q), cap).mean;
}

template <std::floating_point Scalar>
Scalar partition_at_q(Scalar q, std::int64_t cap) {
  if (cap <= kHornerMaxCap) {
    Scalar s0 = 0;
    for (std::int64_t t = cap; t >= 0; --t) s0 = s0 * q + 1;
    return s0;
  }
  return std::exp(nonpositive_moments(std::log(q), cap).log_partition);
}

// Solves mean(q) = x for x in (0, cap/2] by bisection on q in [0, 1], down
// to adjacent floating-point values.
template <std::floating_point Scalar>
Scalar bisect_q(Scalar x, std::int64_t cap) {
  Scalar lo = 0, hi = 1;
  for (int iter = 0; iter < 400; ++iter) {
    const Scalar mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    (mean_at_q(mid, cap) < x ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace detail

/// Solves the defining equations of TG(x; kappa) for (p, q).
template <std::floating_point Scalar>
TGParams<Scalar> solve_tg(Scalar x, Kappa kappa) {
  detail::check_mean_domain(x, kappa, "solve_tg");
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (kappa.is_infinite()) return {kappa, x, Scalar(1) / (x + 1), x / (x + 1)};
  const std::int64_t cap = kappa.value();
  const Scalar k = Scalar(cap);
  if (x == 0) return {kappa, x, 1, 0};
  if (x == k) return {kappa, x, 0, inf};
  if (2 * x == k) return {kappa, x, Scalar(1) / (k + 1), 1};
  if (2 * x > k) {
    // Complement symmetry: TG(x) is TG(kappa - x) reflected.
    const auto mirror = solve_tg(k - x, kappa);
    return {kappa, x, mirror.p * std::pow(mirror.q, k), Scalar(1) / mirror.q};
  }
  const Scalar q = detail::bisect_q(x, cap);
  return {kappa, x, Scalar(1) / detail::partition_at_q(q, cap), q};
}

/// Entropy (nats) of TG(x; kappa), the maximum entropy of any distribution
/// on {0..kappa} with mean x.
template <std::floating_point Scalar>
Scalar hmax(Scalar x, Kappa kappa) {
  detail::check_mean_domain(x, kappa, "hmax");
  if (x == 0) return 0;
  if (kappa.is_infinite()) return (x + 1) * std::log1p(x) - x * std::log(x);
  const Scalar k = Scalar(kappa.value());
  if (x == k) return 0;
  if (2 * x > k) return hmax(k - x, kappa);
  const auto tg = solve_tg(x, kappa);
  return -(std::log(tg.p) + x * std::log(tg.q));
}

/// d/dx hmax = -ln q(x; kappa); defined on the open interval (0, kappa).
template <std::floating_point Scalar>
Scalar hmax_deriv(Scalar x, Kappa kappa) {
  detail::check_mean_domain(x, kappa, "hmax_deriv");
  if (x == 0 || (kappa.is_finite() && x == Scalar(kappa.value())))
    throw DomainError("hmax_deriv: derivative diverges at the boundary");
  if (kappa.is_infinite()) return std::log1p(Scalar(1) / x);
  const Scalar k = Scalar(kappa.value());
  if (2 * x > k) return -hmax_deriv(k - x, kappa);
  return -std::log(solve_tg(x, kappa).q);
}

/// Variance of TG(x; kappa).
template <std::floating_point Scalar>
Scalar tg_variance(Scalar x, Kappa kappa) {
  detail::check_mean_domain(x, kappa, "tg_variance");
  if (kappa.is_infinite()) return x * (x + 1);
  const Scalar k = Scalar(kappa.value());
  if (x == 0 || x == k) return 0;
  if (2 * x > k) return tg_variance(k - x, kappa);
  const Scalar q = solve_tg(x, kappa).q;
  return cell_moments(std::log(q), kappa.value()).variance;
}

/// phi(x) = x^2 hmax''(x) = -x^2 q'/q. Since dx/dq = Var/q, this equals
/// -x^2 / Var(TG(x; kappa)); the removable singularity gives phi(0) = 0.
template <std::floating_point Scalar>
Scalar phi(Scalar x, Kappa kappa) {
  detail::check_mean_domain(x, kappa, "phi");
  if (kappa.is_finite() && x == Scalar(kappa.value())) throw DomainError("phi: x must be below kappa");
  if (x == 0) return 0;
  return -x * x / tg_variance(x, kappa);
}

/// J(r) = n hmax(r/n) - sum_j hmax(r alpha_j) for a probability vector alpha.
template <typename Derived>
typename Derived::Scalar entropy_loss(typename Derived::Scalar r, const Eigen::MatrixBase<Derived>& alpha,
                                      Kappa kappa) {
  using Scalar = typename Derived::Scalar;
  const Index n = alpha.size();
  if (n < 1) throw DomainError("entropy_loss: alpha must be nonempty");
  if (!(r >= 0)) throw DomainError("entropy_loss: r must be nonnegative");
  if ((alpha.array() < 0).any() || std::abs(alpha.sum() - Scalar(1)) > Scalar(1e-9))
    throw DomainError("entropy_loss: alpha must be a probability vector");
  if (kappa.is_finite()) {
    const Scalar k = Scalar(kappa.value());
    if (r * alpha.maxCoeff() > k || r / Scalar(n) > k)
      throw DomainError("entropy_loss: r * alpha_j must not exceed kappa");
  }
  Scalar lost = Scalar(n) * hmax(r / Scalar(n), kappa);
  for (Index j = 0; j < n; ++j) lost -= hmax(r * alpha[j], kappa);
  return lost;
}

/// Largest delta in (0, 1) such that phi has a positive second central
/// difference (step kappa * 1e-4) on (0, delta * kappa]; 0 when phi is not
/// convex near the origin (kappa = 1).
template <std::floating_point Scalar = double>
Scalar convexity_radius(Kappa kappa) {
  if (kappa.is_infinite()) throw DomainError("convexity_radius requires a finite kappa");
  if (kappa.value() < 1) throw DomainError("convexity_radius requires kappa >= 1");
  const Scalar k = Scalar(kappa.value());
  const Scalar h = k * Scalar(1e-4);
  auto convex_at = [&](Scalar x) { return phi(x + h, kappa) - 2 * phi(x, kappa) + phi(x - h, kappa) > 0; };

  if (!convex_at(h)) return 0;
  const Scalar coarse = 10 * h;
  const Scalar limit = k - 2 * h;
  Scalar good = h;
  Scalar bad = -1;
  for (Scalar x = h + coarse; x <= limit; x += coarse) {
    if (!convex_at(x)) {
      bad = x;
      break;
    }
    good = x;
  }
  if (bad < 0) return good / k;
  while (bad - good > h * Scalar(1e-3)) {
    const Scalar mid = (good + bad) / 2;
    (convex_at(mid) ? good : bad) = mid;
  }
  return good / k;
}

}  // namespace bct
