#pragma once

#include <cstddef>
#include <vector>

#include "bct/tables.hpp"

namespace bct {

inline constexpr std::size_t kDefaultStateBudget = 10'000'000;

struct CountOptions {
  /// Maximum number of distinct residual vectors alive in one DP layer.
  std::size_t state_budget = kDefaultStateBudget;
};

/// True iff 0 <= r <= n*kappa (every r >= 0 when kappa is infinite).
bool knomial_in_support(std::int64_t n, std::int64_t r, Kappa kappa);

/// Coefficient of x^r in (1 + x + ... + x^kappa)^n; zero outside the support.
/// kappa = inf gives binomial(r + n - 1, r).
BigInt knomial(std::int64_t n, std::int64_t r, Kappa kappa);

/// Coefficients of x^0 .. x^degree of (1 + x + ... + x^kappa)^n (finite kappa).
std::vector<BigInt> knomial_row(std::int64_t n, Kappa kappa, std::int64_t degree);

/// Exact number of nonnegative integer tables with the given margins and
/// caps. Column-by-column dynamic program over residual row sums.
BigInt count_tables(const MarginPair& margins, const BoundsMatrix& bounds, const CountOptions& options = {});

/// count_tables applied to the s-fold clone of (margins, uniform kappa).
BigInt count_cloned(const MarginPair& margins, Kappa kappa, int s, const CountOptions& options = {});

/// Exact nonnegative ratio with a log view that never overflows.
struct BigRatio {
  BigInt numerator = 0;
  BigInt denominator = 1;
  /// Set when some margin lies outside the support of its knomial.
  bool out_of_support = false;

  bool is_zero() const { return numerator == 0; }
  BigRational value() const { return BigRational(numerator, denominator); }
  /// Natural log; -infinity for zero.
  double log() const;
  LogReal log_precise() const;
};

/// Independence estimate: knomial(mn, N)^-1 * prod knomial(n, r_i) * prod knomial(m, c_j).
BigRatio indep_estimate(const MarginPair& margins, Kappa kappa);

}  // namespace bct
