#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bct/exact_count.hpp"
#include "bct/simplex.hpp"

namespace bct {

// ---- omega ----------------------------------------------------------------

struct OmegaValue {
  std::int64_t n = 0;
  /// n^n / n!, with 0^0 = 1.
  BigRational value;
  double log = 0;
};

OmegaValue omega(std::int64_t n);

/// ln omega(n); exact rational below 171, log-gamma beyond.
LogReal log_omega(std::int64_t n);

/// Sum of omega(v) over the entries of V.
template <typename Derived>
BigRational Omega(const Eigen::DenseBase<Derived>& V) {
  BigRational total = 0;
  for (Index j = 0; j < V.cols(); ++j)
    for (Index i = 0; i < V.rows(); ++i) total += omega(static_cast<std::int64_t>(V(i, j))).value;
  return total;
}

/// Sum of ln omega(v) over the entries of V, i.e. the log of the product of
/// the omega(v). This is the form in which the correction factors enter
/// bm_check and the quality bound.
template <typename Derived>
LogReal log_Omega_product(const Eigen::DenseBase<Derived>& V) {
  LogReal total = 0;
  for (Index j = 0; j < V.cols(); ++j)
    for (Index i = 0; i < V.rows(); ++i) total += log_omega(static_cast<std::int64_t>(V(i, j)));
  return total;
}

struct StirlingReport {
  std::int64_t n_max = 0;
  /// n in 1..n_max where the sandwich fails.
  std::vector<std::int64_t> violations;
  /// Smallest slack on each side over all n.
  double min_lower_slack = 0;
  double min_upper_slack = 0;
  bool holds() const { return violations.empty(); }
};

/// n - ln sqrt(2 pi n) - ln(e / sqrt(2 pi)) <= ln omega(n) <= n - ln sqrt(2 pi n).
StirlingReport stirling_check(std::int64_t n_max);

// ---- Brunn-Minkowski-type inequality --------------------------------------

struct BMInstance {
  std::vector<BigRational> alpha;
  std::vector<IntVector> rows;  // R^t
  std::vector<IntVector> cols;  // C^t
  CapMatrix bounds;             // K, finite

  /// Throws DomainError unless the instance is well formed.
  void validate() const;
  /// sum_t alpha_t R^t and sum_t alpha_t C^t; DomainError if not integral.
  IntVector combined_rows() const;
  IntVector combined_cols() const;
  /// (sum_i k_ij) - c_j.
  IntVector complement(const IntVector& cols) const;
};

struct BMReport {
  double lhs = 0;
  double rhs = 0;
  /// Some T_K(R^t, C^t) is zero, so rhs = -inf.
  bool degenerate = false;
  bool holds = false;
};

inline constexpr double kBMSlack = 1e-9;

BMReport bm_check(const BMInstance& instance, const CountOptions& options = {});

struct BMTrial {
  BMInstance instance;
  BMReport report;
};

struct BMTrialsReport {
  std::uint64_t seed = 0;
  std::vector<BMTrial> trials;
  int violations = 0;
  int degenerate = 0;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Random instances with m, n <= 3, uniform kappa <= 3, N <= 6 and p <= 3,
/// resampled until the combined margins are integral.
BMInstance random_bm_instance(std::uint64_t seed);
BMTrialsReport bm_trials(int count = 100, std::uint64_t seed = kDefaultSeed, int jobs = 1,
                         const CountOptions& options = {});

// ---- concavification -------------------------------------------------------

inline constexpr std::size_t kDefaultVertexCap = 5000;

struct ConcavifyOptions {
  std::size_t vertex_cap = kDefaultVertexCap;
  CountOptions count;
  /// Significant digits kept when ln T enters the exact LP.
  int objective_digits = 30;
};

struct MarginVertex {
  IntVector rows;
  IntVector cols;
  BigInt count;
  double log_count = 0;
};

struct ConcavifyTerm {
  BigRational weight;
  std::size_t vertex = 0;
};

struct Concavification {
  /// f(R, C); -infinity outside the hull of feasible margin pairs.
  double value = 0;
  std::vector<ConcavifyTerm> support;
  bool finite() const { return value > -std::numeric_limits<double>::infinity(); }
};

/// Least concave majorant of ln T_K over margin space, as the LP over the
/// explicit set of margin pairs (R', C') with T_K(R', C') > 0.
class Concavifier {
 public:
  /// Enumerates the vertex set; BudgetExceeded beyond options.vertex_cap.
  explicit Concavifier(const BoundsMatrix& bounds, const ConcavifyOptions& options = {});

  const std::vector<MarginVertex>& vertices() const { return vertices_; }
  const BoundsMatrix& bounds() const { return bounds_; }

  /// Margins may be any reals; they are converted to rationals exactly.
  Concavification evaluate(const MarginPair& margins) const;

 private:
  BoundsMatrix bounds_;
  ConcavifyOptions options_;
  std::vector<MarginVertex> vertices_;
  RationalMatrix constraints_;
  RationalVector objective_;
};

Concavification concavify_logT(const MarginPair& margins, const BoundsMatrix& bounds,
                               const ConcavifyOptions& options = {});

/// -ln sqrt(2 pi |K|) + sum ln sqrt(2 pi r_i) + sum ln sqrt(2 pi c~_j) + (m + n) ln(e / sqrt(2 pi)).
double heart_bound(const MarginPair& margins, const BoundsMatrix& bounds);

struct FQualityReport {
  double f = 0;
  double log_count = 0;
  double heart = 0;
  /// f - ln T.
  double excess = 0;
  bool holds = false;
};

FQualityReport fquality_check(const MarginPair& margins, const BoundsMatrix& bounds,
                              const ConcavifyOptions& options = {});
/// Same, reusing an enumerated vertex set.
FQualityReport fquality_check(const MarginPair& margins, const Concavifier& concavifier);

// ---- convergence checks ----------------------------------------------------

struct KnomialLimitPoint {
  int s = 0;
  double error = 0;  // |(1/s) ln knomial(sn, sr) - n hmax(r/n)|
};

struct KnomialLimitReport {
  double limit = 0;  // n hmax(r/n)
  std::vector<KnomialLimitPoint> points;
  /// Strictly decreasing over the second half of the s values (or all zero).
  bool eventually_decreasing = false;
  /// max e(s) s / ln s over the first half of the s values (s > 1).
  double fitted_A = 0;
  /// e(s) <= fitted_A ln(s) / s on the remaining s values.
  bool remainder_bound_holds = false;
  bool holds() const { return eventually_decreasing && remainder_bound_holds; }
};

KnomialLimitReport knomial_limit_check(std::int64_t n, std::int64_t r, Kappa kappa, const std::vector<int>& s_list);

struct UpperBoundPoint {
  int s = 0;
  BigInt count;
  /// (1/s^2) ln count.
  double normalized = 0;
  double deficit = 0;  // entropy_limit - normalized
  bool holds = false;
};

struct UpperBoundReport {
  double entropy_limit = 0;
  std::vector<UpperBoundPoint> points;
  /// False when the count budget ran out before the last s.
  bool complete = true;
  /// Deficits strictly decrease along the tested s.
  bool decreasing = false;
  bool holds() const;
};

UpperBoundReport upper_bound_check(const MarginPair& margins, Kappa kappa, const std::vector<int>& s_list,
                                   const CountOptions& options = {});

}  // namespace bct
