#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bct/maxent.hpp"

namespace bct {

enum class GapSign { positive, negative, zero };
std::string to_string(GapSign sign);

/// |gap| below this is reported as zero.
inline constexpr double kGapZeroBand = 1e-9;

/// Solver settings for comparing two nearly equal asymptotic functionals.
SolveOptions tight_solve_options();

struct CorrelationReport {
  double entropy_limit = 0;
  double indep_limit = 0;
  /// entropy_limit - indep_limit; positive means positively correlated margins.
  double gap = 0;
  GapSign sign = GapSign::zero;
  /// (max r_i)(max c_j) < delta * kappa * N.
  bool hypothesis_ok = false;
  double delta = 0;
  /// Neither margin vector is constant.
  bool strict_expected = false;
};

/// `delta` defaults to convexity_radius(kappa) for finite kappa.
CorrelationReport correlation_gap(const MarginPair& margins, Kappa kappa, std::optional<double> delta = std::nullopt,
                                  const SolveOptions& options = tight_solve_options());

struct HLossReport {
  /// m J(N/m) and sum_i J(r_i) with alpha_j = c_j / N.
  double lhs = 0;
  double rhs = 0;
  double margin = 0;
  bool holds = false;
  /// |lhs - rhs| within the equality tolerance.
  bool equality = false;
};

/// Evaluates both sides of the entropy-loss inequality. Throws DomainError
/// naming the offending cell when the rank-one table exceeds kappa.
HLossReport hloss_inequality_check(const MarginPair& margins, Kappa kappa, double equality_tol = 1e-10);

struct AttractionReport {
  double product = 0;    // (max r)(max c)
  double threshold = 0;  // delta kappa N
  double delta = 0;
  bool hypothesis_ok = false;
  bool strict_expected = false;
  /// Populated only when the hypothesis holds.
  std::optional<HLossReport> hloss;
  std::optional<CorrelationReport> correlation;
  /// sum_ij hmax(r_i c_j / N).
  double rank1_entropy = 0;
  /// entropy_limit >= rank1_entropy >= indep_limit (up to tolerance).
  bool chain_holds = false;
  /// Strict inequalities present whenever strict_expected.
  bool strict_holds = false;
};

/// Positive-correlation check for sparse margins. Requires finite kappa >= 2.
AttractionReport attraction_check(const MarginPair& margins, Kappa kappa, std::optional<double> delta = std::nullopt,
                                  const SolveOptions& options = tight_solve_options());

struct ScanPoint {
  double gamma = 0;
  bool admissible = false;
  double gap = 0;
  GapSign sign = GapSign::zero;
};

struct ScanResult {
  Kappa kappa{1};
  double eps = 0;
  int n = 0;
  std::vector<ScanPoint> points;
  /// Gamma values where the gap changes sign, located by bisection.
  std::vector<double> boundaries;
  /// Intervals of gamma on which the gap is negative.
  std::vector<std::pair<double, double>> negative_intervals;
};

struct ScanOptions {
  /// Defaults (NaN) pick a grid covering the admissible range.
  double gamma_min = std::numeric_limits<double>::quiet_NaN();
  double gamma_max = std::numeric_limits<double>::quiet_NaN();
  double gamma_step = std::numeric_limits<double>::quiet_NaN();
  double boundary_tol = 1e-4;
  int jobs = 1;
  SolveOptions solve = tight_solve_options();
};

/// Scans R = C = (g, g + eps, ..., g + (n-1) eps) over a grid of g.
ScanResult margin_scan(Kappa kappa, double eps, int n, const ScanOptions& options = {});

/// The margin vector used by margin_scan.
Eigen::VectorXd arithmetic_margins(double gamma, double eps, int n);

}  // namespace bct
