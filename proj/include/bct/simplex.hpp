#pragma once

#include <vector>

#include <boost/multiprecision/eigen.hpp>

#include "bct/common.hpp"

namespace bct {

using RationalMatrix = Eigen::Matrix<BigRational, Eigen::Dynamic, Eigen::Dynamic>;
using RationalVector = Eigen::Matrix<BigRational, Eigen::Dynamic, 1>;

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  BigRational value;
  RationalVector x;
  int pivots = 0;
};

struct SimplexOptions {
  /// Consecutive degenerate pivots after which Dantzig's rule gives way to Bland's.
  int degenerate_streak = 50;
  int max_pivots = 100000;
};

/// Maximizes c.x subject to A x = b, x >= 0 in exact rational arithmetic
/// (two-phase tableau method). Redundant equality rows are dropped.
LpResult simplex_maximize(const RationalMatrix& A, const RationalVector& b, const RationalVector& c,
                          const SimplexOptions& options = {});

}  // namespace bct
