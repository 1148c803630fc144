#pragma once

#include <vector>

#include "bct/tables.hpp"

namespace bct {

/// Dual variables: x_i = e^{t_i}, y_j = e^{s_j}.
struct DualPoint {
  Eigen::VectorXd t;
  Eigen::VectorXd s;
};

struct SolveOptions {
  /// Stop once the max margin violation of Z is below this.
  double tol = 1e-9;
  /// ... and the primal/dual values agree to this.
  double gap_tol = 1e-10;
  int max_sweeps = 100000;
  /// Scalar solves keep t_i + s_j inside [-bracket, bracket].
  double bracket = 40.0;
  double inner_width = 1e-13;
};

/// Row/column indices kept after forced lines are removed, with the reduced
/// margins and bounds the duals refer to.
struct ReducedProblem {
  std::vector<Index> rows;
  std::vector<Index> cols;
  MarginPair margins{Eigen::VectorXd(), Eigen::VectorXd()};
  BoundsMatrix bounds{CapMatrix()};
};

struct MaxEntSolution {
  /// Maximizer of sum hmax(z_ij) over the bounded transportation polytope.
  Eigen::MatrixXd Z;
  /// Primal value sum_ij hmax(z_ij).
  double value = 0;
  /// psi at the returned duals (the generating-function bound).
  double dual_value = 0;
  DualPoint dual;
  ReducedProblem reduced;
  /// Max margin violation of Z.
  double residual = 0;
  /// |value - dual_value|.
  double gap = 0;
  int sweeps = 0;
  /// psi after each sweep.
  std::vector<double> psi_history;
  std::vector<double> residual_history;
};

/// psi(t, s) = -<R, t> - <C, s> + sum_ij ln(1 + e^{u} + ... + e^{k_ij u}),
/// u = t_i + s_j. Unbounded caps with u >= 0 give +infinity.
double psi(const DualPoint& point, const MarginPair& margins, const BoundsMatrix& bounds);

/// Minimizes psi by exact block-coordinate updates (rows, then columns) and
/// recovers Z from the duals. Cells that sit at 0 or their cap on every
/// table, then lines whose margin is 0 or equal to their capacity, are fixed
/// first; the duals refer to what remains. Throws DomainError on infeasible
/// margins and ConvergenceError when the iteration cap is hit.
MaxEntSolution solve_dual(const MarginPair& margins, const BoundsMatrix& bounds, const SolveOptions& options = {});

/// max over Z in the kappa-bounded polytope of sum_ij hmax_kappa(z_ij).
double entropy_limit(const MarginPair& margins, Kappa kappa, const SolveOptions& options = {});

/// ln inf_{x,y>0} G(x,y) / (x^R y^C) = min psi.
double gf_log_bound(const MarginPair& margins, const BoundsMatrix& bounds, const SolveOptions& options = {});

/// -mn hmax(N/mn) + n sum_i hmax(r_i/n) + m sum_j hmax(c_j/m).
double indep_log_limit(const MarginPair& margins, Kappa kappa);

}  // namespace bct
