#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bct/common.hpp"

namespace bct {

/// Row sums R (length m) and column sums C (length n) of an m x n table.
///
/// Margins are stored as reals: the asymptotic functionals accept real
/// margins, while exact counting and feasibility require integral values
/// (see `is_integral`).
class MarginPair {
 public:
  MarginPair(Eigen::VectorXd rows, Eigen::VectorXd cols);
  MarginPair(const IntVector& rows, const IntVector& cols);
  MarginPair(std::initializer_list<double> rows, std::initializer_list<double> cols);

  const Eigen::VectorXd& rows() const { return rows_; }
  const Eigen::VectorXd& cols() const { return cols_; }
  Index m() const { return rows_.size(); }
  Index n() const { return cols_.size(); }

  /// Sum of row margins.
  double total() const { return rows_.sum(); }
  bool is_integral() const;
  /// Throws DomainError when the margins are not integral.
  IntVector int_rows() const;
  IntVector int_cols() const;

  MarginPair transposed() const { return MarginPair(cols_, rows_); }

 private:
  Eigen::VectorXd rows_;
  Eigen::VectorXd cols_;
};

/// Entrywise caps k_ij, each a nonnegative integer or kUnbounded.
class BoundsMatrix {
 public:
  explicit BoundsMatrix(CapMatrix caps);
  static BoundsMatrix uniform(Index m, Index n, Kappa kappa);

  Index rows() const { return caps_.rows(); }
  Index cols() const { return caps_.cols(); }
  std::int64_t operator()(Index i, Index j) const { return caps_(i, j); }
  bool is_unbounded(Index i, Index j) const { return caps_(i, j) == kUnbounded; }
  const CapMatrix& caps() const { return caps_; }

  /// The common cap when every entry is equal.
  std::optional<Kappa> uniform_value() const { return uniform_; }
  bool is_uniform() const { return uniform_.has_value(); }
  bool has_unbounded() const;

  /// Sum of row i caps, kUnbounded if any entry is unbounded.
  std::int64_t row_capacity(Index i) const;
  std::int64_t col_capacity(Index j) const;
  /// |K|; throws DomainError if any entry is unbounded.
  std::int64_t total() const;

  /// Replaces unbounded caps by min(r_i, c_j); no table entry can exceed that.
  CapMatrix finite_caps(const IntVector& rows, const IntVector& cols) const;

  BoundsMatrix transposed() const { return BoundsMatrix(caps_.transpose()); }

 private:
  CapMatrix caps_;
  std::optional<Kappa> uniform_;
};

struct ValidationIssue {
  enum class Kind { shape_mismatch, empty, negative_entry, total_mismatch, row_capacity, col_capacity };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  bool has(ValidationIssue::Kind kind) const;
};

/// Reports shape mismatches, negative entries, |R| != |C| and rows or
/// columns whose margin exceeds the sum of their caps.
ValidationReport validate(const MarginPair& margins, const BoundsMatrix& bounds, double tol = 1e-9);

struct CloneResult {
  MarginPair margins;
  BoundsMatrix bounds;
  int factor;
};

/// s-fold cloning: every margin is multiplied by s and the resulting vector
/// repeated s times; the bounds are tiled s x s.
CloneResult clone(const MarginPair& margins, const BoundsMatrix& bounds, int s);

/// Rank-one table r_i c_j / N; all zeros when N = 0.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rank1_table(const MarginPair& margins) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = margins.rows().cast<Scalar>();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c = margins.cols().cast<Scalar>();
  const Scalar total = r.sum();
  if (total == Scalar(0))
    return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(margins.m(), margins.n());
  return (r * c.transpose()) / total;
}

/// True iff at least one integer table has the given margins and caps.
/// Decided by max-flow on the bipartite row/column network.
bool feasible(const MarginPair& margins, const BoundsMatrix& bounds);

/// Real relaxation: true iff the bounded transportation polytope is nonempty.
bool feasible_real(const MarginPair& margins, const BoundsMatrix& bounds, double tol = 1e-9);

/// Cells that take the same boundary value (0 or their cap) on every real
/// table with these margins: entry is that value, or -1 for cells that can
/// move off the boundary. A cell counts as movable when it can leave the
/// boundary by more than `slack` (0.5 suffices for integer data).
CapMatrix pinned_cells(const MarginPair& margins, const BoundsMatrix& bounds, double slack);

}  // namespace bct
