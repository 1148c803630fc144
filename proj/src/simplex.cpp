#include "bct/simplex.hpp"

#include <optional>

namespace bct {

namespace {

class Tableau {
 public:
  Tableau(const RationalMatrix& A, const RationalVector& b) : rows_(A.rows()), cols_(A.cols()) {
    const Index total = cols_ + rows_;
    t_.assign(static_cast<std::size_t>(rows_), std::vector<BigRational>(static_cast<std::size_t>(total)));
    rhs_.resize(static_cast<std::size_t>(rows_));
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Index i = 0; i < rows_; ++i) {
      const bool flip = b[i] < 0;
      for (Index j = 0; j < cols_; ++j) at(i, j) = flip ? BigRational(-A(i, j)) : A(i, j);
      at(i, cols_ + i) = 1;
      rhs_[i] = flip ? BigRational(-b[i]) : b[i];
      basis_[i] = cols_ + i;
    }
    reduced_.assign(static_cast<std::size_t>(total), BigRational(0));
  }

  Index rows() const { return static_cast<Index>(rhs_.size()); }

  // Loads the reduced costs of `cost` (indexed over every column) for the
  // current basis; columns at or beyond `eligible` never enter.
  void set_objective(const std::vector<BigRational>& cost, Index eligible) {
    eligible_ = eligible;
    value_ = 0;
    for (std::size_t j = 0; j < reduced_.size(); ++j) reduced_[j] = cost[j];
    for (Index i = 0; i < rows(); ++i) {
      const BigRational& cb = cost[static_cast<std::size_t>(basis_[i])];
      if (cb == 0) continue;
      value_ += cb * rhs_[i];
      for (std::size_t j = 0; j < reduced_.size(); ++j)
        if (t_[i][j] != 0) reduced_[j] -= cb * t_[i][j];
    }
  }

  // Returns false when the objective is unbounded.
  bool optimize(const SimplexOptions& options, int& pivots) {
    int streak = 0;
    while (true) {
      const std::optional<Index> enter = entering(streak >= options.degenerate_streak);
      if (!enter) return true;
      const std::optional<Index> leave = leaving(*enter);
      if (!leave) return false;
      streak = rhs_[*leave] == 0 ? streak + 1 : 0;
      pivot(*leave, *enter);
      if (++pivots > options.max_pivots) throw ConvergenceError("simplex pivot limit reached", {});
    }
  }

  // After phase one: pivots artificial columns out of the basis or drops
  // the rows they sit in when those rows are redundant.
  void expel_artificials() {
    for (Index i = 0; i < rows();) {
      if (basis_[i] < cols_) {
        ++i;
        continue;
      }
      Index j = 0;
      while (j < cols_ && at(i, j) == 0) ++j;
      if (j < cols_) {
        pivot(i, j);
        ++i;
      } else {
        t_.erase(t_.begin() + i);
        rhs_.erase(rhs_.begin() + i);
        basis_.erase(basis_.begin() + i);
      }
    }
  }

  const BigRational& value() const { return value_; }

  RationalVector solution() const {
    RationalVector x = RationalVector::Zero(cols_);
    for (Index i = 0; i < rows(); ++i)
      if (basis_[i] < cols_) x[basis_[i]] = rhs_[i];
    return x;
  }

 private:
  BigRational& at(Index i, Index j) { return t_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

  std::optional<Index> entering(bool bland) const {
    std::optional<Index> best;
    for (Index j = 0; j < eligible_; ++j) {
      const BigRational& d = reduced_[static_cast<std::size_t>(j)];
      if (d <= 0) continue;
      if (bland) return j;
      if (!best || d > reduced_[static_cast<std::size_t>(*best)]) best = j;
    }
    return best;
  }

  std::optional<Index> leaving(Index enter) const {
    std::optional<Index> best;
    BigRational best_ratio;
    for (Index i = 0; i < rows(); ++i) {
      const BigRational& a = t_[i][static_cast<std::size_t>(enter)];
      if (a <= 0) continue;
      BigRational ratio = rhs_[i] / a;
      if (!best || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[*best])) {
        best = i;
        best_ratio = std::move(ratio);
      }
    }
    return best;
  }

  void pivot(Index r, Index e) {
    auto& row = t_[r];
    const BigRational inv = 1 / row[static_cast<std::size_t>(e)];
    for (auto& v : row)
      if (v != 0) v *= inv;
    rhs_[r] *= inv;
    auto eliminate = [&](std::vector<BigRational>& target, BigRational& target_rhs, bool objective) {
      const BigRational f = target[static_cast<std::size_t>(e)];
      if (f == 0) return;
      for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] != 0) target[j] -= f * row[j];
      if (objective)
        target_rhs += f * rhs_[r];
      else
        target_rhs -= f * rhs_[r];
    };
    for (Index i = 0; i < rows(); ++i)
      if (i != r) eliminate(t_[i], rhs_[i], false);
    eliminate(reduced_, value_, true);
    basis_[r] = e;
  }

  Index rows_;
  Index cols_;
  Index eligible_ = 0;
  std::vector<std::vector<BigRational>> t_;
  std::vector<BigRational> rhs_;
  std::vector<Index> basis_;
  std::vector<BigRational> reduced_;
  BigRational value_;
};

}  // namespace

LpResult simplex_maximize(const RationalMatrix& A, const RationalVector& b, const RationalVector& c,
                          const SimplexOptions& options) {
  if (A.rows() != b.size() || A.cols() != c.size()) throw DomainError("simplex_maximize: dimension mismatch");
  const Index m = A.rows();
  const Index n = A.cols();
  LpResult result;
  Tableau tableau(A, b);

  std::vector<BigRational> cost(static_cast<std::size_t>(n + m), BigRational(0));
  for (Index i = 0; i < m; ++i) cost[static_cast<std::size_t>(n + i)] = -1;
  tableau.set_objective(cost, n);
  tableau.optimize(options, result.pivots);
  if (tableau.value() < 0) {
    result.status = LpStatus::infeasible;
    return result;
  }
  tableau.expel_artificials();

  for (Index j = 0; j < n + m; ++j) cost[static_cast<std::size_t>(j)] = j < n ? c[j] : BigRational(0);
  tableau.set_objective(cost, n);
  if (!tableau.optimize(options, result.pivots)) {
    result.status = LpStatus::unbounded;
    return result;
  }
  result.status = LpStatus::optimal;
  result.value = tableau.value();
  result.x = tableau.solution();
  return result;
}

}  // namespace bct
