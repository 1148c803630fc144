#include "bct/exact_count.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include <boost/container_hash/hash.hpp>
#include <fmt/format.h>

namespace bct {

namespace {

using Residual = std::vector<std::int64_t>;

struct ResidualHash {
  std::size_t operator()(const Residual& v) const { return boost::hash_range(v.begin(), v.end()); }
};

using Layer = std::unordered_map<Residual, BigInt, ResidualHash>;

// Enumerates fills (a_0..a_{m-1}) of one column with sum `target`,
// 0 <= a_i <= limit[i], pruning when the remaining rows cannot absorb the rest.
class ColumnFiller {
 public:
  ColumnFiller(const std::vector<std::int64_t>& limit, std::int64_t target) : limit_(limit), target_(target) {
    suffix_.assign(limit_.size() + 1, 0);
    for (std::size_t i = limit_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + limit_[i];
    fill_.assign(limit_.size(), 0);
  }

  template <typename Visit>
  void run(Visit&& visit) {
    if (suffix_[0] < target_) return;
    recurse(0, target_, visit);
  }

 private:
  template <typename Visit>
  void recurse(std::size_t i, std::int64_t remaining, Visit& visit) {
    if (i == limit_.size()) {
      if (remaining == 0) visit(fill_);
      return;
    }
    const std::int64_t lo = std::max<std::int64_t>(0, remaining - suffix_[i + 1]);
    const std::int64_t hi = std::min(limit_[i], remaining);
    for (std::int64_t a = lo; a <= hi; ++a) {
      fill_[i] = a;
      recurse(i + 1, remaining - a, visit);
    }
    fill_[i] = 0;
  }

  const std::vector<std::int64_t>& limit_;
  std::int64_t target_;
  std::vector<std::int64_t> suffix_;
  std::vector<std::int64_t> fill_;
};

}  // namespace

bool knomial_in_support(std::int64_t n, std::int64_t r, Kappa kappa) {
  if (n < 0 || r < 0) return false;
  if (kappa.is_infinite()) return n > 0 || r == 0;
  return r <= n * kappa.value();
}

std::vector<BigInt> knomial_row(std::int64_t n, Kappa kappa, std::int64_t degree) {
  if (kappa.is_infinite()) throw DomainError("knomial_row requires a finite kappa");
  if (n < 0 || degree < 0) throw DomainError("knomial_row: n and degree must be nonnegative");
  const std::int64_t k = kappa.value();
  std::vector<BigInt> poly{1};
  std::vector<BigInt> next;
  for (std::int64_t step = 0; step < n; ++step) {
    const std::int64_t deg = std::min<std::int64_t>(degree, static_cast<std::int64_t>(poly.size()) - 1 + k);
    next.assign(static_cast<std::size_t>(deg + 1), 0);
    // Sliding window: next[d] = sum_{t=0..k} poly[d - t].
    BigInt window = 0;
    for (std::int64_t d = 0; d <= deg; ++d) {
      if (d < static_cast<std::int64_t>(poly.size())) window += poly[static_cast<std::size_t>(d)];
      const std::int64_t drop = d - k - 1;
      if (drop >= 0 && drop < static_cast<std::int64_t>(poly.size())) window -= poly[static_cast<std::size_t>(drop)];
      next[static_cast<std::size_t>(d)] = window;
    }
    poly.swap(next);
  }
  poly.resize(static_cast<std::size_t>(degree + 1), 0);
  return poly;
}

BigInt knomial(std::int64_t n, std::int64_t r, Kappa kappa) {
  if (!knomial_in_support(n, r, kappa)) return 0;
  if (kappa.is_infinite()) return binomial(r + n - 1, r);
  const std::int64_t k = kappa.value();
  if (k == 0) return r == 0 ? 1 : 0;
  if (k == 1) return binomial(n, r);
  const std::int64_t reflected = std::min(r, n * k - r);
  return knomial_row(n, kappa, reflected)[static_cast<std::size_t>(reflected)];
}

BigInt count_tables(const MarginPair& margins, const BoundsMatrix& bounds, const CountOptions& options) {
  if (bounds.rows() != margins.m() || bounds.cols() != margins.n())
    throw DomainError(fmt::format("bounds are {}x{} but margins imply {}x{}", bounds.rows(), bounds.cols(),
                                  margins.m(), margins.n()));
  const IntVector r = margins.int_rows();
  const IntVector c = margins.int_cols();
  if (r.sum() != c.sum()) throw DomainError(fmt::format("|R| = {} differs from |C| = {}", r.sum(), c.sum()));

  const Index m = r.size();
  const Index n = c.size();
  const CapMatrix caps = bounds.finite_caps(r, c);

  // capacity_after(i, j): sum of caps of row i over columns j+1..n-1.
  CapMatrix capacity_after = CapMatrix::Zero(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = n - 1; j > 0; --j) capacity_after(i, j - 1) = capacity_after(i, j) + caps(i, j);

  Layer layer;
  layer.emplace(Residual(r.data(), r.data() + m), BigInt(1));
  std::vector<std::int64_t> limit(static_cast<std::size_t>(m));

  for (Index j = 0; j < n; ++j) {
    Layer next;
    for (const auto& [residual, ways] : layer) {
      for (Index i = 0; i < m; ++i)
        limit[static_cast<std::size_t>(i)] = std::min(caps(i, j), residual[static_cast<std::size_t>(i)]);
      ColumnFiller filler(limit, c[j]);
      filler.run([&](const std::vector<std::int64_t>& fill) {
        Residual out(residual);
        for (Index i = 0; i < m; ++i) {
          out[static_cast<std::size_t>(i)] -= fill[static_cast<std::size_t>(i)];
          if (out[static_cast<std::size_t>(i)] > capacity_after(i, j)) return;
        }
        auto [it, inserted] = next.try_emplace(std::move(out), ways);
        if (!inserted) it->second += ways;
      });
      if (next.size() > options.state_budget)
        throw BudgetExceeded(fmt::format("count_tables: DP layer at column {} exceeds state budget {}", j + 1,
                                         options.state_budget));
    }
    layer.swap(next);
    if (layer.empty()) return 0;
  }
  const auto it = layer.find(Residual(static_cast<std::size_t>(m), 0));
  return it == layer.end() ? BigInt(0) : it->second;
}

BigInt count_cloned(const MarginPair& margins, Kappa kappa, int s, const CountOptions& options) {
  const CloneResult cloned = clone(margins, BoundsMatrix::uniform(margins.m(), margins.n(), kappa), s);
  return count_tables(cloned.margins, cloned.bounds, options);
}

double BigRatio::log() const {
  if (numerator == 0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(log_precise());
}

LogReal BigRatio::log_precise() const {
  if (numerator == 0) throw DomainError("log of a zero ratio");
  return log_of(numerator) - log_of(denominator);
}

BigRatio indep_estimate(const MarginPair& margins, Kappa kappa) {
  const IntVector r = margins.int_rows();
  const IntVector c = margins.int_cols();
  if (r.sum() != c.sum()) throw DomainError(fmt::format("|R| = {} differs from |C| = {}", r.sum(), c.sum()));
  const std::int64_t m = r.size();
  const std::int64_t n = c.size();

  BigRatio ratio;
  for (Index i = 0; i < r.size(); ++i) ratio.out_of_support |= !knomial_in_support(n, r[i], kappa);
  for (Index j = 0; j < c.size(); ++j) ratio.out_of_support |= !knomial_in_support(m, c[j], kappa);
  if (ratio.out_of_support) return ratio;

  // Row and column knomials repeat across equal margins; cache by argument.
  std::unordered_map<std::int64_t, BigInt> row_cache, col_cache;
  BigInt numerator = 1;
  for (Index i = 0; i < r.size(); ++i) {
    auto [it, inserted] = row_cache.try_emplace(r[i]);
    if (inserted) it->second = knomial(n, r[i], kappa);
    numerator *= it->second;
  }
  for (Index j = 0; j < c.size(); ++j) {
    auto [it, inserted] = col_cache.try_emplace(c[j]);
    if (inserted) it->second = knomial(m, c[j], kappa);
    numerator *= it->second;
  }
  const BigInt denominator = knomial(m * n, r.sum(), kappa);
  const BigInt g = boost::multiprecision::gcd(numerator, denominator);
  ratio.numerator = numerator / g;
  ratio.denominator = denominator / g;
  return ratio;
}

}  // namespace bct
