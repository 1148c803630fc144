#include "bct/tables.hpp"

#include <algorithm>
#include <cmath>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>
#include <fmt/format.h>

namespace bct {

namespace {

Eigen::VectorXd to_real(const IntVector& v) { return v.cast<double>(); }

IntVector to_int(const Eigen::VectorXd& v, const char* what) {
  IntVector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    if (!is_integral(v[i]) || v[i] < 0)
      throw DomainError(fmt::format("{} margins must be nonnegative integers (entry {} = {})", what, i, v[i]));
    out[i] = static_cast<std::int64_t>(std::llround(v[i]));
  }
  return out;
}

// Max-flow value from a source through rows and columns to a sink.
template <typename Capacity>
Capacity bipartite_flow(const std::vector<Capacity>& row_cap, const std::vector<Capacity>& col_cap,
                        const std::vector<std::vector<Capacity>>& cell_cap) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, Capacity,
                      boost::property<boost::edge_residual_capacity_t, Capacity,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;

  const std::size_t m = row_cap.size();
  const std::size_t n = col_cap.size();
  Graph g(m + n + 2);
  const std::size_t source = m + n;
  const std::size_t sink = m + n + 1;
  auto capacity = boost::get(boost::edge_capacity, g);
  auto reverse = boost::get(boost::edge_reverse, g);

  auto add = [&](std::size_t u, std::size_t v, Capacity c) {
    auto e = boost::add_edge(u, v, g).first;
    auto back = boost::add_edge(v, u, g).first;
    capacity[e] = c;
    capacity[back] = 0;
    reverse[e] = back;
    reverse[back] = e;
  };
  for (std::size_t i = 0; i < m; ++i) add(source, i, row_cap[i]);
  for (std::size_t j = 0; j < n; ++j) add(m + j, sink, col_cap[j]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cell_cap[i][j] > 0) add(i, m + j, cell_cap[i][j]);
  return boost::push_relabel_max_flow(g, source, sink);
}

}  // namespace

MarginPair::MarginPair(Eigen::VectorXd rows, Eigen::VectorXd cols) : rows_(std::move(rows)), cols_(std::move(cols)) {}

MarginPair::MarginPair(const IntVector& rows, const IntVector& cols) : rows_(to_real(rows)), cols_(to_real(cols)) {}

MarginPair::MarginPair(std::initializer_list<double> rows, std::initializer_list<double> cols)
    : rows_(static_cast<Index>(rows.size())), cols_(static_cast<Index>(cols.size())) {
  std::copy(rows.begin(), rows.end(), rows_.data());
  std::copy(cols.begin(), cols.end(), cols_.data());
}

bool MarginPair::is_integral() const {
  auto integral = [](const Eigen::VectorXd& v) {
    return std::all_of(v.data(), v.data() + v.size(), [](double x) { return bct::is_integral(x); });
  };
  return integral(rows_) && integral(cols_);
}

IntVector MarginPair::int_rows() const { return to_int(rows_, "row"); }
IntVector MarginPair::int_cols() const { return to_int(cols_, "column"); }

BoundsMatrix::BoundsMatrix(CapMatrix caps) : caps_(std::move(caps)) {
  if ((caps_.array() < 0).any()) throw DomainError("bounds must be nonnegative");
  if (caps_.size() > 0 && (caps_.array() == caps_(0, 0)).all()) uniform_ = Kappa(caps_(0, 0));
}

BoundsMatrix BoundsMatrix::uniform(Index m, Index n, Kappa kappa) {
  return BoundsMatrix(CapMatrix::Constant(m, n, kappa.value()));
}

bool BoundsMatrix::has_unbounded() const { return (caps_.array() == kUnbounded).any(); }

std::int64_t BoundsMatrix::row_capacity(Index i) const {
  std::int64_t sum = 0;
  for (Index j = 0; j < cols(); ++j) {
    if (caps_(i, j) == kUnbounded) return kUnbounded;
    sum += caps_(i, j);
  }
  return sum;
}

std::int64_t BoundsMatrix::col_capacity(Index j) const {
  std::int64_t sum = 0;
  for (Index i = 0; i < rows(); ++i) {
    if (caps_(i, j) == kUnbounded) return kUnbounded;
    sum += caps_(i, j);
  }
  return sum;
}

std::int64_t BoundsMatrix::total() const {
  if (has_unbounded()) throw DomainError("|K| is undefined for unbounded caps");
  return caps_.sum();
}

CapMatrix BoundsMatrix::finite_caps(const IntVector& r, const IntVector& c) const {
  CapMatrix out = caps_;
  for (Index i = 0; i < rows(); ++i)
    for (Index j = 0; j < cols(); ++j)
      if (out(i, j) == kUnbounded) out(i, j) = std::min(r[i], c[j]);
  return out;
}

bool ValidationReport::has(ValidationIssue::Kind kind) const {
  return std::any_of(issues.begin(), issues.end(), [kind](const ValidationIssue& x) { return x.kind == kind; });
}

ValidationReport validate(const MarginPair& margins, const BoundsMatrix& bounds, double tol) {
  using Kind = ValidationIssue::Kind;
  ValidationReport report;
  const Index m = margins.m();
  const Index n = margins.n();
  if (m < 1 || n < 1) {
    report.issues.push_back({Kind::empty, "margins must have at least one row and one column"});
    return report;
  }
  if (bounds.rows() != m || bounds.cols() != n) {
    report.issues.push_back({Kind::shape_mismatch, fmt::format("bounds are {}x{} but margins imply {}x{}",
                                                               bounds.rows(), bounds.cols(), m, n)});
    return report;
  }
  for (Index i = 0; i < m; ++i)
    if (margins.rows()[i] < 0)
      report.issues.push_back({Kind::negative_entry, fmt::format("r_{} = {} is negative", i + 1, margins.rows()[i])});
  for (Index j = 0; j < n; ++j)
    if (margins.cols()[j] < 0)
      report.issues.push_back({Kind::negative_entry, fmt::format("c_{} = {} is negative", j + 1, margins.cols()[j])});

  const double rsum = margins.rows().sum();
  const double csum = margins.cols().sum();
  const bool integral = margins.is_integral();
  if ((integral && rsum != csum) || (!integral && std::abs(rsum - csum) > tol))
    report.issues.push_back({Kind::total_mismatch, fmt::format("|R| = {} differs from |C| = {}", rsum, csum)});

  for (Index i = 0; i < m; ++i) {
    const auto cap = bounds.row_capacity(i);
    if (cap != kUnbounded && margins.rows()[i] > static_cast<double>(cap) + tol)
      report.issues.push_back({Kind::row_capacity, fmt::format("r_{} = {} exceeds its row capacity {}", i + 1,
                                                               margins.rows()[i], cap)});
  }
  for (Index j = 0; j < n; ++j) {
    const auto cap = bounds.col_capacity(j);
    if (cap != kUnbounded && margins.cols()[j] > static_cast<double>(cap) + tol)
      report.issues.push_back({Kind::col_capacity, fmt::format("c_{} = {} exceeds its column capacity {}", j + 1,
                                                               margins.cols()[j], cap)});
  }
  return report;
}

CloneResult clone(const MarginPair& margins, const BoundsMatrix& bounds, int s) {
  if (s < 1) throw DomainError("clone factor must be at least 1");
  const Index m = margins.m();
  const Index n = margins.n();
  if (bounds.rows() != m || bounds.cols() != n) throw DomainError("bounds shape does not match margins");
  Eigen::VectorXd rows = margins.rows().replicate(s, 1) * static_cast<double>(s);
  Eigen::VectorXd cols = margins.cols().replicate(s, 1) * static_cast<double>(s);
  CapMatrix caps = bounds.caps().replicate(s, s);
  return {MarginPair(std::move(rows), std::move(cols)), BoundsMatrix(std::move(caps)), s};
}

bool feasible(const MarginPair& margins, const BoundsMatrix& bounds) {
  if (bounds.rows() != margins.m() || bounds.cols() != margins.n())
    throw DomainError("bounds shape does not match margins");
  const IntVector r = margins.int_rows();
  const IntVector c = margins.int_cols();
  if (r.sum() != c.sum()) return false;
  const CapMatrix caps = bounds.finite_caps(r, c);
  std::vector<std::int64_t> rc(r.data(), r.data() + r.size());
  std::vector<std::int64_t> cc(c.data(), c.data() + c.size());
  std::vector<std::vector<std::int64_t>> cell(r.size(), std::vector<std::int64_t>(c.size()));
  for (Index i = 0; i < r.size(); ++i)
    for (Index j = 0; j < c.size(); ++j) cell[i][j] = caps(i, j);
  return bipartite_flow<std::int64_t>(rc, cc, cell) == r.sum();
}

bool feasible_real(const MarginPair& margins, const BoundsMatrix& bounds, double tol) {
  if (bounds.rows() != margins.m() || bounds.cols() != margins.n())
    throw DomainError("bounds shape does not match margins");
  if ((margins.rows().array() < -tol).any() || (margins.cols().array() < -tol).any()) return false;
  const double total = margins.total();
  if (std::abs(total - margins.cols().sum()) > tol) return false;
  std::vector<double> rc(margins.rows().data(), margins.rows().data() + margins.m());
  std::vector<double> cc(margins.cols().data(), margins.cols().data() + margins.n());
  std::vector<std::vector<double>> cell(margins.m(), std::vector<double>(margins.n()));
  for (Index i = 0; i < margins.m(); ++i)
    for (Index j = 0; j < margins.n(); ++j)
      cell[i][j] = bounds.is_unbounded(i, j) ? std::min(rc[i], cc[j]) : static_cast<double>(bounds(i, j));
  return bipartite_flow<double>(rc, cc, cell) >= total - tol * std::max(1.0, total);
}

namespace {

// Max-flow feasibility with per-cell lower bounds lo <= z_ij <= hi.
bool flow_feasible(const MarginPair& margins, const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi) {
  Eigen::VectorXd r = margins.rows() - lo.rowwise().sum();
  Eigen::VectorXd c = margins.cols() - lo.colwise().sum().transpose();
  if ((r.array() < 0).any() || (c.array() < 0).any() || (hi.array() < lo.array()).any()) return false;
  std::vector<double> rc(r.data(), r.data() + r.size());
  std::vector<double> cc(c.data(), c.data() + c.size());
  std::vector<std::vector<double>> cell(r.size(), std::vector<double>(c.size()));
  for (Index i = 0; i < r.size(); ++i)
    for (Index j = 0; j < c.size(); ++j) cell[i][j] = hi(i, j) - lo(i, j);
  const double total = r.sum();
  return bipartite_flow<double>(rc, cc, cell) >= total - 1e-12 * std::max(1.0, total);
}

}  // namespace

CapMatrix pinned_cells(const MarginPair& margins, const BoundsMatrix& bounds, double slack) {
  const Index m = margins.m();
  const Index n = margins.n();
  Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(m, n), hi(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      hi(i, j) = bounds.is_unbounded(i, j) ? std::min(margins.rows()[i], margins.cols()[j])
                                           : static_cast<double>(bounds(i, j));
  CapMatrix pinned = CapMatrix::Constant(m, n, -1);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      if (bounds(i, j) == 0) pinned(i, j) = 0;

  // A table with every movable cell strictly inside its box settles it at once.
  const double tau = 1e-7 * std::max(1.0, margins.total()) / static_cast<double>(std::max<Index>(1, m * n));
  Eigen::MatrixXd lo_all = lo, hi_all = hi;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      if (pinned(i, j) < 0) {
        lo_all(i, j) = std::min(tau, hi(i, j));
        if (!bounds.is_unbounded(i, j)) hi_all(i, j) = std::max(hi(i, j) - tau, lo_all(i, j));
      }
  if (flow_feasible(margins, lo_all, hi_all)) return pinned;

  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      if (pinned(i, j) >= 0) continue;
      Eigen::MatrixXd l = lo, h = hi;
      l(i, j) = std::min(slack, hi(i, j));
      if (hi(i, j) < slack || !flow_feasible(margins, l, h)) {
        pinned(i, j) = 0;
        continue;
      }
      if (bounds.is_unbounded(i, j)) continue;
      l(i, j) = 0;
      h(i, j) = hi(i, j) - slack;
      if (!flow_feasible(margins, l, h)) pinned(i, j) = bounds(i, j);
    }
  return pinned;
}

}  // namespace bct
