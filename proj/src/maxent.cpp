#include "bct/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bct/truncated_geometric.hpp"

namespace bct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Preprocessed {
  Eigen::MatrixXd Z;
  Eigen::VectorXd rows;  // margins left for the active part
  Eigen::VectorXd cols;
  std::vector<bool> row_active;
  std::vector<bool> col_active;
};

// Fixes rows/columns whose margin is 0 or equal to their (active) capacity,
// repeating until nothing changes.
Preprocessed remove_forced_lines(const MarginPair& margins, const BoundsMatrix& bounds) {
  const Index m = margins.m();
  const Index n = margins.n();
  Preprocessed out{Eigen::MatrixXd::Zero(m, n), margins.rows(), margins.cols(),
                   std::vector<bool>(static_cast<std::size_t>(m), true),
                   std::vector<bool>(static_cast<std::size_t>(n), true)};
  const double eps = 1e-12 * std::max(1.0, margins.total());

  auto capacity = [&](Index line, bool is_row) {
    double sum = 0;
    const Index len = is_row ? n : m;
    for (Index o = 0; o < len; ++o) {
      const auto at = static_cast<std::size_t>(o);
      const bool other_active = is_row ? out.col_active[at] : out.row_active[at];
      if (!other_active) continue;
      const std::int64_t cap = is_row ? bounds(line, o) : bounds(o, line);
      if (cap == kUnbounded) return kInf;
      sum += static_cast<double>(cap);
    }
    return sum;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (Index i = 0; i < m; ++i) {
      if (!out.row_active[static_cast<std::size_t>(i)]) continue;
      const double cap = capacity(i, true);
      if (out.rows[i] <= eps) {
        out.row_active[static_cast<std::size_t>(i)] = false;
        changed = true;
      } else if (out.rows[i] >= cap - eps) {
        for (Index j = 0; j < n; ++j) {
          if (!out.col_active[static_cast<std::size_t>(j)]) continue;
          out.Z(i, j) = static_cast<double>(bounds(i, j));
          out.cols[j] -= out.Z(i, j);
          if (std::abs(out.cols[j]) <= eps) out.cols[j] = 0;
        }
        out.row_active[static_cast<std::size_t>(i)] = false;
        changed = true;
      }
    }
    for (Index j = 0; j < n; ++j) {
      if (!out.col_active[static_cast<std::size_t>(j)]) continue;
      const double cap = capacity(j, false);
      if (out.cols[j] <= eps) {
        out.col_active[static_cast<std::size_t>(j)] = false;
        changed = true;
      } else if (out.cols[j] >= cap - eps) {
        for (Index i = 0; i < m; ++i) {
          if (!out.row_active[static_cast<std::size_t>(i)]) continue;
          out.Z(i, j) = static_cast<double>(bounds(i, j));
          out.rows[i] -= out.Z(i, j);
          if (std::abs(out.rows[i]) <= eps) out.rows[i] = 0;
        }
        out.col_active[static_cast<std::size_t>(j)] = false;
        changed = true;
      }
    }
  }
  return out;
}

// Solves sum_k mean(x + offset_k; cap_k) = target for x. The left side is
// increasing in x; bisection on [lo, hi] with Newton steps taken whenever
// they stay inside the bracket.
double solve_line(const Eigen::VectorXd& offsets, const std::vector<std::int64_t>& caps, double target,
                  double bracket, double width) {
  double lo = -bracket - offsets.maxCoeff();
  double hi = bracket - offsets.minCoeff();
  for (std::size_t k = 0; k < caps.size(); ++k)
    if (caps[k] == kUnbounded) hi = std::min(hi, -offsets[static_cast<Index>(k)]);

  auto eval = [&](double x, double& slope) {
    double total = 0;
    slope = 0;
    for (std::size_t k = 0; k < caps.size(); ++k) {
      const auto mom = cell_moments(x + offsets[static_cast<Index>(k)], caps[k]);
      total += mom.mean;
      slope += mom.variance;
    }
    return total - target;
  };

  double slope = 0;
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double f = eval(x, slope);
    if (std::abs(f) <= 1e-15 * std::max(1.0, target)) return x;
    (f < 0 ? lo : hi) = x;
    if (hi - lo <= width * std::max(1.0, std::abs(x))) break;
    const double newton = x - f / slope;
    x = (std::isfinite(newton) && newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
  }
  return x;
}

}  // namespace

double psi(const DualPoint& point, const MarginPair& margins, const BoundsMatrix& bounds) {
  const Index m = margins.m();
  const Index n = margins.n();
  if (point.t.size() != m || point.s.size() != n || bounds.rows() != m || bounds.cols() != n)
    throw DomainError("psi: dimension mismatch");
  double value = -margins.rows().dot(point.t) - margins.cols().dot(point.s);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) value += cell_moments(point.t[i] + point.s[j], bounds(i, j)).log_partition;
  return value;
}

MaxEntSolution solve_dual(const MarginPair& margins, const BoundsMatrix& bounds, const SolveOptions& options) {
  const ValidationReport report = validate(margins, bounds);
  if (!report.ok()) throw DomainError("solve_dual: " + report.issues.front().message);
  const bool is_feasible = margins.is_integral() ? feasible(margins, bounds) : feasible_real(margins, bounds);
  if (!is_feasible) throw DomainError("solve_dual: no table satisfies the margins and bounds");

  const Index m = margins.m();
  const Index n = margins.n();

  // Cells stuck at 0 or their cap on every table become cap-0 cells with the
  // stuck value moved into Z.
  const double slack = margins.is_integral() ? 0.5 : 1e-9 * std::max(1.0, margins.total());
  const CapMatrix pinned = pinned_cells(margins, bounds, slack);
  Eigen::MatrixXd Z0 = Eigen::MatrixXd::Zero(m, n);
  CapMatrix live_caps = bounds.caps();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      if (pinned(i, j) >= 0) {
        Z0(i, j) = static_cast<double>(pinned(i, j));
        live_caps(i, j) = 0;
      }
  const BoundsMatrix live_bounds(live_caps);
  Eigen::VectorXd live_rows = margins.rows() - Z0.rowwise().sum();
  Eigen::VectorXd live_cols = margins.cols() - Z0.colwise().sum().transpose();
  live_rows = live_rows.cwiseMax(0.0);
  live_cols = live_cols.cwiseMax(0.0);
  Preprocessed pre = remove_forced_lines(MarginPair(live_rows, live_cols), live_bounds);
  pre.Z += Z0;

  MaxEntSolution sol;
  for (Index i = 0; i < m; ++i)
    if (pre.row_active[static_cast<std::size_t>(i)]) sol.reduced.rows.push_back(i);
  for (Index j = 0; j < n; ++j)
    if (pre.col_active[static_cast<std::size_t>(j)]) sol.reduced.cols.push_back(j);
  const Index ma = static_cast<Index>(sol.reduced.rows.size());
  const Index na = static_cast<Index>(sol.reduced.cols.size());

  auto finish = [&](MaxEntSolution& s) {
    s.residual = std::max((s.Z.rowwise().sum() - margins.rows()).cwiseAbs().maxCoeff(),
                          (s.Z.colwise().sum().transpose() - margins.cols()).cwiseAbs().maxCoeff());
    s.gap = std::abs(s.value - s.dual_value);
  };

  if (ma == 0 || na == 0) {
    if (ma != na && (pre.rows.cwiseAbs().sum() > 1e-9 || pre.cols.cwiseAbs().sum() > 1e-9))
      throw DomainError("solve_dual: forced lines leave an inconsistent remainder");
    sol.Z = pre.Z;
    sol.dual = {Eigen::VectorXd(0), Eigen::VectorXd(0)};
    finish(sol);
    return sol;
  }

  Eigen::VectorXd r(ma), c(na);
  CapMatrix caps(ma, na);
  for (Index a = 0; a < ma; ++a) r[a] = pre.rows[sol.reduced.rows[static_cast<std::size_t>(a)]];
  for (Index b = 0; b < na; ++b) c[b] = pre.cols[sol.reduced.cols[static_cast<std::size_t>(b)]];
  for (Index a = 0; a < ma; ++a)
    for (Index b = 0; b < na; ++b)
      caps(a, b) =
          live_bounds(sol.reduced.rows[static_cast<std::size_t>(a)], sol.reduced.cols[static_cast<std::size_t>(b)]);
  sol.reduced.margins = MarginPair(r, c);
  sol.reduced.bounds = BoundsMatrix(caps);

  // Start from the exact row solution of a constant-column problem.
  Eigen::VectorXd t(ma), s = Eigen::VectorXd::Zero(na);
  for (Index a = 0; a < ma; ++a) {
    bool unbounded = false;
    double cap_sum = 0;
    for (Index b = 0; b < na; ++b) {
      unbounded |= caps(a, b) == kUnbounded;
      if (caps(a, b) != kUnbounded) cap_sum += static_cast<double>(caps(a, b));
    }
    const Kappa mean_cap = unbounded ? Kappa::infinite() : Kappa(std::max<std::int64_t>(1, std::llround(cap_sum / na)));
    double x = r[a] / static_cast<double>(na);
    if (mean_cap.is_finite()) x = std::min(x, 0.999 * static_cast<double>(mean_cap.value()));
    t[a] = std::clamp(std::log(solve_tg(x, mean_cap).q), -options.bracket, options.bracket);
    if (unbounded) t[a] = std::min(t[a], -1e-6);
  }

  std::vector<std::int64_t> row_caps(static_cast<std::size_t>(na)), col_caps(static_cast<std::size_t>(ma));
  Eigen::MatrixXd Za(ma, na);
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (Index a = 0; a < ma; ++a) {
      for (Index b = 0; b < na; ++b) row_caps[static_cast<std::size_t>(b)] = caps(a, b);
      t[a] = solve_line(s, row_caps, r[a], options.bracket, options.inner_width);
    }
    for (Index b = 0; b < na; ++b) {
      for (Index a = 0; a < ma; ++a) col_caps[static_cast<std::size_t>(a)] = caps(a, b);
      s[b] = solve_line(t, col_caps, c[b], options.bracket, options.inner_width);
    }
    const double shift = t.mean();
    t.array() -= shift;
    s.array() += shift;

    double primal = 0;
    for (Index a = 0; a < ma; ++a)
      for (Index b = 0; b < na; ++b) {
        const double u = t[a] + s[b];
        const auto mom = cell_moments(u, caps(a, b));
        Za(a, b) = mom.mean;
        // Entropy of TG with q = e^u: ln(1/p) - z ln q.
        primal += mom.log_partition - (mom.mean == 0 ? 0.0 : mom.mean * u);
      }
    const double residual = std::max((Za.rowwise().sum() - r).cwiseAbs().maxCoeff(),
                                     (Za.colwise().sum().transpose() - c).cwiseAbs().maxCoeff());
    const double dual_value = psi({t, s}, sol.reduced.margins, sol.reduced.bounds);
    sol.psi_history.push_back(dual_value);
    sol.residual_history.push_back(residual);
    sol.sweeps = sweep;

    if (!std::isfinite(residual) || !std::isfinite(dual_value))
      throw ConvergenceError("solve_dual: non-finite iterate", sol.residual_history);
    if (residual < options.tol && std::abs(primal - dual_value) < options.gap_tol) {
      sol.Z = pre.Z;
      for (Index a = 0; a < ma; ++a)
        for (Index b = 0; b < na; ++b)
          sol.Z(sol.reduced.rows[static_cast<std::size_t>(a)], sol.reduced.cols[static_cast<std::size_t>(b)]) +=
              Za(a, b);
      sol.value = primal;
      sol.dual_value = dual_value;
      sol.dual = {t, s};
      finish(sol);
      return sol;
    }
  }
  throw ConvergenceError(
      fmt::format("solve_dual: residual {:.3e} after {} sweeps; the maximizer may lie on a lower-dimensional face",
                  sol.residual_history.back(), options.max_sweeps),
      sol.residual_history);
}

double entropy_limit(const MarginPair& margins, Kappa kappa, const SolveOptions& options) {
  return solve_dual(margins, BoundsMatrix::uniform(margins.m(), margins.n(), kappa), options).value;
}

double gf_log_bound(const MarginPair& margins, const BoundsMatrix& bounds, const SolveOptions& options) {
  return solve_dual(margins, bounds, options).dual_value;
}

double indep_log_limit(const MarginPair& margins, Kappa kappa) {
  const Index m = margins.m();
  const Index n = margins.n();
  const double total = margins.total();
  if (std::abs(total - margins.cols().sum()) > 1e-9 * std::max(1.0, total))
    throw DomainError("indep_log_limit: |R| differs from |C|");
  if ((margins.rows().array() < 0).any() || (margins.cols().array() < 0).any())
    throw DomainError("indep_log_limit: margins must be nonnegative");
  if (kappa.is_finite()) {
    const double k = static_cast<double>(kappa.value());
    if (margins.rows().maxCoeff() > n * k || margins.cols().maxCoeff() > m * k)
      throw DomainError("indep_log_limit: a margin exceeds its line capacity");
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  double value = -md * nd * hmax(total / (md * nd), kappa);
  for (Index i = 0; i < m; ++i) value += nd * hmax(margins.rows()[i] / nd, kappa);
  for (Index j = 0; j < n; ++j) value += md * hmax(margins.cols()[j] / md, kappa);
  return value;
}

}  // namespace bct
