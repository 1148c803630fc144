#include "bct/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "bct/truncated_geometric.hpp"

namespace bct {

namespace {

GapSign classify(double gap) {
  if (gap > kGapZeroBand) return GapSign::positive;
  if (gap < -kGapZeroBand) return GapSign::negative;
  return GapSign::zero;
}

bool is_constant(const Eigen::VectorXd& v) {
  return v.size() == 0 || v.maxCoeff() - v.minCoeff() <= 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff());
}

double cached_convexity_radius(Kappa kappa) {
  static std::mutex mutex;
  static std::map<std::int64_t, double> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(kappa.value()); it != cache.end()) return it->second;
  }
  const double delta = convexity_radius<double>(kappa);
  std::lock_guard lock(mutex);
  cache.emplace(kappa.value(), delta);
  return delta;
}

double default_delta(Kappa kappa) {
  if (kappa.is_infinite()) return 1.0;
  return cached_convexity_radius(kappa);
}

void check_margins(const MarginPair& margins) {
  if (margins.m() < 1 || margins.n() < 1) throw DomainError("margins must be nonempty");
  if ((margins.rows().array() < 0).any() || (margins.cols().array() < 0).any())
    throw DomainError("margins must be nonnegative");
  const double total = margins.total();
  if (std::abs(total - margins.cols().sum()) > 1e-9 * std::max(1.0, total))
    throw DomainError(fmt::format("|R| = {} differs from |C| = {}", total, margins.cols().sum()));
}

}  // namespace

std::string to_string(GapSign sign) {
  switch (sign) {
    case GapSign::positive: return "positive";
    case GapSign::negative: return "negative";
    case GapSign::zero: return "zero";
  }
  return "zero";
}

SolveOptions tight_solve_options() {
  SolveOptions options;
  options.tol = 1e-11;
  options.gap_tol = 1e-11;
  return options;
}

CorrelationReport correlation_gap(const MarginPair& margins, Kappa kappa, std::optional<double> delta,
                                  const SolveOptions& options) {
  check_margins(margins);
  CorrelationReport report;
  report.indep_limit = indep_log_limit(margins, kappa);
  report.entropy_limit = entropy_limit(margins, kappa, options);
  report.gap = report.entropy_limit - report.indep_limit;
  report.sign = classify(report.gap);
  report.delta = delta.value_or(default_delta(kappa));
  const double product = margins.rows().maxCoeff() * margins.cols().maxCoeff();
  report.hypothesis_ok =
      kappa.is_infinite() || product < report.delta * static_cast<double>(kappa.value()) * margins.total();
  report.strict_expected = !is_constant(margins.rows()) && !is_constant(margins.cols());
  return report;
}

HLossReport hloss_inequality_check(const MarginPair& margins, Kappa kappa, double equality_tol) {
  check_margins(margins);
  const double total = margins.total();
  if (total <= 0) throw DomainError("hloss_inequality_check: N must be positive");
  if (kappa.is_finite()) {
    const Eigen::MatrixXd rank1 = rank1_table(margins);
    Index i = 0, j = 0;
    if (rank1.maxCoeff(&i, &j) > static_cast<double>(kappa.value()))
      throw DomainError(fmt::format("rank-one entry ({}, {}) = {} exceeds kappa = {}", i + 1, j + 1, rank1(i, j),
                                    kappa.value()));
  }
  const Eigen::VectorXd alpha = margins.cols() / total;
  const double md = static_cast<double>(margins.m());
  HLossReport report;
  report.lhs = md * entropy_loss(total / md, alpha, kappa);
  report.rhs = 0;
  for (Index i = 0; i < margins.m(); ++i) report.rhs += entropy_loss(margins.rows()[i], alpha, kappa);
  report.margin = report.lhs - report.rhs;
  report.equality = std::abs(report.margin) <= equality_tol;
  report.holds = report.margin >= -equality_tol;
  return report;
}

AttractionReport attraction_check(const MarginPair& margins, Kappa kappa, std::optional<double> delta,
                                  const SolveOptions& options) {
  if (kappa.is_infinite() || kappa.value() < 2) throw DomainError("attraction_check requires a finite kappa >= 2");
  check_margins(margins);
  AttractionReport report;
  report.delta = delta.value_or(default_delta(kappa));
  report.product = margins.rows().maxCoeff() * margins.cols().maxCoeff();
  report.threshold = report.delta * static_cast<double>(kappa.value()) * margins.total();
  report.hypothesis_ok = report.product < report.threshold;
  report.strict_expected = !is_constant(margins.rows()) && !is_constant(margins.cols());
  if (!report.hypothesis_ok) return report;

  report.hloss = hloss_inequality_check(margins, kappa);
  report.correlation = correlation_gap(margins, kappa, report.delta, options);
  const Eigen::MatrixXd rank1 = rank1_table(margins);
  report.rank1_entropy = rank1.unaryExpr([kappa](double z) { return hmax(z, kappa); }).sum();

  constexpr double slack = 1e-9;
  report.chain_holds = report.correlation->entropy_limit >= report.rank1_entropy - slack &&
                       report.rank1_entropy >= report.correlation->indep_limit - slack;
  report.strict_holds = !report.strict_expected || (report.hloss->margin > 0 && report.correlation->gap > 0);
  return report;
}

Eigen::VectorXd arithmetic_margins(double gamma, double eps, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gamma + i * eps;
  return v;
}

ScanResult margin_scan(Kappa kappa, double eps, int n, const ScanOptions& options) {
  if (n < 1) throw DomainError("margin_scan: n must be positive");
  if (!(eps >= 0)) throw DomainError("margin_scan: eps must be nonnegative");
  const double top = kappa.is_finite() ? n * static_cast<double>(kappa.value()) - (n - 1) * eps : 10.0 * n;
  if (top <= 0) throw DomainError("margin_scan: no admissible gamma for these kappa, eps, n");

  const double step = std::isnan(options.gamma_step) ? top / 400.0 : options.gamma_step;
  const double lo = std::isnan(options.gamma_min) ? step : options.gamma_min;
  const double hi = std::isnan(options.gamma_max) ? top - step : options.gamma_max;
  if (!(step > 0) || hi < lo) throw DomainError("margin_scan: empty gamma range");

  auto gap_at = [&](double gamma) {
    const Eigen::VectorXd v = arithmetic_margins(gamma, eps, n);
    const MarginPair margins(v, v);
    return entropy_limit(margins, kappa, options.solve) - indep_log_limit(margins, kappa);
  };
  auto admissible = [&](double gamma) { return gamma >= 0 && gamma <= top; };

  ScanResult result{kappa, eps, n, {}, {}, {}};
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  result.points.resize(count);
  auto evaluate = [&](std::size_t k) {
    ScanPoint& p = result.points[k];
    p.gamma = lo + static_cast<double>(k) * step;
    p.admissible = admissible(p.gamma);
    if (!p.admissible) return;
    try {
      p.gap = gap_at(p.gamma);
      p.sign = classify(p.gap);
    } catch (const std::exception&) {
      p.admissible = false;
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t k = 0; k < count; ++k) evaluate(k);
  } else {
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&, w] {
        for (std::size_t k = static_cast<std::size_t>(w); k < count; k += static_cast<std::size_t>(jobs)) evaluate(k);
      });
    for (auto& worker : workers) worker.join();
  }

  // Boundaries between consecutive grid points of opposite (nonzero) sign.
  const ScanPoint* last = nullptr;
  std::optional<double> open_negative;
  const ScanPoint* first_admissible = nullptr;
  const ScanPoint* last_admissible = nullptr;
  for (const ScanPoint& p : result.points) {
    if (!p.admissible) continue;
    if (!first_admissible) first_admissible = &p;
    last_admissible = &p;
    if (p.sign == GapSign::zero) continue;
    if (!last) {
      if (p.sign == GapSign::negative) open_negative = first_admissible->gamma;
    } else if (last->sign != p.sign) {
      double a = last->gamma, b = p.gamma;
      while (b - a > options.boundary_tol) {
        const double mid = 0.5 * (a + b);
        const bool same_as_left = (gap_at(mid) < 0) == (last->sign == GapSign::negative);
        (same_as_left ? a : b) = mid;
      }
      const double boundary = 0.5 * (a + b);
      result.boundaries.push_back(boundary);
      if (p.sign == GapSign::negative) {
        open_negative = boundary;
      } else if (open_negative) {
        result.negative_intervals.emplace_back(*open_negative, boundary);
        open_negative.reset();
      }
    }
    last = &p;
  }
  if (!first_admissible) throw DomainError("margin_scan: no admissible gamma in range");
  if (open_negative) result.negative_intervals.emplace_back(*open_negative, last_admissible->gamma);
  return result;
}

}  // namespace bct
