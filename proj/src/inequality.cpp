#include "bct/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include <boost/math/constants/constants.hpp>
#include <fmt/format.h>

#include "bct/maxent.hpp"
#include "bct/truncated_geometric.hpp"

namespace bct {

namespace mp = boost::multiprecision;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

BigInt factorial(std::int64_t n) {
  BigInt f = 1;
  for (std::int64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

const LogReal& two_pi() {
  static const LogReal value = 2 * boost::math::constants::pi<LogReal>();
  return value;
}

LogReal log_sqrt_two_pi(std::int64_t n) { return mp::log(two_pi() * LogReal(n)) / 2; }

// ln(e / sqrt(2 pi)).
LogReal stirling_constant() { return LogReal(1) - mp::log(two_pi()) / 2; }

std::int64_t sum_of(const IntVector& v) { return v.sum(); }

// Rational with the given number of significant decimal digits of x.
BigRational decimal_rational(const LogReal& x, int digits) {
  if (x == 0) return 0;
  const std::string text = x.str(digits, std::ios_base::scientific);
  const auto e = text.find('e');
  std::string mantissa = text.substr(0, e);
  const int exponent = std::stoi(text.substr(e + 1));
  const bool negative = !mantissa.empty() && mantissa[0] == '-';
  if (negative) mantissa.erase(0, 1);
  mantissa.erase(std::remove(mantissa.begin(), mantissa.end(), '.'), mantissa.end());
  BigRational value{BigInt(mantissa)};
  const int shift = exponent - static_cast<int>(mantissa.size()) + 1;
  const BigInt scale = mp::pow(BigInt(10), static_cast<unsigned>(std::abs(shift)));
  if (shift >= 0)
    value *= scale;
  else
    value /= scale;
  return negative ? BigRational(-value) : value;
}

IntVector col_capacities(const CapMatrix& K) { return K.colwise().sum().transpose(); }

void require_finite(const BoundsMatrix& bounds, const char* who) {
  if (bounds.has_unbounded()) throw DomainError(std::string(who) + ": bounds must be finite");
}

}  // namespace

// ---- omega ------------------------------------------------------------------

OmegaValue omega(std::int64_t n) {
  if (n < 0) throw DomainError("omega: n must be nonnegative");
  OmegaValue out;
  out.n = n;
  out.value = n == 0 ? BigRational(1) : BigRational(mp::pow(BigInt(n), static_cast<unsigned>(n)), factorial(n));
  out.log = static_cast<double>(log_omega(n));
  return out;
}

LogReal log_omega(std::int64_t n) {
  if (n < 0) throw DomainError("log_omega: n must be nonnegative");
  if (n <= 1) return 0;
  if (n <= 170) return log_of(BigRational(mp::pow(BigInt(n), static_cast<unsigned>(n)), factorial(n)));
  const long double nn = static_cast<long double>(n);
  return LogReal(nn * std::log(nn) - std::lgamma(nn + 1));
}

StirlingReport stirling_check(std::int64_t n_max) {
  if (n_max < 1) throw DomainError("stirling_check: n_max must be at least 1");
  StirlingReport report;
  report.n_max = n_max;
  report.min_lower_slack = std::numeric_limits<double>::infinity();
  report.min_upper_slack = std::numeric_limits<double>::infinity();
  const LogReal c = stirling_constant();
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const LogReal lw = log_omega(n);
    const LogReal upper = LogReal(n) - log_sqrt_two_pi(n);
    const LogReal lower = upper - c;
    const double lower_slack = static_cast<double>(lw - lower);
    const double upper_slack = static_cast<double>(upper - lw);
    report.min_lower_slack = std::min(report.min_lower_slack, lower_slack);
    report.min_upper_slack = std::min(report.min_upper_slack, upper_slack);
    if (lower_slack < 0 || upper_slack < 0) report.violations.push_back(n);
  }
  return report;
}

// ---- Brunn-Minkowski-type inequality ----------------------------------------

void BMInstance::validate() const {
  const std::size_t p = alpha.size();
  if (p == 0) throw DomainError("bm instance: need at least one term");
  if (rows.size() != p || cols.size() != p) throw DomainError("bm instance: alpha, R^t and C^t differ in length");
  BigRational total = 0;
  for (const auto& a : alpha) {
    if (a < 0) throw DomainError("bm instance: weights must be nonnegative");
    total += a;
  }
  if (total != 1) throw DomainError("bm instance: weights must sum to 1");
  const Index m = bounds.rows(), n = bounds.cols();
  if (m < 1 || n < 1) throw DomainError("bm instance: empty bounds");
  if ((bounds.array() < 0).any() || (bounds.array() == kUnbounded).any())
    throw DomainError("bm instance: bounds must be finite nonnegative integers");
  const std::int64_t N = sum_of(rows[0]);
  for (std::size_t t = 0; t < p; ++t) {
    if (rows[t].size() != m || cols[t].size() != n) throw DomainError("bm instance: margin shape differs from K");
    if ((rows[t].array() < 0).any() || (cols[t].array() < 0).any())
      throw DomainError("bm instance: margins must be nonnegative");
    if (sum_of(rows[t]) != N || sum_of(cols[t]) != N)
      throw DomainError(fmt::format("bm instance: term {} does not have total {}", t + 1, N));
  }
}

namespace {

IntVector combine(const std::vector<BigRational>& alpha, const std::vector<IntVector>& parts, const char* what) {
  const Index len = parts.front().size();
  IntVector out(len);
  for (Index i = 0; i < len; ++i) {
    BigRational v = 0;
    for (std::size_t t = 0; t < parts.size(); ++t) v += alpha[t] * parts[t][i];
    if (mp::denominator(v) != 1)
      throw DomainError(fmt::format("bm instance: combined {} entry {} is not an integer", what, i + 1));
    out[i] = mp::numerator(v).convert_to<std::int64_t>();
  }
  return out;
}

}  // namespace

IntVector BMInstance::combined_rows() const { return combine(alpha, rows, "row"); }
IntVector BMInstance::combined_cols() const { return combine(alpha, cols, "column"); }
IntVector BMInstance::complement(const IntVector& c) const { return col_capacities(bounds) - c; }

BMReport bm_check(const BMInstance& instance, const CountOptions& options) {
  instance.validate();
  const IntVector R = instance.combined_rows();
  const IntVector C = instance.combined_cols();
  const BoundsMatrix K(instance.bounds);
  const LogReal log_omega_K = log_Omega_product(instance.bounds);

  BMReport report;
  const BigInt T = count_tables(MarginPair(R, C), K, options);
  if (T == 0) {
    report.lhs = kNegInf;
  } else {
    const LogReal lhs = log_omega(instance.bounds.sum()) + log_of(T) - log_Omega_product(R) -
                        log_Omega_product(instance.complement(C)) - log_omega_K;
    report.lhs = static_cast<double>(lhs);
  }

  LogReal rhs = 0;
  for (std::size_t t = 0; t < instance.alpha.size(); ++t) {
    if (instance.alpha[t] == 0) continue;
    const BigInt Tt = count_tables(MarginPair(instance.rows[t], instance.cols[t]), K, options);
    if (Tt == 0) {
      report.degenerate = true;
      break;
    }
    const LogReal margin_factor =
        log_Omega_product(instance.rows[t]) + log_Omega_product(instance.complement(instance.cols[t]));
    const LogReal term = log_of(Tt) - std::min(margin_factor, log_omega_K);
    rhs += LogReal(instance.alpha[t].convert_to<double>()) * term;
  }
  report.rhs = report.degenerate ? kNegInf : static_cast<double>(rhs);
  report.holds = report.degenerate || report.lhs >= report.rhs - kBMSlack;
  return report;
}

BMInstance random_bm_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  while (true) {
    const Index m = uniform(1, 3), n = uniform(1, 3);
    const std::int64_t kappa = uniform(1, 3);
    const std::int64_t N = uniform(0, 6);
    const int p = static_cast<int>(uniform(1, 3));
    if (N > m * n * kappa) continue;
    // Random vector of length len with sum N and entries <= cap.
    auto draw = [&](Index len, std::int64_t cap) {
      while (true) {
        IntVector v(len);
        std::int64_t used = 0;
        for (Index i = 0; i + 1 < len; ++i) used += v[i] = uniform(0, std::min(N, cap));
        v[len - 1] = N - used;
        if (v[len - 1] >= 0 && v[len - 1] <= cap) return v;
      }
    };
    BMInstance inst;
    inst.bounds = CapMatrix::Constant(m, n, kappa);
    std::int64_t weight_total = 0;
    std::vector<std::int64_t> weights;
    for (int t = 0; t < p; ++t) {
      inst.rows.push_back(draw(m, n * kappa));
      inst.cols.push_back(draw(n, m * kappa));
      weights.push_back(uniform(1, 4));
      weight_total += weights.back();
    }
    for (auto w : weights) inst.alpha.emplace_back(w, weight_total);
    try {
      inst.combined_rows();
      inst.combined_cols();
    } catch (const DomainError&) {
      continue;
    }
    return inst;
  }
}

BMTrialsReport bm_trials(int count, std::uint64_t seed, int jobs, const CountOptions& options) {
  if (count < 0) throw DomainError("bm_trials: count must be nonnegative");
  BMTrialsReport report;
  report.seed = seed;
  std::mt19937_64 master(seed);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (auto& s : seeds) s = master();
  report.trials.resize(seeds.size());
  auto run = [&](std::size_t k) {
    report.trials[k].instance = random_bm_instance(seeds[k]);
    report.trials[k].report = bm_check(report.trials[k].instance, options);
  };
  const auto workers_n = static_cast<std::size_t>(std::max(1, jobs));
  if (workers_n == 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) run(k);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < workers_n; ++w)
      workers.emplace_back([&, w] {
        for (std::size_t k = w; k < seeds.size(); k += workers_n) run(k);
      });
    for (auto& worker : workers) worker.join();
  }
  for (const auto& trial : report.trials) {
    report.violations += trial.report.holds ? 0 : 1;
    report.degenerate += trial.report.degenerate ? 1 : 0;
  }
  return report;
}

// ---- concavification ----------------------------------------------------------

namespace {

// All integer vectors 0 <= v <= cap, grouped by their sum.
std::map<std::int64_t, std::vector<IntVector>> box_by_sum(const IntVector& cap) {
  std::map<std::int64_t, std::vector<IntVector>> out;
  IntVector v = IntVector::Zero(cap.size());
  while (true) {
    out[v.sum()].push_back(v);
    Index i = 0;
    while (i < v.size() && v[i] == cap[i]) v[i++] = 0;
    if (i == v.size()) break;
    ++v[i];
  }
  return out;
}

}  // namespace

Concavifier::Concavifier(const BoundsMatrix& bounds, const ConcavifyOptions& options)
    : bounds_(bounds), options_(options) {
  require_finite(bounds_, "concavify_logT");
  const CapMatrix& K = bounds_.caps();
  const IntVector row_caps = K.rowwise().sum();
  const IntVector col_caps = col_capacities(K);
  const auto rows_by_sum = box_by_sum(row_caps);
  const auto cols_by_sum = box_by_sum(col_caps);

  for (const auto& [total, row_list] : rows_by_sum) {
    const auto it = cols_by_sum.find(total);
    if (it == cols_by_sum.end()) continue;
    for (const IntVector& R : row_list)
      for (const IntVector& C : it->second) {
        const MarginPair margins(R, C);
        if (!feasible(margins, bounds_)) continue;
        if (vertices_.size() >= options_.vertex_cap)
          throw BudgetExceeded(
              fmt::format("concavify_logT: more than {} feasible margin pairs", options_.vertex_cap));
        MarginVertex v{R, C, count_tables(margins, bounds_, options_.count), 0};
        v.log_count = static_cast<double>(log_of(v.count));
        vertices_.push_back(std::move(v));
      }
  }

  const Index m = bounds_.rows(), n = bounds_.cols();
  const auto nv = static_cast<Index>(vertices_.size());
  constraints_ = RationalMatrix::Zero(m + n + 1, nv);
  objective_ = RationalVector::Zero(nv);
  for (Index k = 0; k < nv; ++k) {
    const MarginVertex& v = vertices_[static_cast<std::size_t>(k)];
    for (Index i = 0; i < m; ++i) constraints_(i, k) = v.rows[i];
    for (Index j = 0; j < n; ++j) constraints_(m + j, k) = v.cols[j];
    constraints_(m + n, k) = 1;
    objective_[k] = v.count == 1 ? BigRational(0) : decimal_rational(log_of(v.count), options_.objective_digits);
  }
}

Concavification Concavifier::evaluate(const MarginPair& margins) const {
  const Index m = bounds_.rows(), n = bounds_.cols();
  if (margins.m() != m || margins.n() != n) throw DomainError("concavify_logT: margin shape differs from K");
  Concavification out;
  out.value = kNegInf;
  if (vertices_.empty()) return out;
  RationalVector b(m + n + 1);
  for (Index i = 0; i < m; ++i) b[i] = BigRational(margins.rows()[i]);
  for (Index j = 0; j < n; ++j) b[m + j] = BigRational(margins.cols()[j]);
  b[m + n] = 1;
  const LpResult lp = simplex_maximize(constraints_, b, objective_);
  if (lp.status != LpStatus::optimal) return out;
  out.value = lp.value.convert_to<double>();
  for (Index k = 0; k < lp.x.size(); ++k)
    if (lp.x[k] != 0) out.support.push_back({lp.x[k], static_cast<std::size_t>(k)});
  return out;
}

Concavification concavify_logT(const MarginPair& margins, const BoundsMatrix& bounds,
                               const ConcavifyOptions& options) {
  return Concavifier(bounds, options).evaluate(margins);
}

namespace {

void check_quality_hypotheses(const MarginPair& margins, const BoundsMatrix& bounds) {
  require_finite(bounds, "fquality_check");
  if (margins.m() != bounds.rows() || margins.n() != bounds.cols())
    throw DomainError("fquality_check: margin shape differs from K");
  const IntVector R = margins.int_rows();
  const IntVector C = margins.int_cols();
  if ((R.array() <= 0).any()) throw DomainError("fquality_check: R must be strictly positive");
  if ((bounds.caps().array() <= 0).any()) throw DomainError("fquality_check: K must be strictly positive");
  const IntVector Ct = col_capacities(bounds.caps()) - C;
  for (Index j = 0; j < Ct.size(); ++j)
    if (Ct[j] <= 0) throw DomainError(fmt::format("fquality_check: complement column {} is not positive", j + 1));
}

}  // namespace

double heart_bound(const MarginPair& margins, const BoundsMatrix& bounds) {
  check_quality_hypotheses(margins, bounds);
  const IntVector R = margins.int_rows();
  const IntVector Ct = col_capacities(bounds.caps()) - margins.int_cols();
  LogReal h = -log_sqrt_two_pi(bounds.caps().sum());
  for (Index i = 0; i < R.size(); ++i) h += log_sqrt_two_pi(R[i]);
  for (Index j = 0; j < Ct.size(); ++j) h += log_sqrt_two_pi(Ct[j]);
  h += LogReal(R.size() + Ct.size()) * stirling_constant();
  return static_cast<double>(h);
}

FQualityReport fquality_check(const MarginPair& margins, const Concavifier& concavifier) {
  const BoundsMatrix& bounds = concavifier.bounds();
  FQualityReport report;
  report.heart = heart_bound(margins, bounds);
  report.f = concavifier.evaluate(margins).value;
  const BigInt T = count_tables(margins, bounds);
  if (T == 0) {
    report.log_count = kNegInf;
    // Both sides are -inf exactly when f is; a finite f over a zero count
    // is a violation.
    report.excess = std::isinf(report.f) ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    report.log_count = static_cast<double>(log_of(T));
    report.excess = report.f - report.log_count;
  }
  report.holds = report.excess <= report.heart + 1e-9;
  return report;
}

FQualityReport fquality_check(const MarginPair& margins, const BoundsMatrix& bounds,
                              const ConcavifyOptions& options) {
  check_quality_hypotheses(margins, bounds);
  return fquality_check(margins, Concavifier(bounds, options));
}

// ---- convergence checks -------------------------------------------------------

KnomialLimitReport knomial_limit_check(std::int64_t n, std::int64_t r, Kappa kappa, const std::vector<int>& s_list) {
  if (n < 1) throw DomainError("knomial_limit_check: n must be positive");
  if (!knomial_in_support(n, r, kappa)) throw DomainError("knomial_limit_check: need 0 <= r <= n kappa");
  if (s_list.empty()) throw DomainError("knomial_limit_check: empty s list");
  for (std::size_t k = 0; k < s_list.size(); ++k)
    if (s_list[k] < 1 || (k > 0 && s_list[k] <= s_list[k - 1]))
      throw DomainError("knomial_limit_check: s values must be positive and ascending");

  KnomialLimitReport report;
  report.limit = static_cast<double>(n) * hmax(static_cast<double>(r) / static_cast<double>(n), kappa);
  for (int s : s_list) {
    const BigInt coeff = knomial(s * n, s * r, kappa);
    const double value = static_cast<double>(log_of(coeff) / s);
    report.points.push_back({s, std::abs(value - report.limit)});
  }

  const std::size_t half = report.points.size() / 2;
  const bool all_zero =
      std::all_of(report.points.begin(), report.points.end(), [](const auto& p) { return p.error <= 1e-15; });
  report.eventually_decreasing = all_zero;
  if (!all_zero) {
    report.eventually_decreasing = true;
    for (std::size_t k = half + 1; k < report.points.size(); ++k)
      if (!(report.points[k].error < report.points[k - 1].error)) report.eventually_decreasing = false;
  }

  auto rate = [](const KnomialLimitPoint& p) { return p.error * p.s / std::log(static_cast<double>(p.s)); };
  for (std::size_t k = 0; k < half; ++k)
    if (report.points[k].s > 1) report.fitted_A = std::max(report.fitted_A, rate(report.points[k]));
  report.remainder_bound_holds = true;
  for (std::size_t k = half; k < report.points.size(); ++k) {
    const auto& p = report.points[k];
    if (p.s > 1 && p.error > 2 * report.fitted_A * std::log(static_cast<double>(p.s)) / p.s + 1e-15)
      report.remainder_bound_holds = false;
  }
  return report;
}

bool UpperBoundReport::holds() const {
  return decreasing && std::all_of(points.begin(), points.end(), [](const auto& p) { return p.holds; });
}

UpperBoundReport upper_bound_check(const MarginPair& margins, Kappa kappa, const std::vector<int>& s_list,
                                   const CountOptions& options) {
  if (s_list.empty()) throw DomainError("upper_bound_check: empty s list");
  UpperBoundReport report;
  report.entropy_limit = entropy_limit(margins, kappa);
  for (int s : s_list) {
    UpperBoundPoint point;
    point.s = s;
    try {
      point.count = count_cloned(margins, kappa, s, options);
    } catch (const BudgetExceeded&) {
      report.complete = false;
      break;
    }
    point.normalized = point.count == 0 ? kNegInf : static_cast<double>(log_of(point.count) / (s * s));
    point.deficit = report.entropy_limit - point.normalized;
    point.holds = point.normalized <= report.entropy_limit + 1e-9;
    report.points.push_back(std::move(point));
  }
  report.decreasing = true;
  for (std::size_t k = 1; k < report.points.size(); ++k)
    if (!(report.points[k].deficit < report.points[k - 1].deficit)) report.decreasing = false;
  return report;
}

}  // namespace bct
