#include "bct/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "bct/correlation.hpp"
#include "bct/exact_count.hpp"
#include "bct/inequality.hpp"
#include "bct/maxent.hpp"
#include "bct/tables_json.hpp"
#include "bct/truncated_geometric.hpp"

namespace bct::cli {

namespace {

using nlohmann::json;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.12f}", v);
  if (s == "-0.000000000000") s.erase(0, 1);
  return s;
}

// Floats in JSON are rounded to 12 decimals; non-finite values become strings.
json num(double v) {
  if (!std::isfinite(v)) return fixed(v);
  return json::parse(fixed(v));
}

std::string big(const BigInt& v) { return v.str(); }

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

json matrix_json(const Eigen::MatrixXd& M) {
  json out = json::array();
  for (Index i = 0; i < M.rows(); ++i) out.push_back(vector_json(M.row(i).transpose()));
  return out;
}

json int_vector_json(const IntVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json cap_matrix_json(const CapMatrix& K) {
  json out = json::array();
  for (Index i = 0; i < K.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < K.cols(); ++j) row.push_back(K(i, j) == kUnbounded ? json("inf") : json(K(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

std::string rational_text(const BigRational& q) {
  return boost::multiprecision::denominator(q) == 1 ? boost::multiprecision::numerator(q).str() : q.str();
}

struct Settings {
  std::string format;
  std::string input_path;
  std::string inline_json;
  std::string kappa_text;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
  double tol = kUnset;
  double gap_tol = kUnset;
  int max_sweeps = 0;
  CountOptions count;
};

// Plain output: one "key value" pair per line.
class Plain {
 public:
  explicit Plain(std::ostream& out) : out_(out) {}
  Plain& operator()(const std::string& key, const std::string& value) {
    out_ << key << ' ' << value << '\n';
    return *this;
  }
  Plain& operator()(const std::string& key, double value) { return (*this)(key, fixed(value)); }
  Plain& operator()(const std::string& key, bool value) { return (*this)(key, std::string(value ? "true" : "false")); }

 private:
  std::ostream& out_;
};

class Runner {
 public:
  Runner(Settings settings, std::ostream& out) : s_(std::move(settings)), out_(out) {}

  std::string format(const std::string& fallback) const {
    const std::string f = s_.format.empty() ? fallback : s_.format;
    if (f != "json" && f != "csv" && f != "plain") throw DomainError("unknown format '" + f + "'");
    return f;
  }

  std::optional<Kappa> kappa_override() const {
    if (s_.kappa_text.empty()) return std::nullopt;
    return parse_kappa(s_.kappa_text);
  }

  TableSpec table() const {
    if (s_.input_path.empty() == s_.inline_json.empty())
      throw DomainError("give exactly one of --input or --json");
    std::string text = s_.inline_json;
    if (!s_.input_path.empty()) {
      std::ifstream in(s_.input_path);
      if (!in) throw DomainError("cannot read input file '" + s_.input_path + "'");
      std::stringstream buffer;
      buffer << in.rdbuf();
      text = buffer.str();
    }
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DomainError(std::string("malformed JSON input: ") + e.what());
    }
    TableSpec spec = table_spec_from_json(doc);
    if (auto k = kappa_override()) spec.bounds = BoundsMatrix::uniform(spec.margins.m(), spec.margins.n(), *k);
    if (spec.bounds.rows() != spec.margins.m() || spec.bounds.cols() != spec.margins.n())
      throw DomainError("K shape does not match the margins");
    return spec;
  }

  static Kappa uniform_kappa(const TableSpec& spec, const char* who) {
    if (auto k = spec.bounds.uniform_value()) return *k;
    throw DomainError(std::string(who) + " requires a uniform kappa (use {\"kappa\": ...} or --kappa)");
  }

  SolveOptions solve_options(SolveOptions base) const {
    if (!std::isnan(s_.tol)) base.tol = s_.tol;
    if (!std::isnan(s_.gap_tol)) base.gap_tol = s_.gap_tol;
    if (s_.max_sweeps > 0) base.max_sweeps = s_.max_sweeps;
    return base;
  }

  void emit_json(const json& doc) { out_ << doc.dump() << '\n'; }

  int count() {
    const TableSpec spec = table();
    const BigInt n = count_tables(spec.margins, spec.bounds, s_.count);
    const std::string f = format("plain");
    if (f == "json") {
      json doc = to_json(spec);
      doc["count"] = big(n);
      emit_json(doc);
    } else {
      out_ << big(n) << '\n';
    }
    return kOk;
  }

  int indep() {
    const TableSpec spec = table();
    const Kappa kappa = uniform_kappa(spec, "indep");
    const BigRatio ratio = indep_estimate(spec.margins, kappa);
    const std::string text = rational_text(ratio.value());
    const std::string f = format("plain");
    if (f == "json") {
      json doc = to_json(spec);
      doc["estimate"] = text;
      doc["log"] = num(ratio.log());
      doc["out_of_support"] = ratio.out_of_support;
      emit_json(doc);
    } else if (f == "csv") {
      out_ << "estimate,log\n" << text << ',' << fixed(ratio.log()) << '\n';
    } else {
      Plain{out_}("estimate", text)("log", ratio.log());
    }
    return kOk;
  }

  int tg(double x) {
    const std::optional<Kappa> k = kappa_override();
    if (!k) throw DomainError("tg requires --kappa");
    const auto params = solve_tg(x, *k);
    const double h = hmax(x, *k);
    const bool interior = x > 0 && (k->is_infinite() || x < static_cast<double>(k->value()));
    const double deriv = interior ? hmax_deriv(x, *k) : std::numeric_limits<double>::quiet_NaN();
    const double ph = (k->is_finite() && x == static_cast<double>(k->value())) ? kUnset : phi(x, *k);
    const double var = tg_variance(x, *k);
    const std::string f = format("plain");
    if (f == "json") {
      emit_json({{"x", num(x)}, {"kappa", kappa_to_json(*k)}, {"p", num(params.p)}, {"q", num(params.q)},
                 {"hmax", num(h)}, {"hmax_deriv", num(deriv)}, {"phi", num(ph)}, {"variance", num(var)}});
    } else if (f == "csv") {
      out_ << "x,kappa,p,q,hmax,hmax_deriv,phi,variance\n"
           << fmt::format("{},{},{},{},{},{},{},{}\n", fixed(x), to_string(*k), fixed(params.p), fixed(params.q),
                          fixed(h), fixed(deriv), fixed(ph), fixed(var));
    } else {
      Plain{out_}("p", params.p)("q", params.q)("hmax", h)("hmax_deriv", deriv)("phi", ph)("variance", var);
    }
    return kOk;
  }

  int maxent() {
    const TableSpec spec = table();
    const MaxEntSolution sol = solve_dual(spec.margins, spec.bounds, solve_options({}));
    const std::string f = format("plain");
    if (f == "json") {
      json doc = to_json(spec);
      doc["value"] = num(sol.value);
      doc["dual_value"] = num(sol.dual_value);
      doc["residual"] = num(sol.residual);
      doc["gap"] = num(sol.gap);
      doc["sweeps"] = sol.sweeps;
      doc["Z"] = matrix_json(sol.Z);
      doc["t"] = vector_json(sol.dual.t);
      doc["s"] = vector_json(sol.dual.s);
      doc["active_rows"] = sol.reduced.rows;
      doc["active_cols"] = sol.reduced.cols;
      emit_json(doc);
    } else if (f == "csv") {
      for (Index i = 0; i < sol.Z.rows(); ++i) {
        for (Index j = 0; j < sol.Z.cols(); ++j) out_ << (j ? "," : "") << fixed(sol.Z(i, j));
        out_ << '\n';
      }
    } else {
      Plain p(out_);
      p("value", sol.value)("dual_value", sol.dual_value)("residual", sol.residual)("gap", sol.gap);
      p("sweeps", std::to_string(sol.sweeps));
      for (Index i = 0; i < sol.Z.rows(); ++i) {
        std::string row;
        for (Index j = 0; j < sol.Z.cols(); ++j) row += (j ? " " : "") + fixed(sol.Z(i, j));
        p("Z", row);
      }
    }
    return kOk;
  }

  int gap(std::optional<double> delta) {
    const TableSpec spec = table();
    const Kappa kappa = uniform_kappa(spec, "gap");
    const CorrelationReport r = correlation_gap(spec.margins, kappa, delta, solve_options(tight_solve_options()));
    const std::string f = format("plain");
    if (f == "json") {
      json doc = to_json(spec);
      doc["entropy_limit"] = num(r.entropy_limit);
      doc["indep_limit"] = num(r.indep_limit);
      doc["gap"] = num(r.gap);
      doc["sign"] = to_string(r.sign);
      doc["delta"] = num(r.delta);
      doc["hypothesis_ok"] = r.hypothesis_ok;
      doc["strict_expected"] = r.strict_expected;
      emit_json(doc);
    } else if (f == "csv") {
      out_ << "entropy_limit,indep_limit,gap,sign\n"
           << fmt::format("{},{},{},{}\n", fixed(r.entropy_limit), fixed(r.indep_limit), fixed(r.gap),
                          to_string(r.sign));
    } else {
      Plain{out_}("entropy_limit", r.entropy_limit)("indep_limit", r.indep_limit)("gap", r.gap)(
          "sign", to_string(r.sign))("delta", r.delta)("hypothesis_ok", r.hypothesis_ok);
    }
    return kOk;
  }

  int scan(double eps, int n, ScanOptions options) {
    const std::optional<Kappa> k = kappa_override();
    if (!k) throw DomainError("scan requires --kappa");
    options.jobs = s_.jobs;
    options.solve = solve_options(options.solve);
    const ScanResult r = margin_scan(*k, eps, n, options);
    json summary = {{"kappa", kappa_to_json(*k)}, {"eps", num(eps)}, {"n", n}};
    summary["boundaries"] = json::array();
    for (double b : r.boundaries) summary["boundaries"].push_back(num(b));
    summary["negative_intervals"] = json::array();
    for (const auto& [a, b] : r.negative_intervals) summary["negative_intervals"].push_back({num(a), num(b)});
    const std::string f = format("csv");
    if (f == "json") {
      json points = json::array();
      for (const auto& p : r.points)
        if (p.admissible) points.push_back({{"gamma", num(p.gamma)}, {"gap", num(p.gap)}, {"sign", to_string(p.sign)}});
      summary["points"] = std::move(points);
      emit_json(summary);
    } else {
      out_ << "gamma,gap,sign\n";
      for (const auto& p : r.points)
        if (p.admissible) out_ << fmt::format("{},{},{}\n", fixed(p.gamma), fixed(p.gap), to_string(p.sign));
      emit_json(summary);
    }
    return kOk;
  }

  struct VerifyRequest {
    bool bm = false, fquality = false, knomial_limit = false, upper_bound = false, stirling = false;
    int trials = 100;
    std::int64_t n = 2, r = 1;
    std::vector<int> s_list;
    std::int64_t n_max = 10000;
  };

  int verify(const VerifyRequest& req) {
    if (!(req.bm || req.fquality || req.knomial_limit || req.upper_bound || req.stirling))
      throw DomainError("verify needs at least one of --bm, --fquality, --knomial-limit, --upper-bound, --stirling");
    json doc = json::object();
    bool ok = true;
    if (req.bm) {
      const BMTrialsReport rep = bm_trials(req.trials, s_.seed, s_.jobs, s_.count);
      json trials = json::array();
      for (const auto& t : rep.trials) {
        json alpha = json::array();
        for (const auto& a : t.instance.alpha) alpha.push_back(rational_text(a));
        json rows = json::array(), cols = json::array();
        for (const auto& v : t.instance.rows) rows.push_back(int_vector_json(v));
        for (const auto& v : t.instance.cols) cols.push_back(int_vector_json(v));
        trials.push_back({{"alpha", alpha},
                          {"R", rows},
                          {"C", cols},
                          {"K", cap_matrix_json(t.instance.bounds)},
                          {"lhs", num(t.report.lhs)},
                          {"rhs", num(t.report.rhs)},
                          {"degenerate", t.report.degenerate},
                          {"pass", t.report.holds}});
      }
      doc["bm"] = {{"seed", rep.seed},          {"count", rep.trials.size()}, {"violations", rep.violations},
                   {"degenerate", rep.degenerate}, {"pass", rep.violations == 0}, {"trials", std::move(trials)}};
      ok = ok && rep.violations == 0;
    }
    if (req.fquality) {
      const TableSpec spec = table();
      const FQualityReport rep = fquality_check(spec.margins, spec.bounds);
      json entry = to_json(spec);
      entry["f"] = num(rep.f);
      entry["log_count"] = num(rep.log_count);
      entry["heart"] = num(rep.heart);
      entry["excess"] = num(rep.excess);
      entry["pass"] = rep.holds;
      doc["fquality"] = std::move(entry);
      ok = ok && rep.holds;
    }
    if (req.knomial_limit) {
      const std::optional<Kappa> k = kappa_override();
      if (!k) throw DomainError("--knomial-limit requires --kappa");
      const std::vector<int> s_list = req.s_list.empty() ? std::vector<int>{1, 2, 4, 8, 16, 32} : req.s_list;
      const KnomialLimitReport rep = knomial_limit_check(req.n, req.r, *k, s_list);
      json points = json::array();
      for (const auto& p : rep.points) points.push_back({{"s", p.s}, {"error", num(p.error)}});
      doc["knomial_limit"] = {{"n", req.n},
                              {"r", req.r},
                              {"kappa", kappa_to_json(*k)},
                              {"limit", num(rep.limit)},
                              {"points", std::move(points)},
                              {"eventually_decreasing", rep.eventually_decreasing},
                              {"fitted_A", num(rep.fitted_A)},
                              {"remainder_bound_holds", rep.remainder_bound_holds},
                              {"pass", rep.holds()}};
      ok = ok && rep.holds();
    }
    if (req.upper_bound) {
      const TableSpec spec = table();
      const Kappa kappa = uniform_kappa(spec, "--upper-bound");
      const std::vector<int> s_list = req.s_list.empty() ? std::vector<int>{1, 2} : req.s_list;
      const UpperBoundReport rep = upper_bound_check(spec.margins, kappa, s_list, s_.count);
      json points = json::array();
      for (const auto& p : rep.points)
        points.push_back({{"s", p.s},
                          {"count", big(p.count)},
                          {"normalized", num(p.normalized)},
                          {"deficit", num(p.deficit)},
                          {"pass", p.holds}});
      json entry = to_json(spec);
      entry["entropy_limit"] = num(rep.entropy_limit);
      entry["points"] = std::move(points);
      entry["complete"] = rep.complete;
      entry["decreasing"] = rep.decreasing;
      entry["pass"] = rep.holds();
      doc["upper_bound"] = std::move(entry);
      ok = ok && rep.holds();
    }
    if (req.stirling) {
      const StirlingReport rep = stirling_check(req.n_max);
      doc["stirling"] = {{"n_max", rep.n_max},
                         {"violations", rep.violations},
                         {"min_lower_slack", num(rep.min_lower_slack)},
                         {"min_upper_slack", num(rep.min_upper_slack)},
                         {"pass", rep.holds()}};
      ok = ok && rep.holds();
    }
    doc["pass"] = ok;
    emit_json(doc);
    return ok ? kOk : kVerificationFailed;
  }

  int clone(int s) {
    const TableSpec spec = table();
    const CloneResult c = bct::clone(spec.margins, spec.bounds, s);
    json doc = to_json(TableSpec{c.margins, c.bounds});
    doc["s"] = c.factor;
    if (format("json") == "plain") {
      out_ << doc.dump(2) << '\n';
    } else {
      emit_json(doc);
    }
    return kOk;
  }

 private:
  Settings s_;
  std::ostream& out_;
};

void write_error(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

std::size_t budget_from_env() {
  const char* text = std::getenv("BT_BUDGET");
  if (!text || !*text) return kDefaultStateBudget;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == std::string(text).size() && v > 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw DomainError(std::string("BT_BUDGET must be a positive integer, got '") + text + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounded contingency tables: exact counts, maximum-entropy estimates and inequality checks", "bct"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Settings settings;
  app.add_option("--format", settings.format, "Output format")->check(CLI::IsMember({"json", "csv", "plain"}));
  app.add_option("--input", settings.input_path, "Table document (JSON file)");
  app.add_option("--json", settings.inline_json, "Inline table document");
  app.add_option("--kappa", settings.kappa_text, "Uniform cap (integer or inf)");
  app.add_option("--seed", settings.seed, "Seed for randomized suites");
  app.add_option("--jobs", settings.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tol", settings.tol, "Margin residual tolerance of the dual solver");
  app.add_option("--gap-tol", settings.gap_tol, "Primal/dual agreement tolerance");
  app.add_option("--max-sweeps", settings.max_sweeps, "Sweep limit of the dual solver");

  auto* count = app.add_subcommand("count", "Exact number of bounded tables");
  auto* indep = app.add_subcommand("indep", "Independence estimate");
  auto* tg = app.add_subcommand("tg", "Truncated geometric parameters at mean x");
  double x = 0;
  tg->add_option("--x", x, "Mean")->required();
  auto* maxent = app.add_subcommand("maxent", "Maximum-entropy table and dual bound");
  auto* gap = app.add_subcommand("gap", "Correlation gap");
  std::optional<double> delta;
  gap->add_option("--delta", delta, "Sparsity constant (defaults to the convexity radius)");
  auto* scan = app.add_subcommand("scan", "Gap sign along arithmetic margins");
  double eps = 0;
  int scan_n = 0;
  ScanOptions scan_options;
  scan->add_option("--eps", eps, "Margin step")->required();
  scan->add_option("--n", scan_n, "Number of rows and columns")->required();
  scan->add_option("--gamma-min", scan_options.gamma_min, "First gamma of the grid");
  scan->add_option("--gamma-max", scan_options.gamma_max, "Last gamma of the grid");
  scan->add_option("--gamma-step", scan_options.gamma_step, "Grid spacing");
  scan->add_option("--boundary-tol", scan_options.boundary_tol, "Bisection width for sign changes");
  auto* verify = app.add_subcommand("verify", "Numerical checks of the inequalities");
  Runner::VerifyRequest req;
  verify->add_flag("--bm", req.bm, "Randomized Brunn-Minkowski-type trials");
  verify->add_flag("--fquality", req.fquality, "Concavification quality bound on the input table");
  verify->add_flag("--knomial-limit", req.knomial_limit, "Convergence of scaled knomial logs");
  verify->add_flag("--upper-bound", req.upper_bound, "Cloned counts against the entropy limit");
  verify->add_flag("--stirling", req.stirling, "Stirling sandwich for ln omega");
  verify->add_option("--trials", req.trials, "Number of random trials")->check(CLI::NonNegativeNumber);
  verify->add_option("--n", req.n, "Knomial length");
  verify->add_option("--r", req.r, "Knomial index");
  verify->add_option("--s", req.s_list, "Scale factors, comma separated")->delimiter(',');
  verify->add_option("--n-max", req.n_max, "Largest n for the Stirling check");
  auto* clone = app.add_subcommand("clone", "s-fold clone of the input table");
  int s = 2;
  clone->add_option("--s", s, "Clone factor")->required();

  std::vector<const char*> argv{"bct"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what());
    return kDomainError;
  }

  try {
    settings.count.state_budget = budget_from_env();
    Runner runner(settings, out);
    if (count->parsed()) return runner.count();
    if (indep->parsed()) return runner.indep();
    if (tg->parsed()) return runner.tg(x);
    if (maxent->parsed()) return runner.maxent();
    if (gap->parsed()) return runner.gap(delta);
    if (scan->parsed()) return runner.scan(eps, scan_n, scan_options);
    if (verify->parsed()) return runner.verify(req);
    if (clone->parsed()) return runner.clone(s);
  } catch (const BudgetExceeded& e) {
    write_error(err, "budget_exceeded", e.what());
    return kBudgetExhausted;
  } catch (const ConvergenceError& e) {
    write_error(err, "not_converged", e.what());
    return kBudgetExhausted;
  } catch (const std::exception& e) {
    write_error(err, "domain_error", e.what());
    return kDomainError;
  }
  return kDomainError;
}

}  // namespace bct::cli
