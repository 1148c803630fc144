#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bct/correlation.hpp"
#include "bct/truncated_geometric.hpp"
#include "oracles.hpp"

using namespace bct;

TEST_CASE("gap examples") {
  for (Kappa kappa : {Kappa(1), Kappa(2), Kappa(5), Kappa::infinite()}) {
    const auto rep = correlation_gap(MarginPair({1, 1, 1}, {1.5, 1.5}), kappa);
    CHECK(std::abs(rep.gap) < kGapZeroBand);
    CHECK(rep.sign == GapSign::zero);
    CHECK_FALSE(rep.strict_expected);
  }
  const MarginPair sparse_mp({0.1, 0.2, 0.1, 0.2}, {0.1, 0.2, 0.1, 0.2});
  const auto sparse = correlation_gap(sparse_mp, Kappa(2));
  CHECK(sparse.hypothesis_ok);
  CHECK(sparse.gap > 0);
  CHECK(sparse.sign == GapSign::positive);
  CHECK(sparse.strict_expected);

  const auto mid = correlation_gap(MarginPair({2, 2.02}, {2, 2.02}), Kappa(2));
  CHECK(mid.gap < 0);
  CHECK(mid.sign == GapSign::negative);
}

TEST_CASE("R = C = (1, 2) with kappa 2 is negatively correlated") {
  // z11 = z leaves z12 = z21 = 1 - z, z22 = 1 + z.
  auto H = [](double x) { return oracle::hmax_direct(x, 2); };
  const double best =
      oracle::maximize_1d([&](double z) { return H(z) + 2 * H(1 - z) + H(1 + z); }, 0.0, 1.0);
  const double indep = -4 * H(0.75) + 4 * (H(0.5) + H(1.0));
  const auto rep = correlation_gap(MarginPair({1, 2}, {1, 2}), Kappa(2));
  CHECK(rep.entropy_limit == doctest::Approx(best).epsilon(1e-9));
  CHECK(rep.gap == doctest::Approx(best - indep).epsilon(1e-7));
  CHECK(rep.gap < 0);
  CHECK_FALSE(rep.hypothesis_ok);
}

TEST_CASE("gap components") {
  const MarginPair mp({1, 2}, {1, 2});
  const auto rep = correlation_gap(mp, Kappa(2));
  CHECK(rep.entropy_limit == doctest::Approx(entropy_limit(mp, Kappa(2))).epsilon(1e-10));
  CHECK(rep.indep_limit == doctest::Approx(indep_log_limit(mp, Kappa(2))));
  CHECK(rep.gap == doctest::Approx(rep.entropy_limit - rep.indep_limit));
  CHECK(rep.delta == doctest::Approx(convexity_radius(Kappa(2))));
  CHECK(correlation_gap(mp, Kappa::infinite()).delta == 1.0);
}

TEST_CASE("transpose and complement symmetry") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(0.2, 2.8);
  for (int trial = 0; trial < 15; ++trial) {
    Eigen::MatrixXd Z(2, 3);
    for (auto& v : Z.reshaped()) v = u(rng);
    const Eigen::VectorXd r = Z.rowwise().sum(), c = Z.colwise().sum().transpose();
    const Kappa kappa(3);
    const double gap = correlation_gap(MarginPair(r, c), kappa).gap;
    CHECK(correlation_gap(MarginPair(c, r), kappa).gap == doctest::Approx(gap).epsilon(1e-8).scale(1));
    const Eigen::VectorXd rc = Eigen::VectorXd::Constant(2, 9.0) - r;
    const Eigen::VectorXd cc = Eigen::VectorXd::Constant(3, 6.0) - c;
    CHECK(correlation_gap(MarginPair(rc, cc), kappa).gap == doctest::Approx(gap).epsilon(1e-8).scale(1));
  }
}

TEST_CASE("hloss equality cases") {
  const auto uniform_cols = hloss_inequality_check(MarginPair({1, 2, 3}, {3, 3}), Kappa(5));
  CHECK(uniform_cols.lhs == doctest::Approx(0.0).scale(1));
  CHECK(uniform_cols.rhs == doctest::Approx(0.0).scale(1));
  CHECK(uniform_cols.equality);
  CHECK(uniform_cols.holds);

  const auto constant_rows = hloss_inequality_check(MarginPair({2, 2}, {1, 3}), Kappa(5));
  CHECK(std::abs(constant_rows.lhs - constant_rows.rhs) < 1e-10);
  CHECK(constant_rows.equality);
}

TEST_CASE("hloss strict on sparse non-constant margins") {
  const auto rep = hloss_inequality_check(MarginPair({0.1, 0.2, 0.1, 0.2}, {0.1, 0.2, 0.1, 0.2}), Kappa(2));
  CHECK(rep.holds);
  CHECK_FALSE(rep.equality);
  CHECK(rep.margin > 0);
  CHECK(rep.lhs > rep.rhs);
}

TEST_CASE("hloss rejects a rank-one table above kappa") {
  try {
    hloss_inequality_check(MarginPair({1, 4}, {1, 4}), Kappa(2));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("(2, 2)") != std::string::npos);
  }
}

TEST_CASE("attraction examples") {
  // delta = 0.9 admits R = C = (1, 2), whose gap is negative: the check
  // reports the failed chain instead of asserting the conclusion.
  const auto wide = attraction_check(MarginPair({1, 2}, {1, 2}), Kappa(2), 0.9);
  CHECK(wide.product == doctest::Approx(4.0));
  CHECK(wide.threshold == doctest::Approx(5.4));
  CHECK(wide.hypothesis_ok);
  REQUIRE(wide.correlation);
  CHECK(wide.correlation->gap < 0);
  CHECK_FALSE(wide.strict_holds);

  const auto rep = attraction_check(MarginPair({0.1, 0.2, 0.1, 0.2}, {0.1, 0.2, 0.1, 0.2}), Kappa(2));
  CHECK(rep.delta == doctest::Approx(convexity_radius(Kappa(2))));
  CHECK(rep.hypothesis_ok);
  REQUIRE(rep.correlation);
  CHECK(rep.correlation->gap > 0);
  CHECK(rep.chain_holds);
  CHECK(rep.strict_holds);

  const auto constant = attraction_check(MarginPair({1, 1}, {0.5, 1.5}), Kappa(2), 0.9);
  CHECK(constant.hypothesis_ok);
  CHECK_FALSE(constant.strict_expected);
  CHECK(constant.chain_holds);
  REQUIRE(constant.hloss);
  CHECK(constant.hloss->equality);

  CHECK_THROWS_AS(attraction_check(MarginPair({1, 2}, {1, 2}), Kappa(1), 0.9), DomainError);
  CHECK_THROWS_AS(attraction_check(MarginPair({1, 2}, {1, 2}), Kappa::infinite(), 0.9), DomainError);

  const auto outside = attraction_check(MarginPair({1, 2}, {1, 2}), Kappa(2), 0.1);
  CHECK_FALSE(outside.hypothesis_ok);
  CHECK_FALSE(outside.correlation);
}

TEST_CASE("arithmetic margins") {
  const Eigen::VectorXd v = arithmetic_margins(2.0, 0.5, 3);
  CHECK(v.isApprox(Eigen::Vector3d(2.0, 2.5, 3.0)));
}

TEST_CASE("zero spread scan is flat") {
  ScanOptions opts;
  opts.gamma_step = 0.25;
  const auto res = margin_scan(Kappa(2), 0.0, 3, opts);
  CHECK_FALSE(res.points.empty());
  for (const auto& p : res.points) CHECK(std::abs(p.gap) < kGapZeroBand);
  CHECK(res.boundaries.empty());
  CHECK(res.negative_intervals.empty());
}

TEST_CASE("kappa 2 scan boundaries") {
  ScanOptions opts;
  opts.jobs = 4;
  for (int n : {2, 3}) {
    const auto res = margin_scan(Kappa(2), 0.02, n, opts);
    REQUIRE(res.boundaries.size() == 2);
    CHECK(std::abs(res.boundaries[0] - 0.09 * n) <= 0.05 * n);
    CHECK(std::abs(res.boundaries[1] - 1.89 * n) <= 0.05 * n);
    REQUIRE(res.negative_intervals.size() == 1);
    // Sparse margins near the origin are positively correlated.
    CHECK(res.points.front().gap >= -kGapZeroBand);
  }
}

TEST_CASE("scan is deterministic across job counts") {
  ScanOptions one, many;
  many.jobs = 3;
  const auto a = margin_scan(Kappa(2), 0.02, 2, one);
  const auto b = margin_scan(Kappa(2), 0.02, 2, many);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k].gap == b.points[k].gap);
  CHECK(a.boundaries == b.boundaries);
}
