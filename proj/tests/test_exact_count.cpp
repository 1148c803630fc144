#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "bct/exact_count.hpp"
#include "oracles.hpp"

using namespace bct;

namespace {

BigInt count_uniform(std::initializer_list<double> r, std::initializer_list<double> c, Kappa kappa) {
  const MarginPair mp(r, c);
  return count_tables(mp, BoundsMatrix::uniform(mp.m(), mp.n(), kappa));
}

}  // namespace

TEST_CASE("knomial examples") {
  CHECK(knomial(2, 2, Kappa(2)) == 3);
  CHECK(knomial(4, 2, Kappa(1)) == 6);
  CHECK(knomial(2, 3, Kappa::infinite()) == 4);
  CHECK(knomial(3, 7, Kappa(2)) == 0);
  CHECK(knomial(3, -1, Kappa(2)) == 0);
  CHECK(knomial(0, 0, Kappa(2)) == 1);
  CHECK(knomial(5, 0, Kappa(0)) == 1);
  CHECK(knomial(5, 1, Kappa(0)) == 0);
}

TEST_CASE("knomial matches schoolbook expansion") {
  for (std::int64_t kappa : {1, 2, 3, 5})
    for (std::int64_t n : {0, 1, 2, 5, 9}) {
      const auto poly = oracle::knomial_poly(n, kappa);
      for (std::size_t r = 0; r < poly.size(); ++r)
        CHECK(knomial(n, static_cast<std::int64_t>(r), Kappa(kappa)) == poly[r]);
      const auto row = knomial_row(n, Kappa(kappa), n * kappa);
      CHECK(row == poly);
    }
}

TEST_CASE("knomial symmetry and row sums") {
  for (std::int64_t kappa : {1, 2, 4})
    for (std::int64_t n : {1, 3, 6}) {
      BigInt total = 0;
      for (std::int64_t r = 0; r <= n * kappa; ++r) {
        CHECK(knomial(n, r, Kappa(kappa)) == knomial(n, n * kappa - r, Kappa(kappa)));
        total += knomial(n, r, Kappa(kappa));
      }
      CHECK(total == boost::multiprecision::pow(BigInt(kappa + 1), static_cast<unsigned>(n)));
    }
}

TEST_CASE("unbounded knomial is a binomial") {
  for (std::int64_t n : {1, 2, 5})
    for (std::int64_t r : {0, 1, 4, 9}) CHECK(knomial(n, r, Kappa::infinite()) == binomial(r + n - 1, r));
}

TEST_CASE("count examples") {
  CHECK(count_uniform({1, 1}, {1, 1}, Kappa(1)) == 2);
  CHECK(count_uniform({2, 2}, {2, 2}, Kappa::infinite()) == 3);
  CHECK(count_uniform({2, 2}, {2, 2}, Kappa(1)) == 1);
  CHECK(count_uniform({2, 2, 2, 2}, {2, 2, 2, 2}, Kappa(1)) == 90);
  CHECK(count_uniform({3, 0}, {2, 1}, Kappa(1)) == 0);
  CHECK(count_uniform({0, 0}, {0, 0, 0}, Kappa(1)) == 1);
}

TEST_CASE("count rejects mismatched or fractional margins") {
  CHECK_THROWS_AS(count_uniform({3}, {1, 1}, Kappa(1)), DomainError);
  CHECK_THROWS_AS(count_uniform({1.5, 0.5}, {1, 1}, Kappa(1)), DomainError);
  const MarginPair mp({1, 1}, {1, 1});
  CHECK_THROWS_AS(count_tables(mp, BoundsMatrix::uniform(3, 2, Kappa(1))), DomainError);
}

TEST_CASE("count agrees with brute force on random bounds") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = std::uniform_int_distribution<Index>(1, 3)(rng);
    const Index n = std::uniform_int_distribution<Index>(1, 4)(rng);
    CapMatrix K(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) {
        const int pick = std::uniform_int_distribution<int>(0, 4)(rng);
        K(i, j) = pick == 4 ? kUnbounded : pick;
      }
    const std::int64_t N = std::uniform_int_distribution<std::int64_t>(0, 7)(rng);
    const auto rs = oracle::compositions(m, N), cs = oracle::compositions(n, N);
    const IntVector R = rs[std::uniform_int_distribution<std::size_t>(0, rs.size() - 1)(rng)];
    const IntVector C = cs[std::uniform_int_distribution<std::size_t>(0, cs.size() - 1)(rng)];
    CHECK(count_tables(MarginPair(R, C), BoundsMatrix(K)) == oracle::brute_count(R, C, K));
  }
}

TEST_CASE("count is invariant under permutations and transposition") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    CapMatrix K(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) K(i, j) = std::uniform_int_distribution<std::int64_t>(0, 3)(rng);
    const std::int64_t N = std::uniform_int_distribution<std::int64_t>(0, 8)(rng);
    const auto rs = oracle::compositions(3, N);
    const IntVector R = rs[std::uniform_int_distribution<std::size_t>(0, rs.size() - 1)(rng)];
    const IntVector C = rs[std::uniform_int_distribution<std::size_t>(0, rs.size() - 1)(rng)];
    const BigInt base = count_tables(MarginPair(R, C), BoundsMatrix(K));

    Eigen::PermutationMatrix<Eigen::Dynamic> P(3), Q(3);
    P.setIdentity();
    Q.setIdentity();
    std::shuffle(P.indices().data(), P.indices().data() + 3, rng);
    std::shuffle(Q.indices().data(), Q.indices().data() + 3, rng);
    const IntVector R2 = P * R, C2 = Q * C;
    const CapMatrix K2 = P * K * Q.transpose();
    CHECK(count_tables(MarginPair(R2, C2), BoundsMatrix(K2)) == base);
    CHECK(count_tables(MarginPair(C, R), BoundsMatrix(CapMatrix(K.transpose()))) == base);
  }
}

TEST_CASE("complement symmetry for uniform kappa") {
  for (std::int64_t kappa : {1, 2, 3}) {
    const auto rs = oracle::compositions(2, 3);
    const auto cs = oracle::compositions(3, 3);
    for (const IntVector& R : rs)
      for (const IntVector& C : cs) {
        const IntVector Rc = IntVector::Constant(2, 3 * kappa) - R;
        const IntVector Cc = IntVector::Constant(3, 2 * kappa) - C;
        if ((Rc.array() < 0).any() || (Cc.array() < 0).any()) continue;
        const auto K = BoundsMatrix::uniform(2, 3, Kappa(kappa));
        CHECK(count_tables(MarginPair(R, C), K) == count_tables(MarginPair(Rc, Cc), K));
      }
  }
}

TEST_CASE("generating function identity on 2x2 bounds") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  CapMatrix K(2, 2);
  K << 1, 2, 3, 1;
  const BoundsMatrix B(K);
  for (int point = 0; point < 3; ++point) {
    const double x[2] = {u(rng), u(rng)}, y[2] = {u(rng), u(rng)};
    double G = 1;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double factor = 0;
        for (std::int64_t t = 0; t <= K(i, j); ++t) factor += std::pow(x[i] * y[j], static_cast<double>(t));
        G *= factor;
      }
    double series = 0;
    for (std::int64_t r1 = 0; r1 <= 3; ++r1)
      for (std::int64_t r2 = 0; r2 <= 4; ++r2)
        for (std::int64_t c1 = 0; c1 <= 4; ++c1) {
          const std::int64_t c2 = r1 + r2 - c1;
          if (c2 < 0 || c2 > 3) continue;
          const BigInt T = count_tables(MarginPair({double(r1), double(r2)}, {double(c1), double(c2)}), B);
          series += T.convert_to<double>() * std::pow(x[0], double(r1)) * std::pow(x[1], double(r2)) *
                    std::pow(y[0], double(c1)) * std::pow(y[1], double(c2));
        }
    CHECK(series == doctest::Approx(G).epsilon(1e-12));
  }
}

TEST_CASE("count_cloned") {
  const MarginPair mp({1, 1}, {1, 1});
  CHECK(count_cloned(mp, Kappa(1), 1) == 2);
  CHECK(count_cloned(mp, Kappa(1), 2) == 90);
  const MarginPair other({2, 1}, {1, 1, 1});
  CHECK(count_cloned(other, Kappa(2), 1) == count_tables(other, BoundsMatrix::uniform(2, 3, Kappa(2))));
}

TEST_CASE("state budget") {
  const MarginPair mp({5, 5, 5, 5, 5, 5}, {5, 5, 5, 5, 5, 5});
  CountOptions tiny;
  tiny.state_budget = 3;
  CHECK_THROWS_AS(count_tables(mp, BoundsMatrix::uniform(6, 6, Kappa(2)), tiny), BudgetExceeded);
}

TEST_CASE("independence estimate examples") {
  const MarginPair a({1, 1}, {1, 1});
  CHECK(indep_estimate(a, Kappa(1)).value() == BigRational(8, 3));
  CHECK(indep_estimate(a, Kappa::infinite()).value() == BigRational(8, 5));
  const MarginPair b({2, 0}, {1, 1});
  CHECK(indep_estimate(b, Kappa(1)).value() == BigRational(2, 3));
  CHECK(indep_estimate(b, Kappa(1)).log() == doctest::Approx(std::log(2.0 / 3.0)));

  const MarginPair out({3, 0}, {2, 1});
  const BigRatio z = indep_estimate(out, Kappa(1));
  CHECK(z.out_of_support);
  CHECK(z.is_zero());
  CHECK(std::isinf(z.log()));
}

TEST_CASE("independence estimate from knomials") {
  const MarginPair mp({2, 3, 1}, {1, 4, 1});
  const Kappa kappa(2);
  const BigRational expect = BigRational(knomial(3, 2, kappa) * knomial(3, 3, kappa) * knomial(3, 1, kappa) *
                                             knomial(3, 1, kappa) * knomial(3, 4, kappa) * knomial(3, 1, kappa),
                                         knomial(9, 6, kappa));
  CHECK(indep_estimate(mp, kappa).value() == expect);
}

TEST_CASE("log of huge counts stays finite") {
  const MarginPair mp({40, 40, 40, 40}, {40, 40, 40, 40});
  const BigRatio r = indep_estimate(mp, Kappa(30));
  CHECK(std::isfinite(r.log()));
  CHECK(static_cast<double>(r.log_precise()) == doctest::Approx(r.log()));
}
