#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bct/truncated_geometric.hpp"
#include "oracles.hpp"

using namespace bct;

namespace {

const Kappa kInf = Kappa::infinite();

// Sum_t p q^t and sum_t t p q^t, by direct summation (long tail for kappa = inf).
std::pair<long double, long double> moments(const TGParams<double>& tg) {
  const std::int64_t top = tg.kappa.is_infinite() ? 20000 : tg.kappa.value();
  long double mass = 0, mean = 0, w = tg.p;
  for (std::int64_t t = 0; t <= top; ++t, w *= tg.q) {
    mass += w;
    mean += t * w;
  }
  return {mass, mean};
}

}  // namespace

TEST_CASE("solve_tg examples") {
  for (std::int64_t k : {1, 2, 7}) {
    const auto mid = solve_tg(k / 2.0, Kappa(k));
    CHECK(mid.q == 1.0);
    CHECK(mid.p == doctest::Approx(1.0 / (k + 1)));
  }
  const auto a = solve_tg(0.25, Kappa(1));
  CHECK(a.q == doctest::Approx(1.0 / 3).epsilon(1e-13));
  CHECK(a.p == doctest::Approx(0.75).epsilon(1e-13));
  const auto b = solve_tg(2.0, kInf);
  CHECK(b.q == doctest::Approx(2.0 / 3));
  CHECK(b.p == doctest::Approx(1.0 / 3));
}

TEST_CASE("solve_tg boundary conventions and domain") {
  const auto zero = solve_tg(0.0, Kappa(3));
  CHECK(zero.p == 1.0);
  CHECK(zero.q == 0.0);
  CHECK(solve_tg(3.0, Kappa(3)).saturated());
  CHECK_THROWS_AS(solve_tg(3.5, Kappa(3)), DomainError);
  CHECK_THROWS_AS(solve_tg(-0.1, Kappa(3)), DomainError);
  CHECK_THROWS_AS(solve_tg(std::numeric_limits<double>::infinity(), kInf), DomainError);
}

TEST_CASE("defining equations hold on a grid") {
  for (Kappa kappa : {Kappa(1), Kappa(2), Kappa(3), Kappa(10), kInf}) {
    const double top = kappa.is_infinite() ? 20.0 : static_cast<double>(kappa.value());
    for (int k = 1; k < 200; ++k) {
      const double x = top * k / 200.0;
      const auto tg = solve_tg(x, kappa);
      const auto [mass, mean] = moments(tg);
      CHECK(std::abs(static_cast<double>(mass) - 1) < 1e-10);
      CHECK(std::abs(static_cast<double>(mean) - x) < 1e-10);
    }
  }
}

TEST_CASE("closed forms for kappa 1 and infinity") {
  for (int k = 1; k < 100; ++k) {
    const double x = k / 100.0;
    const auto one = solve_tg(x, Kappa(1));
    CHECK(std::abs(one.q - x / (1 - x)) < 1e-12 * std::max(1.0, x / (1 - x)));
    CHECK(std::abs(one.p - (1 - x)) < 1e-12);
    CHECK(hmax(x, Kappa(1)) == doctest::Approx(-x * std::log(x) - (1 - x) * std::log1p(-x)).epsilon(1e-12));
    const double y = 5.0 * x;
    const auto inf = solve_tg(y, kInf);
    CHECK(std::abs(inf.q - y / (y + 1)) < 1e-12);
    CHECK(std::abs(inf.p - 1 / (y + 1)) < 1e-12);
  }
}

TEST_CASE("hmax examples") {
  CHECK(hmax(0.5, Kappa(1)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  for (std::int64_t k : {1, 2, 5, 100}) CHECK(hmax(k / 2.0, Kappa(k)) == doctest::Approx(std::log(k + 1.0)));
  CHECK(hmax(1.0, kInf) == doctest::Approx(2 * std::log(2.0)));
  CHECK(hmax(0.0, Kappa(3)) == 0.0);
  CHECK(hmax(3.0, Kappa(3)) == 0.0);
}

TEST_CASE("hmax equals the entropy found by a direct solve") {
  for (std::int64_t k : {2, 3, 10, 80, 200})
    for (double frac : {0.01, 0.2, 0.45, 0.7, 0.97}) {
      const double x = frac * static_cast<double>(k);
      CHECK(hmax(x, Kappa(k)) == doctest::Approx(oracle::hmax_direct(x, k)).epsilon(1e-9));
    }
}

TEST_CASE("complement symmetry") {
  for (std::int64_t k : {2, 3, 10})
    for (double frac : {0.05, 0.3, 0.49}) {
      const double x = frac * static_cast<double>(k);
      const auto lo = solve_tg(x, Kappa(k));
      const auto hi = solve_tg(static_cast<double>(k) - x, Kappa(k));
      CHECK(hi.q == doctest::Approx(1 / lo.q).epsilon(1e-10));
      CHECK(hmax(x, Kappa(k)) == doctest::Approx(hmax(static_cast<double>(k) - x, Kappa(k))).epsilon(1e-12));
    }
}

TEST_CASE("hmax is strictly concave") {
  for (Kappa kappa : {Kappa(1), Kappa(2), Kappa(5), kInf}) {
    const double top = kappa.is_infinite() ? 8.0 : static_cast<double>(kappa.value());
    for (int a = 0; a <= 20; ++a)
      for (int b = a + 1; b <= 20; ++b) {
        const double x = top * a / 20, y = top * b / 20;
        if (y - x <= 1e-3) continue;
        for (double t : {0.25, 0.5, 0.75}) {
          const double mid = hmax(t * x + (1 - t) * y, kappa);
          CHECK(mid > t * hmax(x, kappa) + (1 - t) * hmax(y, kappa) + 1e-12);
        }
      }
  }
}

TEST_CASE("derivative matches finite differences") {
  const double h = 1e-5;
  for (Kappa kappa : {Kappa(1), Kappa(2), Kappa(5), kInf}) {
    const double top = kappa.is_infinite() ? 6.0 : static_cast<double>(kappa.value());
    for (int k = 1; k < 40; ++k) {
      const double x = top * k / 40;
      const double fd = (hmax(x + h, kappa) - hmax(x - h, kappa)) / (2 * h);
      CHECK(std::abs(hmax_deriv(x, kappa) - fd) < 1e-6);
    }
  }
  CHECK(hmax_deriv(1.0, Kappa(2)) == doctest::Approx(0.0));
  CHECK(hmax_deriv(0.25, Kappa(1)) == doctest::Approx(std::log(3.0)));
  CHECK(hmax_deriv(1.0, kInf) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(hmax_deriv(0.0, Kappa(2)), DomainError);
}

TEST_CASE("phi examples and finite differences") {
  CHECK(phi(0.0, Kappa(2)) == 0.0);
  CHECK(phi(0.5, Kappa(1)) == doctest::Approx(-1.0));
  CHECK(phi(1.0, kInf) == doctest::Approx(-0.5));
  for (int k = 1; k < 50; ++k) {
    const double x = k / 50.0;
    CHECK(phi(x, Kappa(1)) == doctest::Approx(-x / (1 - x)).epsilon(1e-9));
    CHECK(phi(3 * x, kInf) == doctest::Approx(-3 * x / (1 + 3 * x)).epsilon(1e-12));
  }
  for (std::int64_t kk : {2, 3, 10}) {
    const Kappa kappa(kk);
    const double K = static_cast<double>(kk);
    for (int k = 0; k <= 20; ++k) {
      const double x = K * (0.05 + 0.9 * k / 20);
      const double h = 1e-4 * K;
      const double second = (hmax(x + h, kappa) - 2 * hmax(x, kappa) + hmax(x - h, kappa)) / (h * h);
      CHECK(phi(x, kappa) == doctest::Approx(x * x * second).epsilon(1e-5));
    }
  }
  CHECK_THROWS_AS(phi(2.0, Kappa(2)), DomainError);
}

TEST_CASE("series bound near zero") {
  for (std::int64_t k : {2, 3, 5, 10})
    for (int i = 1; i <= 500; ++i) {
      const double x = 0.05 * i / 500;
      CHECK(std::abs(phi(x, Kappa(k)) + x - x * x) <= 10 * x * x * x);
    }
}

TEST_CASE("hmax is the maximum entropy for its mean") {
  std::mt19937 rng(17);
  std::exponential_distribution<double> expo(1.0);
  for (std::int64_t k : {1, 2, 4, 9}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> p(static_cast<std::size_t>(k + 1));
      double total = 0;
      for (auto& v : p) total += v = expo(rng);
      double mean = 0;
      for (std::size_t t = 0; t < p.size(); ++t) mean += static_cast<double>(t) * (p[t] /= total);
      mean = std::clamp(mean, 0.0, static_cast<double>(k));
      CHECK(oracle::entropy(p) <= hmax(mean, Kappa(k)) + 1e-12);
    }
  }
}

TEST_CASE("variance closed forms") {
  CHECK(tg_variance(2.0, kInf) == doctest::Approx(6.0));
  for (double x : {0.1, 0.4, 0.8}) CHECK(tg_variance(x, Kappa(1)) == doctest::Approx(x * (1 - x)).epsilon(1e-12));
  CHECK(tg_variance(1.0, Kappa(2)) == doctest::Approx(2.0 / 3));
}

TEST_CASE("cell moments agree across evaluation regimes") {
  // Large caps switch from term sums to series and closed forms; compare
  // against long double summation.
  for (std::int64_t cap : {65, 100, 1000})
    for (double u : {-1e-7, -1e-5, -2e-4, -0.003, -0.05, -0.7, 0.01, 0.4}) {
      long double s0 = 0, s1 = 0, s2 = 0;
      for (std::int64_t t = 0; t <= cap; ++t) {
        const long double w = std::exp(static_cast<long double>(u) * t - (u > 0 ? u * cap : 0.0));
        s0 += w;
        s1 += t * w;
        s2 += static_cast<long double>(t) * t * w;
      }
      const double mean = static_cast<double>(s1 / s0);
      const double var = static_cast<double>(s2 / s0 - (s1 / s0) * (s1 / s0));
      const double logz = static_cast<double>(std::log(s0)) + (u > 0 ? u * cap : 0.0);
      const auto m = cell_moments(u, cap);
      CHECK(m.mean == doctest::Approx(mean).epsilon(1e-10));
      CHECK(m.variance == doctest::Approx(var).epsilon(1e-7));
      CHECK(m.log_partition == doctest::Approx(logz).epsilon(1e-12));
    }
}

TEST_CASE("entropy loss") {
  const Eigen::Vector3d uniform3 = Eigen::Vector3d::Constant(1.0 / 3);
  for (double r : {0.0, 0.5, 2.0, 4.5}) CHECK(entropy_loss(r, uniform3, Kappa(2)) == doctest::Approx(0.0));

  const Eigen::Vector2d point(1.0, 0.0);
  for (double r : {0.5, 1.0, 3.0})
    CHECK(entropy_loss(r, point, kInf) == doctest::Approx(2 * hmax(r / 2, kInf) - hmax(r, kInf)));

  const Eigen::Vector2d skew(0.75, 0.25);
  CHECK(entropy_loss(1.0, skew, Kappa(2)) ==
        doctest::Approx(2 * hmax(0.5, Kappa(2)) - hmax(0.75, Kappa(2)) - hmax(0.25, Kappa(2))));
  CHECK(entropy_loss(0.0, skew, Kappa(2)) == 0.0);

  CHECK_THROWS_AS(entropy_loss(3.0, skew, Kappa(2)), DomainError);
  CHECK_THROWS_AS(entropy_loss(1.0, Eigen::Vector2d(0.5, 0.6), Kappa(2)), DomainError);
}

TEST_CASE("convexity radius") {
  CHECK(convexity_radius(Kappa(1)) == 0.0);
  for (std::int64_t k : {2, 3, 5, 10}) {
    const double delta = convexity_radius(Kappa(k));
    CHECK(delta > 0);
    CHECK(delta < 1);
    // phi is convex just inside the radius and not just beyond it.
    const double K = static_cast<double>(k), h = 1e-4 * K;
    auto second = [&](double x) { return phi(x + h, Kappa(k)) - 2 * phi(x, Kappa(k)) + phi(x - h, Kappa(k)); };
    CHECK(second(delta * K * 0.99) > 0);
    CHECK(second(delta * K + 2 * h) <= 0);
  }
  CHECK(convexity_radius(Kappa(2)) == doctest::Approx(0.0511).epsilon(0.02));
  CHECK_THROWS_AS(convexity_radius(kInf), DomainError);
}

TEST_CASE("long double instantiation") {
  const auto tg = solve_tg(0.3L, Kappa(4));
  CHECK(static_cast<double>(hmax(0.3L, Kappa(4))) == doctest::Approx(hmax(0.3, Kappa(4))));
  CHECK(static_cast<double>(tg.q) == doctest::Approx(solve_tg(0.3, Kappa(4)).q));
}
