#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

namespace bct {

using Index = Eigen::Index;

using BigInt = boost::multiprecision::mpz_int;
using BigRational = boost::multiprecision::mpq_rational;

// 128-bit mantissa float used for logarithms of exact quantities.
using LogReal = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<128, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using CapMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Entry of a CapMatrix meaning "no upper bound".
inline constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

// Uniform entry cap: a positive integer or infinity.
class Kappa {
 public:
  constexpr explicit Kappa(std::int64_t value) : value_(value) {
    if (value < 0) throw std::invalid_argument("kappa must be nonnegative");
  }
  static constexpr Kappa infinite() { return Kappa(kUnbounded); }

  constexpr bool is_infinite() const { return value_ == kUnbounded; }
  constexpr bool is_finite() const { return !is_infinite(); }
  constexpr std::int64_t value() const { return value_; }

  friend constexpr bool operator==(Kappa a, Kappa b) = default;

 private:
  std::int64_t value_;
};

std::string to_string(Kappa k);
// Accepts decimal integers and "inf"/"infinity".
Kappa parse_kappa(const std::string& text);

// Input violates an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured state or support budget was exceeded.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

// Natural log of a positive big integer, computed from its leading 128 bits
// plus the binary exponent so that huge values never pass through double.
LogReal log_of(const BigInt& value);
// Natural log of a positive rational.
LogReal log_of(const BigRational& value);

BigInt binomial(std::int64_t n, std::int64_t k);

bool is_integral(double x, double tol = 0.0);

}  // namespace bct
