#include "bct/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace bct {

std::string to_string(Kappa k) { return k.is_infinite() ? "inf" : std::to_string(k.value()); }

Kappa parse_kappa(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "infinity" || lower == "oo") return Kappa::infinite();
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw DomainError("kappa must be a nonnegative integer or 'inf', got '" + text + "'");
  }
  if (used != text.size() || v < 0)
    throw DomainError("kappa must be a nonnegative integer or 'inf', got '" + text + "'");
  return Kappa(v);
}

LogReal log_of(const BigInt& value) {
  if (value <= 0) throw DomainError("log_of: argument must be positive");
  const std::size_t bits = boost::multiprecision::msb(value) + 1;
  constexpr std::size_t kKeep = 128;
  if (bits <= kKeep) return boost::multiprecision::log(LogReal(value));
  const std::size_t shift = bits - kKeep;
  const BigInt head = value >> shift;
  static const LogReal ln2 = boost::multiprecision::log(LogReal(2));
  // The dropped low bits contribute less than 2^-127 relative error.
  return boost::multiprecision::log(LogReal(head)) + LogReal(shift) * ln2;
}

LogReal log_of(const BigRational& value) {
  if (value <= 0) throw DomainError("log_of: argument must be positive");
  return log_of(BigInt(boost::multiprecision::numerator(value))) -
         log_of(BigInt(boost::multiprecision::denominator(value)));
}

BigInt binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

bool is_integral(double x, double tol) { return std::abs(x - std::round(x)) <= tol; }

}  // namespace bct
