#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

namespace qsg {

/// Exact fraction with positive denominator, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend constexpr auto operator<=>(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den <=> static_cast<__int128>(b.num) * a.den;
  }
};

/// Parses "7", "5/1", "7/3" exactly; returns nullopt for decimals such as "2.5".
std::optional<Rational> parse_rational(const std::string& text);

std::string to_string(const Rational& q);

}  // namespace qsg
