#include "qsg/quadrature.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace qsg {

double scaled_upper_gamma(double b, double x) {
  if (!(x > 0)) throw Error(ErrorCode::InvalidParams, "scaled_upper_gamma needs x > 0");
  if (x > 40.0 + std::abs(b)) {
    // Asymptotic series (1/x) Σ (b−1)(b−2)…(b−k) / x^k, truncated at its smallest term.
    double term = 1.0 / x, sum = term;
    for (int k = 1; k < 60; ++k) {
      const double next = term * (b - k) / x;
      if (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-18 * std::abs(sum)) {
        sum += next;
        break;
      }
      term = next;
      sum += term;
    }
    return sum;
  }
  // Shift b upward until Γ(b, x) is available directly, then recur downward with
  // S(b) = (x S(b+1) − 1) / b.
  int shift = 0;
  while (b + shift < 0.0) ++shift;
  const double top = b + shift;
  double s;
  if (top == 0.0) {
    s = std::exp(x) * boost::math::expint(1, x);
  } else {
    s = std::exp(x) * std::pow(x, -top) * boost::math::tgamma(top, x);
  }
  for (int k = shift - 1; k >= 0; --k) s = (x * s - 1.0) / (b + k);
  return s;
}

double tail_integral(double value, double r_max, int dim, const TailModel& tail) {
  if (value == 0.0) return 0.0;
  switch (tail.kind) {
    case TailModel::Kind::None: return 0.0;
    case TailModel::Kind::Exponential: {
      if (!(tail.rate > 0)) break;
      const double x = tail.rate * r_max;
      return sphere_area(dim) * value * std::pow(r_max, dim) * scaled_upper_gamma(dim - tail.algebraic, x);
    }
    case TailModel::Kind::Power: {
      if (tail.algebraic <= dim)
        throw Error(ErrorCode::Divergent, "power tail r^-" + std::to_string(tail.algebraic) +
                                              " is not integrable in dimension " + std::to_string(dim));
      return sphere_area(dim) * value * std::pow(r_max, dim) / (tail.algebraic - dim);
    }
  }
  return 0.0;
}

}  // namespace qsg
