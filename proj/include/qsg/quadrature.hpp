#pragma once

#include <cmath>
#include <numbers>

#include "qsg/error.hpp"
#include "qsg/grid.hpp"

namespace qsg {

/// |S^{N−1}| = 2 π^{N/2} / Γ(N/2).
inline double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

/// e^x x^{−b} Γ(b, x) for x > 0 and any real b.
double scaled_upper_gamma(double b, double x);

/// Shape of an integrand beyond R_max:  g(r) ≈ g(R) (r/R)^{−algebraic} e^{−rate (r−R)}.
struct TailModel {
  enum class Kind { None, Exponential, Power } kind = Kind::None;
  double algebraic = 0.0;
  double rate = 0.0;

  static TailModel none() { return {}; }
  static TailModel exponential(double algebraic, double rate) {
    return {Kind::Exponential, algebraic, rate};
  }
  static TailModel power(double algebraic) { return {Kind::Power, algebraic, 0.0}; }

  /// Tail of a product of `power` copies of a profile with the given decay.
  static TailModel of(const Decay& d, double power) {
    switch (d.kind) {
      case DecayKind::Exponential: return exponential(power * d.algebraic_exponent(), power * d.rate);
      case DecayKind::Power: return TailModel::power(power * d.rate);
      case DecayKind::None: break;
    }
    return none();
  }
  /// Same for a product containing `dpower` copies of the derivative; a power tail loses one
  /// extra order per derivative, an exponential tail keeps its shape.
  static TailModel of(const Decay& d, double power, double dpower) {
    TailModel t = of(d, power + dpower);
    if (t.kind == Kind::Power) t.algebraic += dpower;
    return t;
  }
};

/// ∫_R^∞ |S^{N−1}| r^{N−1} g(r) dr for the model anchored at g(R) = value.
/// Throws Divergent for power tails with algebraic ≤ N.
double tail_integral(double value, double r_max, int dim, const TailModel& tail);

/// Composite Simpson weights on pairs of (possibly unequal) intervals: ∫ g dr ≈ Σ w_i g_i.
template <typename Scalar>
Vector<Scalar> simpson_weights(const RadialGrid<Scalar>& grid) {
  const Eigen::Index n = grid.size();
  Vector<Scalar> w = Vector<Scalar>::Zero(n);
  const auto& x = grid.nodes;
  Eigen::Index i = 0;
  for (; i + 2 < n; i += 2) {
    const Scalar h0 = x(i + 1) - x(i), h1 = x(i + 2) - x(i + 1), s = h0 + h1;
    w(i) += s / 6 * (2 - h1 / h0);
    w(i + 1) += s * s * s / (6 * h0 * h1);
    w(i + 2) += s / 6 * (2 - h0 / h1);
  }
  if (i + 1 < n) {  // odd interval count: trapezoid on the last one
    const Scalar h0 = x(i + 1) - x(i);
    w(i) += h0 / 2;
    w(i + 1) += h0 / 2;
  }
  return w;
}

/// Radial measure weights |S^{N−1}| r_i^{N−1} w_i.
template <typename Scalar>
Vector<Scalar> radial_weights(const RadialGrid<Scalar>& grid, int dim) {
  Vector<Scalar> w = simpson_weights(grid);
  const Scalar area = Scalar(sphere_area(dim));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    using std::pow;
    w(i) *= area * pow(grid.nodes(i), Scalar(dim - 1));
  }
  return w;
}

/// ∫_{R^N} g(|x|) dx from node values, plus the closed-form tail beyond R_max.
template <typename Scalar>
Scalar integrate_radial(const Vector<Scalar>& values, const RadialGrid<Scalar>& grid, int dim,
                        const TailModel& tail = TailModel::none()) {
  if (values.size() != grid.size())
    throw Error(ErrorCode::InvalidParams, "integrand size does not match grid");
  const Scalar core = radial_weights(grid, dim).dot(values);
  return core + Scalar(tail_integral(double(values(values.size() - 1)), double(grid.r_max()), dim, tail));
}

}  // namespace qsg
