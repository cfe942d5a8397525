#pragma once

#include <cmath>
#include <limits>

#include "qsg/error.hpp"
#include "qsg/grid.hpp"

namespace qsg {

/// Coupling δ together with the Newton controls used to invert h.
/// δ = 0 is accepted and makes r the identity (pure NLS).
template <typename Scalar = double>
struct TransformContext {
  Scalar coupling = 1;
  Scalar tolerance = Scalar(1e-14);
  int max_iterations = 60;

  TransformContext() = default;
  explicit TransformContext(Scalar delta, Scalar tol = Scalar(1e-14), int max_iter = 60)
      : coupling(delta), tolerance(tol), max_iterations(max_iter) {
    if (!(delta >= 0)) throw Error(ErrorCode::InvalidParams, "coupling must be nonnegative");
    if (!(tol > 0) || tol > Scalar(1e-8))
      throw Error(ErrorCode::InvalidParams, "Newton tolerance must lie in (0, 1e-8]");
  }
};

/// h(t) = (asinh(x) + x sqrt(1+x^2)) / (2 sqrt(2δ)),  x = sqrt(2δ) t.  Odd in t.
template <typename Scalar>
Scalar h(Scalar t, const TransformContext<Scalar>& ctx) {
  using std::asinh, std::sqrt;
  if (ctx.coupling == 0) return t;
  const Scalar c = sqrt(2 * ctx.coupling);
  const Scalar x = c * t;
  return (asinh(x) + x * sqrt(1 + x * x)) / (2 * c);
}

/// h'(t) = sqrt(1 + 2δt²).
template <typename Scalar>
Scalar h_prime(Scalar t, const TransformContext<Scalar>& ctx) {
  using std::sqrt;
  return sqrt(1 + 2 * ctx.coupling * t * t);
}

/// Inverse of h, extended as an odd function.
template <typename Scalar>
Scalar r(Scalar s, const TransformContext<Scalar>& ctx) {
  using std::abs, std::min, std::pow, std::sqrt;
  if (s < 0) return -r(-s, ctx);
  if (s == 0 || ctx.coupling == 0) return s;
  // h is convex on [0, ∞) and both s and (2/δ)^{1/4} sqrt(s) bound r(s) from above,
  // so Newton started there decreases monotonically; bisection guards round-off.
  Scalar hi = min(s, pow(2 / ctx.coupling, Scalar(0.25)) * sqrt(s));
  Scalar lo = 0;
  Scalar t = hi;
  for (int it = 0; it < ctx.max_iterations; ++it) {
    const Scalar g = h(t, ctx) - s;
    if (g > 0) hi = t;
    else lo = t;
    Scalar next = t - g / h_prime(t, ctx);
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    const Scalar step = abs(next - t);
    t = next;
    if (step <= ctx.tolerance * t || hi - lo <= ctx.tolerance * t) return t;
  }
  throw Error(ErrorCode::NoConvergence, "Newton iteration for r(s) did not converge");
}

/// r'(s) = 1/sqrt(1 + 2δ r²) given r = r(s).
template <typename Scalar>
Scalar r_prime_from(Scalar rv, const TransformContext<Scalar>& ctx) {
  using std::sqrt;
  return 1 / sqrt(1 + 2 * ctx.coupling * rv * rv);
}

template <typename Scalar>
Scalar r_prime(Scalar s, const TransformContext<Scalar>& ctx) {
  return r_prime_from(r(s, ctx), ctx);
}

/// r''(s) = −2δ r (r')⁴.
template <typename Scalar>
Scalar r_second(Scalar s, const TransformContext<Scalar>& ctx) {
  const Scalar rv = r(s, ctx);
  const Scalar rp = r_prime_from(rv, ctx);
  return -2 * ctx.coupling * rv * rp * rp * rp * rp;
}

/// Everything the dual nonlinearity needs at one point s.
template <typename Scalar>
struct DualPoint {
  Scalar r;    // r(s)
  Scalar rp;   // r'(s)
  Scalar rpp;  // r''(s)
  Scalar f;    // f_ω(s)
  Scalar fp;   // f_ω'(s)
  Scalar F;    // F_ω(s)
};

/// f_ω(s) = r'(s) P_ω(r(s)),  P_ω(τ) = |τ|^{p−1}τ − ωτ,  F_ω' = f_ω.
template <typename Scalar = double>
struct DualNonlinearity {
  TransformContext<Scalar> ctx;
  Scalar omega = 1;
  Scalar p = 3;

  DualNonlinearity() = default;
  DualNonlinearity(const TransformContext<Scalar>& c, Scalar w, Scalar exponent)
      : ctx(c), omega(w), p(exponent) {}
  explicit DualNonlinearity(const Params& params)
      : ctx(Scalar(params.coupling)), omega(Scalar(params.freq)), p(Scalar(params.exponent)) {}

  Scalar P(Scalar tau) const {
    using std::abs, std::pow;
    return pow(abs(tau), p - 1) * tau - omega * tau;
  }
  Scalar P_prime(Scalar tau) const {
    using std::abs, std::pow;
    return p * pow(abs(tau), p - 1) - omega;
  }

  DualPoint<Scalar> at_r(Scalar rv) const {
    using std::abs, std::pow;
    DualPoint<Scalar> d;
    d.r = rv;
    d.rp = r_prime_from(rv, ctx);
    const Scalar rp2 = d.rp * d.rp;
    d.rpp = -2 * ctx.coupling * rv * rp2 * rp2;
    const Scalar a = pow(abs(rv), p - 1);
    const Scalar Pv = a * rv - omega * rv;
    d.f = d.rp * Pv;
    d.fp = d.rpp * Pv + rp2 * (p * a - omega);
    d.F = a * rv * rv / (p + 1) - omega / 2 * rv * rv;
    return d;
  }
  DualPoint<Scalar> at(Scalar s) const { return at_r(r(s, ctx)); }

  Scalar f(Scalar s) const { return at(s).f; }
  Scalar F(Scalar s) const { return at(s).F; }
  Scalar f_prime(Scalar s) const { return at(s).fp; }

  /// Zero s* > 0 of F_ω: r(s*)^{p−1} = (p+1)ω/2. Zero when ω = 0.
  Scalar zero_of_F() const {
    using std::pow;
    if (omega == 0) return 0;
    return h(pow((p + 1) * omega / 2, 1 / (p - 1)), ctx);
  }
  /// Positive zero of f_ω: r^{p−1} = ω.
  Scalar zero_of_f() const {
    using std::pow;
    if (omega == 0) return 0;
    return h(pow(omega, 1 / (p - 1)), ctx);
  }
};

/// Applies r elementwise; used once per profile so integrands never re-run Newton.
template <typename Scalar>
Vector<Scalar> apply_r(const Vector<Scalar>& s, const TransformContext<Scalar>& ctx) {
  Vector<Scalar> out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) out(i) = r(s(i), ctx);
  return out;
}

}  // namespace qsg
