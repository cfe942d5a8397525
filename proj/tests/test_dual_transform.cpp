#include <cmath>
#include <random>

#include "doctest.h"
#include "qsg/dual_transform.hpp"

using namespace qsg;

namespace {

// Independent oracle: h(t) = ∫_0^t sqrt(1 + 2δτ²) dτ by composite Simpson in long double.
long double h_by_quadrature(long double t, long double delta, int n = 200000) {
  const long double step = t / n;
  long double sum = 0;
  for (int i = 0; i <= n; ++i) {
    const long double x = step * i;
    const long double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    sum += w * std::sqrt(1 + 2 * delta * x * x);
  }
  return sum * step / 3;
}

constexpr double kFrozenH1 = 1.14779357469631904;  // h(1) at δ = 1/2, 30-digit reference

}  // namespace

TEST_CASE("h oracle agrees with the frozen reference") {
  CHECK(static_cast<double>(h_by_quadrature(1.0L, 0.5L)) == doctest::Approx(kFrozenH1).epsilon(1e-15));
}

TEST_CASE("h closed form") {
  const TransformContext<double> ctx(0.5);
  CHECK(h(0.0, ctx) == 0.0);
  CHECK(h(1.0, ctx) == doctest::Approx(kFrozenH1).epsilon(1e-15));
  CHECK(h(-1.0, ctx) == doctest::Approx(-kFrozenH1).epsilon(1e-15));
  CHECK(h(1e6, ctx) / 1e12 == doctest::Approx(std::sqrt(0.5 / 2.0)).epsilon(1e-9));
  for (double t : {0.1, 0.7, 2.0, 9.0})
    CHECK(h(t, ctx) == doctest::Approx(static_cast<double>(h_by_quadrature(t, 0.5L, 20000))).epsilon(1e-13));

  const TransformContext<double> zero(0.0);
  CHECK(h(3.5, zero) == 3.5);
}

TEST_CASE("r inverts h") {
  CHECK(r(0.0, TransformContext<double>(1.0)) == 0.0);
  CHECK(r(h(1.0, TransformContext<double>(0.5)), TransformContext<double>(0.5)) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(20241015);
  std::uniform_real_distribution<double> log_t(-8.0, 8.0), log_delta(-4.0, 3.0);
  for (int k = 0; k < 2000; ++k) {
    const TransformContext<double> ctx(std::pow(10.0, log_delta(rng)));
    const double t = std::pow(10.0, log_t(rng));
    const double s = h(t, ctx);
    const double back = r(s, ctx);
    REQUIRE(std::abs(back - t) <= 1e-13 * t);
    REQUIRE(r(-s, ctx) == -back);
    // Sandwich: r(s) ≤ s and r(s) ≤ (2/δ)^{1/4} √s.
    REQUIRE(back <= s * (1 + 1e-15));
    REQUIRE(back <= std::pow(2.0 / ctx.coupling, 0.25) * std::sqrt(s) * (1 + 1e-15));
  }
}

TEST_CASE("r is strictly increasing") {
  const TransformContext<double> ctx(2.0);
  double prev = -1.0;
  for (double s = 0.0; s < 50.0; s += 0.01) {
    const double v = r(s, ctx);
    REQUIRE(v > prev);
    prev = v;
  }
}

TEST_CASE("r growth") {
  const TransformContext<double> ctx(0.5);
  CHECK(r(1e6, ctx) / std::sqrt(1e6) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  CHECK(r(1e-8, ctx) / 1e-8 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("derivatives of r") {
  const TransformContext<double> ctx(0.75);
  CHECK(r_prime(0.0, ctx) == 1.0);
  CHECK(r_second(0.0, ctx) == 0.0);
  for (double s : {0.05, 0.6, 2.0, 11.0}) {
    const double e = 1e-5 * std::max(1.0, s);
    const double fd1 = (r(s + e, ctx) - r(s - e, ctx)) / (2 * e);
    const double fd2 = (r_prime(s + e, ctx) - r_prime(s - e, ctx)) / (2 * e);
    CHECK(r_prime(s, ctx) == doctest::Approx(fd1).epsilon(1e-8));
    CHECK(r_second(s, ctx) == doctest::Approx(fd2).epsilon(1e-6));
    CHECK(r_prime(s, ctx) * h_prime(r(s, ctx), ctx) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("dual nonlinearity") {
  const DualNonlinearity<double> nl(TransformContext<double>(1.0), 0.3, 3.0);
  CHECK(nl.f(0.0) == 0.0);
  CHECK(nl.F(0.0) == 0.0);

  SUBCASE("F' = f and f' by differences") {
    for (double s : {0.01, 0.2, 0.9, 1.7, 4.0}) {
      const double e = 1e-5;
      CHECK((nl.F(s + e) - nl.F(s - e)) / (2 * e) == doctest::Approx(nl.f(s)).epsilon(1e-7).scale(1e-6));
      CHECK((nl.f(s + e) - nl.f(s - e)) / (2 * e) == doctest::Approx(nl.f_prime(s)).epsilon(1e-7).scale(1e-6));
    }
  }
  SUBCASE("small s behaves like s^p - ωs") {
    for (double s : {1e-2, 1e-3, 1e-4}) {
      const double expected = std::pow(s, 3.0) - 0.3 * s;
      CHECK(std::abs(nl.f(s) - expected) / (std::pow(s, 3.0) + s) < 10 * s * s);
    }
  }
  SUBCASE("zeros") {
    CHECK(std::abs(nl.F(nl.zero_of_F())) < 1e-14);
    CHECK(std::abs(nl.f(nl.zero_of_f())) < 1e-14);
    CHECK(nl.zero_of_F() > nl.zero_of_f());
    CHECK(DualNonlinearity<double>(TransformContext<double>(1.0), 0.0, 3.0).zero_of_F() == 0.0);
  }
  SUBCASE("δ = 0 is the NLS nonlinearity") {
    const DualNonlinearity<double> nls(TransformContext<double>(0.0), 1.0, 3.0);
    CHECK(nls.f(1.3) == doctest::Approx(1.3 * 1.3 * 1.3 - 1.3));
    CHECK(nls.f_prime(1.3) == doctest::Approx(3 * 1.3 * 1.3 - 1.0));
  }
}

TEST_CASE("long double instantiation") {
  const TransformContext<long double> ctx(0.5L, 1e-18L);
  const long double t = 1.25L;
  CHECK(static_cast<double>(std::abs(r(h(t, ctx), ctx) - t)) < 1e-17);
  CHECK(static_cast<double>(h(1.0L, ctx)) == doctest::Approx(kFrozenH1).epsilon(1e-16));
}

TEST_CASE("context validation") {
  CHECK_THROWS_AS(TransformContext<double>(-1.0), Error);
  CHECK_THROWS_AS(TransformContext<double>(1.0, 1e-3), Error);
  CHECK_THROWS_AS(TransformContext<double>(1.0, 0.0), Error);
}
