#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "qsg/error.hpp"
#include "qsg/grid.hpp"
#include "qsg/params.hpp"
#include "qsg/quadrature.hpp"

using namespace qsg;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("rational parsing is exact") {
  CHECK(parse_rational("7/3") == Rational(7, 3));
  CHECK(parse_rational("5/1") == Rational(5, 1));
  CHECK(parse_rational("10/2") == Rational(5, 1));
  CHECK(parse_rational("3") == Rational(3, 1));
  CHECK_FALSE(parse_rational("2.5").has_value());
  CHECK_FALSE(parse_rational("1/0").has_value());
  CHECK_FALSE(parse_rational("a/3").has_value());
  CHECK(to_string(Rational(14, 6)) == "7/3");
}

TEST_CASE("regime classification") {
  CHECK(classify(Params::make(3, 5.0, 1.0, 1.0)).sobolev == SobolevRegime::Critical);
  CHECK(classify(Params::make(3, Rational(5, 1), 1.0, 1.0)).sobolev == SobolevRegime::Critical);
  CHECK(classify(Params::make(5, Rational(7, 3), 1.0, 1.0)).sobolev == SobolevRegime::Critical);
  CHECK(classify(Params::make(2, 7.0, 1.0, 1.0)).sobolev == SobolevRegime::Subcritical);
  CHECK(classify(Params::make(3, 2.0, 1.0, 1.0)).sobolev == SobolevRegime::Subcritical);
  CHECK(classify(Params::make(3, 7.0, 1.0, 1.0)).sobolev == SobolevRegime::Supercritical);
  CHECK(classify(Params::make(5, 3.0, 1.0, 1.0)).sobolev == SobolevRegime::Supercritical);

  SUBCASE("mass threshold 1 + 4/N") {
    CHECK(classify(Params::make(3, 2.0, 1.0, 1.0)).mass == MassRegime::MassSubcritical);
    CHECK(classify(Params::make(3, Rational(7, 3), 1.0, 1.0)).mass == MassRegime::MassCriticalPlus);
    CHECK(classify(Params::make(2, 3.0, 1.0, 1.0)).mass == MassRegime::MassCriticalPlus);
  }
  SUBCASE("thresholds") {
    const Regime r = classify(Params::make(3, 2.0, 1.0, 1.0));
    CHECK(*r.sobolev_threshold == Rational(5, 1));
    CHECK(*r.existence_bound == Rational(11, 1));
    CHECK(r.mass_threshold == Rational(7, 3));
    CHECK_FALSE(classify(Params::make(2, 3.0, 1.0, 1.0)).existence_bound.has_value());
  }
}

TEST_CASE("parameter validation") {
  CHECK(code_of([] { Params::make(3, 11.0, 1.0, 1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { Params::make(3, Rational(11, 1), 1.0, 1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { Params::make(5, Rational(17, 3), 1.0, 1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { Params::make(1, 3.0, 1.0, 1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { Params::make(3, 1.0, 1.0, 1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { Params::make(3, 3.0, -0.1, 1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { Params::make(3, 3.0, 1.0, -1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { Params::make(3, NAN, 1.0, 1.0); }) == ErrorCode::InvalidParams);
  CHECK_NOTHROW(Params::make(3, 10.999, 1.0, 1.0));
  CHECK_NOTHROW(Params::make(2, 50.0, 1.0, 0.0));

  try {
    Params::make(3, 11.0, 1.0, 1.0);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("existence bound") != std::string::npos);
  }
}

TEST_CASE("grid radius and layout") {
  const Grid g1 = make_grid(Params::make(3, 3.0, 1.0, 1.0), 1024);
  CHECK(g1.r_max() == doctest::Approx(50.0));
  CHECK(g1.intervals() == 1024);
  CHECK(g1.nodes(0) == 0.0);

  const Grid g2 = make_grid(Params::make(3, 3.0, 1.0, 0.01), 1024);
  CHECK(g2.r_max() == doctest::Approx(150.0));

  const Grid g0 = make_grid(Params::make(3, 7.0, 1.0, 0.0), 1024);
  CHECK(g0.r_max() == doctest::Approx(1000.0));
  CHECK(g0.spacing == Spacing::GeometricTail);
  CHECK(g0.tail_ratio > 1.0);

  for (const Grid* g : {&g1, &g2, &g0})
    for (Eigen::Index i = 1; i < g->size(); ++i) REQUIRE(g->nodes(i) > g->nodes(i - 1));

  CHECK(make_grid_radius(50.0, 1001).intervals() == 1002);
  CHECK(code_of([] { make_grid_radius(50.0, 32); }) == ErrorCode::InvalidParams);
  CHECK(g0.locate(-1.0) == 0);
  CHECK(g0.locate(5000.0) == g0.intervals() - 1);
}

TEST_CASE("radial quadrature") {
  SUBCASE("zero integrand") {
    const Grid g = make_grid_radius(30.0, 512);
    CHECK(integrate_radial(Eigen::VectorXd::Zero(g.size()).eval(), g, 3) == 0.0);
  }
  SUBCASE("Gaussian in three dimensions") {
    const Grid g = make_grid_radius(12.0, 2048);
    const Eigen::VectorXd f = (-g.nodes.array().square()).exp().matrix();
    CHECK(integrate_radial(f, g, 3) == doctest::Approx(std::pow(std::numbers::pi, 1.5)).epsilon(1e-12));
  }
  SUBCASE("Gaussian on a geometric tail grid") {
    const Grid g = make_grid_radius(200.0, 4096, 6.0);
    REQUIRE(g.spacing == Spacing::GeometricTail);
    const Eigen::VectorXd f = (-g.nodes.array().square()).exp().matrix();
    CHECK(integrate_radial(f, g, 2) == doctest::Approx(std::numbers::pi).epsilon(1e-10));
  }
  SUBCASE("Simpson order") {
    // e^{-r} cos r over R^3 integrates to -2π; the truncation beyond r = 40 is below 1e-13.
    double prev_err = 0.0;
    for (int n : {64, 128, 256, 512}) {
      const Grid g = make_grid_radius(40.0, n, 40.0);
      const Eigen::VectorXd f = ((-g.nodes.array()).exp() * g.nodes.array().cos()).matrix();
      const double err = std::abs(integrate_radial(f, g, 3) + 2.0 * std::numbers::pi);
      if (prev_err > 0) CHECK(prev_err / err >= 16.0);
      prev_err = err;
    }
  }
  SUBCASE("exponential tail closes the truncated integral") {
    // e^{-r} on N = 3: the model r^{-a} e^{-κ r} with a = 0 is exact.
    const Grid g = make_grid_radius(10.0, 2048);
    const Eigen::VectorXd f = (-g.nodes.array()).exp().matrix();
    const double with_tail = integrate_radial(f, g, 3, TailModel::exponential(0.0, 1.0));
    CHECK(with_tail == doctest::Approx(8.0 * std::numbers::pi).epsilon(1e-10));
  }
  SUBCASE("power tails") {
    const Grid g = make_grid_radius(50.0, 2048);
    // (1+r^2)^{-3} on N = 3 integrates to π²/4; the tail is ~ r^{-6}.
    const Eigen::VectorXd f = (1.0 + g.nodes.array().square()).pow(-3.0).matrix();
    CHECK(integrate_radial(f, g, 3, TailModel::power(6.0)) ==
          doctest::Approx(std::numbers::pi * std::numbers::pi / 4.0).epsilon(1e-7));
    CHECK(code_of([&] { integrate_radial(f, g, 6, TailModel::power(6.0)); }) == ErrorCode::Divergent);
    CHECK(code_of([&] { integrate_radial(f, g, 7, TailModel::power(6.0)); }) == ErrorCode::Divergent);
  }
}

TEST_CASE("sphere area") {
  CHECK(sphere_area(2) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * std::numbers::pi));
  CHECK(sphere_area(4) == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
}

TEST_CASE("profile CSV round trip") {
  auto g = std::make_shared<Grid>(make_grid_radius(20.0, 128));
  Profile p;
  p.grid = g;
  p.values = (-g->nodes.array().square()).exp().matrix();
  p.derivative_values = (-2.0 * g->nodes.array() * p.values.array()).matrix();
  std::stringstream ss;
  write_profile_csv(ss, p);
  const Profile q = read_profile_csv(ss);
  CHECK(q.values == p.values);
  CHECK(q.derivative_values == p.derivative_values);
  CHECK(q.grid->nodes == g->nodes);
  CHECK(q(1.2345) == doctest::Approx(p(1.2345)).epsilon(1e-14));

  std::stringstream bad("x,y\n1,2\n");
  CHECK(code_of([&] { read_profile_csv(bad); }) == ErrorCode::Io);
}

TEST_CASE("Hermite evaluation") {
  auto g = std::make_shared<Grid>(make_grid_radius(20.0, 2048));
  Profile p;
  p.grid = g;
  p.values = (-g->nodes.array().square()).exp().matrix();
  p.derivative_values = (-2.0 * g->nodes.array() * p.values.array()).matrix();
  for (double x : {0.0, 0.013, 0.77, 1.5, 3.3}) {
    const auto [v, dv] = p.eval(x);
    CHECK(v == doctest::Approx(std::exp(-x * x)).epsilon(1e-9));
    CHECK(dv == doctest::Approx(-2.0 * x * std::exp(-x * x)).epsilon(1e-6).scale(1.0));
  }
  CHECK(is_positive_nonincreasing(p));
}
