#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qsg/asymptotics.hpp"
#include "qsg/identities.hpp"
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

std::vector<double> ladder(int count, double ratio = 0.5) {
  std::vector<double> om;
  for (int k = 0; k < count; ++k) om.push_back(std::pow(ratio, k));
  return om;
}

}  // namespace

TEST_CASE("Aubin-Talenti bubble") {
  for (int n : {3, 4, 5}) {
    CAPTURE(n);
    const AubinTalenti at = AubinTalenti::make(n);
    CHECK(at.U(0.0) == 1.0);
    CHECK(at.m_star == doctest::Approx(m_star(n)));
    const Grid g = make_grid_radius(400.0, 8192, 20.0);
    CHECK(at.equation_residual(g) < 1e-10);
    CHECK(at.w_critical_norm(g) == doctest::Approx(1.0).epsilon(1e-6));

    // ∫|∇U|² by quadrature with its r^{2−2N} tail.
    Eigen::VectorXd grad2(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) grad2(i) = std::pow(at.dU(g.nodes(i)), 2);
    CHECK(integrate_radial(grad2, g, n, TailModel::power(2.0 * n - 2.0)) ==
          doctest::Approx(at.dirichlet()).epsilon(1e-6));

    const auto grid = std::make_shared<const Grid>(g);
    const Profile u = at.profile(grid);
    const Params prm = Params::make(n, Rational(n + 2, n - 2), 1.0, 0.0);
    CHECK(extract_lambda(u, prm) == doctest::Approx(1.0));
    CHECK(critical_profile_distance(u, prm) < 1e-8);
  }
}

TEST_CASE("lambda from the peak height") {
  auto g = std::make_shared<const Grid>(make_grid_radius(20.0, 128));
  Profile u;
  u.grid = g;
  u.values = Eigen::VectorXd::Constant(g->size(), 8.0);
  u.derivative_values = Eigen::VectorXd::Zero(g->size());
  CHECK(extract_lambda(u, Params::make(3, 5.0, 1.0, 0.1)) == doctest::Approx(1.0 / 64.0));
  CHECK(extract_lambda(u, Params::make(4, 3.0, 1.0, 0.1)) == doctest::Approx(1.0 / 8.0));
  CHECK(code_of([&] { extract_lambda(u, Params::make(2, 3.0, 1.0, 0.1)); }) == ErrorCode::RegimeMismatch);
}

TEST_CASE("power-law fits") {
  const std::vector<double> om = ladder(12);
  std::vector<double> pure;
  for (double w : om) pure.push_back(3.0 * std::pow(w, -0.75));
  const FitResult f = fit_power(om, pure);
  CHECK(f.exponent == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.points == 12);
  CHECK(f.omega_max == 1.0);
  CHECK(f.omega_min == om.back());

  // Drop ω = 1, where log 1/ω vanishes, and fit with the log factor.
  std::vector<double> om2(om.begin() + 1, om.end()), y2;
  for (double w : om2) y2.push_back(2.0 * std::pow(w, -0.5) * std::sqrt(std::log(1.0 / w)));
  const FitResult g = fit_power(om2, y2, 0.5);
  CHECK(g.model == FitModel::PowerLog);
  CHECK(g.exponent == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g.prefactor == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit_stability(om2, y2, 0.5) < 1e-10);

  CHECK(code_of([] { fit_power({1.0, 0.5}, {1.0, 2.0}); }) == ErrorCode::InsufficientWindow);
  CHECK(code_of([] { fit_power({1.0, 0.5, 0.25}, {1.0, -2.0, 3.0}); }) == ErrorCode::InsufficientWindow);
}

TEST_CASE("AICc model selection") {
  CHECK(aicc(2.0, 10, 2) == doctest::Approx(10.0 * std::log(0.2) + 4.0 + 12.0 / 7.0));

  const std::vector<double> all = ladder(16);
  std::vector<double> om(all.begin() + 1, all.end()), pure, logged;
  for (std::size_t k = 0; k < om.size(); ++k) {
    const double wiggle = 1.0 + 1e-6 * ((k % 3) - 1.0);
    pure.push_back(std::pow(om[k], -0.5) * wiggle);
    logged.push_back(std::pow(om[k], -0.5) * std::sqrt(std::log(1.0 / om[k])) * wiggle);
  }
  const ModelChoice a = select_model(om, logged, 0.5);
  CHECK(a.log_preferred);
  CHECK(a.chosen().exponent == doctest::Approx(-0.5).epsilon(1e-5));
  const ModelChoice b = select_model(om, pure, 0.5);
  CHECK_FALSE(b.log_preferred);
  CHECK(b.chosen().exponent == doctest::Approx(-0.5).epsilon(1e-5));
}

TEST_CASE("Aitken extrapolation") {
  std::vector<double> xs;
  for (int k = 0; k < 10; ++k) xs.push_back(2.0 + 0.5 * std::pow(0.3, k));
  CHECK(aitken_limit(xs) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(aitken_limit({1.0, 2.0, 4.0}) == 4.0);
  CHECK(aitken_limit({5.0}) == 5.0);
  CHECK(code_of([] { aitken_limit({}); }) == ErrorCode::InsufficientWindow);
}

TEST_CASE("branch derivative") {
  const std::vector<double> om = ladder(13);
  std::vector<double> y, z;
  for (double w : om) {
    y.push_back(std::pow(w, -0.5));
    z.push_back(w - 0.05);
  }
  for (std::size_t i = 1; i + 1 < om.size(); ++i) {
    CAPTURE(i);
    for (int width : {3, 5, 9})
      CHECK(branch_derivative(om, y, i, width) == doctest::Approx(-0.5 * std::pow(om[i], -1.5)).epsilon(1e-8));
    // A sign change on the stencil: plain differences of a smooth function of log ω.
    CHECK(branch_derivative(om, z, i, 9) == doctest::Approx(1.0).epsilon(2e-2));
  }
  CHECK(code_of([&] { branch_derivative(om, y, 0); }) == ErrorCode::InsufficientNeighbors);
  CHECK(code_of([&] { branch_derivative(om, y, om.size() - 1); }) == ErrorCode::InsufficientNeighbors);
}

TEST_CASE("subcritical expansion") {
  CHECK(subcritical_correction_coefficient(3, 2.0, 1.0, 1.0) == doctest::Approx(7.0 / 4.0));
  CHECK(subcritical_correction_coefficient(3, 2.0, 0.0, 5.0) == 0.0);
  CHECK(subcritical_leading_exponent(3, 2.0) == doctest::Approx(0.5));
  CHECK(subcritical_correction_exponent(3, 2.0) == doctest::Approx(2.5));
  CHECK(subcritical_leading_exponent(2, 3.0) == doctest::Approx(0.0));

  const std::vector<double> om = {0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9, 0x1p-10};
  const SubcriticalReport rep = subcritical_expansion_check(Params::make(3, 2.0, 1.0, 1.0), om);
  CHECK(rep.coefficient == doctest::Approx(1.75 * rep.grad_q2));
  CHECK(rep.relative_error < 0.05);
  CHECK(rep.profile_monotone);
  CHECK(rep.ratios.size() == om.size());

  // Without the quasilinear term, M(ω) = ω^a ‖Q‖² exactly.
  const SubcriticalReport nls = subcritical_expansion_check(Params::make(3, 2.0, 0.0, 1.0), om);
  CHECK(nls.coefficient == 0.0);
  for (double r : nls.ratios) CHECK(std::abs(r) < 1e-6 * nls.q_mass);

  CHECK(code_of([&] { subcritical_expansion_check(Params::make(3, 5.0, 1.0, 1.0), om); }) ==
        ErrorCode::RegimeMismatch);
}

TEST_CASE("mass-critical slope: M'/ω^{N/2-1} -> N(N+2)/8 δ ||grad Q^2||^2") {
  for (int n : {1, 2, 3}) {
    const double p = 1.0 + 4.0 / n;
    CAPTURE(n);
    CHECK(subcritical_leading_exponent(n, p) == doctest::Approx(0.0));
    CHECK(subcritical_correction_exponent(n, p) == doctest::Approx(n / 2.0));
    CHECK(subcritical_correction_coefficient(n, p, 1.0, 1.0) * n / 2.0 == doctest::Approx(n * (n + 2) / 8.0));
  }
  // N = 2: M = ||Q||^2 + δ ||grad Q^2||^2 ω + O(ω^2), so M' -> δ ||grad Q^2||^2.
  const std::vector<double> om = {0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9};
  const SubcriticalReport rep = subcritical_expansion_check(Params::make(2, 3.0, 0.5, 1.0), om);
  CHECK(rep.coefficient == doctest::Approx(0.5 * rep.grad_q2));
  CHECK(rep.relative_error < 0.01);
}

TEST_CASE("critical and supercritical entry points reject other regimes") {
  const std::vector<MassCurvePoint> empty;
  CHECK(code_of([&] { critical_scaling_report(empty, Params::make(3, 3.0, 1.0, 1.0)); }) ==
        ErrorCode::RegimeMismatch);
  CHECK(critical_mass_exponent(3) == -0.75);
  CHECK(critical_lambda_exponent(3) == -0.25);
  CHECK(critical_delta_exponent(3) == 0.25);
  CHECK(critical_mass_exponent(5) == doctest::Approx(-0.4));
  CHECK(critical_lambda_exponent(5) == doctest::Approx(-0.2));
  CHECK(critical_delta_exponent(5) == doctest::Approx(0.6));
}

TEST_CASE("energy limit on a synthetic branch") {
  // E = E∞ + cω and M = M₀ − 2c log ω satisfy E' = −(ω/2) M'.
  const double c = 0.1;
  std::vector<MassCurvePoint> branch;
  for (double w : ladder(16)) {
    MassCurvePoint pt;
    pt.omega = w;
    pt.mass = 5.0 - 2.0 * c * std::log(w);
    branch.push_back(pt);
  }
  auto fill = [&](double limit) {
    for (auto& pt : branch) pt.energy = limit + c * pt.omega;
  };

  fill(0.5);
  const EnergyReport sup = energy_limit_check(branch, Params::make(5, 3.0, 1.0, 1.0), 2.0);
  // 2/((3N+2) − p(N−2)) = 1/4 at N = 5, p = 3, times ‖∇u₀‖² = 2.
  CHECK(sup.target == doctest::Approx(0.5));
  CHECK(sup.extrapolated == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sup.max_derivative_mismatch < 1e-3);
  CHECK(code_of([&] { energy_limit_check(branch, Params::make(5, 3.0, 1.0, 1.0)); }) == ErrorCode::InvalidParams);

  const double crit = std::pow(m_star(3), 1.5) / 3.0;
  fill(crit);
  const EnergyReport cr = energy_limit_check(branch, Params::make(3, 5.0, 1.0, 1.0));
  CHECK(cr.target == doctest::Approx(crit));
  CHECK(cr.relative_error < 1e-12);
  CHECK(cr.sign_near_zero == 1);

  fill(0.0);
  const EnergyReport sub = energy_limit_check(branch, Params::make(3, 2.0, 1.0, 1.0));
  CHECK(sub.target == 0.0);
  CHECK(sub.relative_error < 1e-10);
}
