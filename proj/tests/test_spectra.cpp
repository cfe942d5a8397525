#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "qsg/dual_transform.hpp"
#include "qsg/spectra.hpp"

using namespace qsg;

TEST_CASE("L+ has exactly one negative eigenvalue") {
  const SolveReport sol = solve_ground_state(Params::make(3, 3.0, 1.0, 1.0));
  const DiscreteOperator lp = assemble(sol, OperatorKind::LPlus, 0);
  CHECK(negative_count(lp) == 1);
  const Eigen::VectorXd low = low_spectrum(lp, 3);
  CHECK(low(0) < 0);
  CHECK(low(1) > 0);
  // The next radial level sits at the box-discretized continuum edge ω + O((π/R)²).
  const double box = std::pow(std::numbers::pi / sol.u.grid->r_max(), 2);
  CHECK(low(1) >= sol.params.freq);
  CHECK(low(1) <= sol.params.freq + 2.0 * box);

  const SpectralReport rep = spectral_report(sol);
  CHECK(rep.negative_count_lplus == 1);
}

TEST_CASE("kernels of L- and L+") {
  const SolveReport sol = solve_ground_state(Params::make(3, 3.0, 1.0, 1.0));
  const SpectralReport rep = spectral_report(sol);

  const DiscreteOperator lm = assemble(sol, OperatorKind::LMinus, 0);
  const double lowest = low_spectrum(lm, 1)(0);
  CHECK(std::abs(lowest) < 1e-6 * rep.potential_sup);
  const Eigen::VectorXd phi = eigenvector(lm, lowest);
  CHECK(cosine(lm, phi, lm.restrict(sol.u.values)) > 0.9999);

  const DiscreteOperator lp1 = assemble(sol, OperatorKind::LPlus, 1);
  const double zero1 = low_spectrum(lp1, 1)(0);
  CHECK(std::abs(zero1) < 1e-5 * rep.potential_sup);
  CHECK(cosine(lp1, eigenvector(lp1, zero1), lp1.restrict(sol.u.derivative_values)) > 0.9999);

  CHECK(rep.lminus_kernel_cosine > 0.9999);
  CHECK(rep.lplus_kernel_cosine > 0.9999);
}

TEST_CASE("L- kernel residual is second order with a slowly decaying tail") {
  // At ω = 0.1, u(R_max) ≈ 1e-8; the residual must not see it as a truncation jump.
  std::vector<double> res;
  for (int n : {1024, 2048, 4096}) {
    ShootingConfig cfg;
    cfg.resolution = n;
    res.push_back(spectral_report(solve_ground_state(Params::make(3, 3.0, 1.0, 0.1), cfg), 2, false).lminus_kernel_residual);
  }
  CHECK(std::log2(res[0] / res[1]) >= 1.9);
  CHECK(std::log2(res[1] / res[2]) >= 1.9);
}

TEST_CASE("delta = 0 reduces to the NLS linearization") {
  const SolveReport sol = solve_ground_state(Params::make(3, 3.0, 0.0, 1.0));
  const DiscreteOperator lp = assemble(sol, OperatorKind::LPlus, 0);
  const DiscreteOperator dual = assemble(sol, OperatorKind::Dual, 0);
  for (Eigen::Index i = 0; i < lp.size(); i += 37) {
    const double u = sol.u.values(lp.first + i);
    REQUIRE(lp.potential(i) == doctest::Approx(1.0 - 3.0 * u * u).epsilon(1e-12));
  }
  const Eigen::VectorXd a = low_spectrum(lp, 4), b = low_spectrum(dual, 4);
  for (int k = 0; k < 4; ++k) CHECK(a(k) == doctest::Approx(b(k)).epsilon(1e-9).scale(1e-9));
}

TEST_CASE("l = 1 sector adds the centrifugal term") {
  const SolveReport sol = solve_ground_state(Params::make(3, 3.0, 1.0, 1.0));
  const DiscreteOperator l0 = assemble(sol, OperatorKind::LPlus, 0);
  const DiscreteOperator l1 = assemble(sol, OperatorKind::LPlus, 1);
  REQUIRE(l1.first == 1);
  const auto& x = sol.u.grid->nodes;
  for (Eigen::Index j = 200; j < l1.size() - 1; j += 151) {
    const Eigen::Index node = j + l1.first;
    const double extra = (l1.diag(j) - l0.diag(node - l0.first)) / l1.volume(j);
    // (N−1)/r² times the diffusion coefficient 1 + 2δu².
    const double u = sol.u.values(node);
    CHECK(extra == doctest::Approx(2.0 * (1.0 + 2.0 * u * u) / (x(node) * x(node))).epsilon(2e-3));
  }
}

TEST_CASE("conjugation with the dual operator") {
  // L+ w = (−Δ − f'(v)) η / r'(v) with η = w / r'(v), on smooth random w, to O(h²).
  const Params prm = Params::make(3, 3.0, 1.0, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), width(0.2, 2.0);
  std::vector<std::pair<double, double>> terms(4);
  for (auto& t : terms) t = {coef(rng), width(rng)};

  std::vector<double> err;
  for (int res : {2048, 4096}) {
    ShootingConfig cfg;
    cfg.resolution = res;
    const SolveReport sol = solve_ground_state(prm, cfg);
    const DiscreteOperator lp = assemble(sol, OperatorKind::LPlus, 0);
    const DiscreteOperator dual = assemble(sol, OperatorKind::Dual, 0);
    const TransformContext<double> ctx(prm.coupling);
    const auto& x = sol.u.grid->nodes;
    Eigen::VectorXd w(x.size()), rp(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      w(i) = 0.0;
      for (const auto& [c, a] : terms) w(i) += c * std::exp(-a * x(i) * x(i));
      rp(i) = r_prime_from(sol.u.values(i), ctx);
    }
    const Eigen::VectorXd eta = (w.array() / rp.array()).matrix();
    const Eigen::VectorXd lhs = lp.apply(lp.restrict(w));
    const Eigen::VectorXd rhs = (dual.apply(dual.restrict(eta)).array() / dual.restrict(rp).array()).matrix();
    double worst = 0.0;
    for (Eigen::Index i = 1; i < lhs.size() - 1; ++i)
      if (x(i + lp.first) < 10.0) worst = std::max(worst, std::abs(lhs(i) - rhs(i)));
    err.push_back(worst / lhs.cwiseAbs().maxCoeff());
  }
  CHECK(err[1] < 1e-4);
  CHECK(std::log2(err[0] / err[1]) >= 1.8);
}

TEST_CASE("resolvent M' against the NLS scaling") {
  ShootingConfig fine;
  fine.resolution = 16384;
  SUBCASE("N = 3, p = 3: M' = -(1/2) ω^{-3/2} ||Q||²") {
    for (double w : {0.5, 1.0}) {
      const SolveReport sol = solve_ground_state(Params::make(3, 3.0, 0.0, w), fine);
      const double q_mass = *sol.diagnostics.mass * std::sqrt(w);
      CHECK(mprime_resolvent(sol) == doctest::Approx(-0.5 * std::pow(w, -1.5) * q_mass).epsilon(1e-4));
    }
  }
  SUBCASE("second order in the grid spacing") {
    std::vector<double> err;
    for (int res : {2048, 4096, 8192}) {
      ShootingConfig cfg;
      cfg.resolution = res;
      const SolveReport sol = solve_ground_state(Params::make(3, 3.0, 0.0, 1.0), cfg);
      err.push_back(std::abs(mprime_resolvent(sol) / (-0.5 * *sol.diagnostics.mass) - 1.0));
    }
    CHECK(std::log2(err[0] / err[1]) >= 1.9);
    CHECK(std::log2(err[1] / err[2]) >= 1.9);
  }
  SUBCASE("mass-critical NLS: M' = 0") {
    const SolveReport sol = solve_ground_state(Params::make(2, 3.0, 0.0, 1.0), fine);
    CHECK(std::abs(mprime_resolvent(sol)) < 1e-5 * *sol.diagnostics.mass);
  }
  SUBCASE("N = 3, p = 2, δ = 1, small ω: M' > 0") {
    const SolveReport sol = solve_ground_state(Params::make(3, 2.0, 1.0, 0x1p-8));
    CHECK(mprime_resolvent(sol) > 0);
  }
  SUBCASE("dual form agrees to 0.5%") {
    for (const Params& p : {Params::make(3, 3.0, 1.0, 1.0), Params::make(3, 2.0, 1.0, 0.1),
                            Params::make(5, 3.0, 1.0, 0.05)}) {
      const SolveReport sol = solve_ground_state(p);
      CHECK(mprime_dual(sol) == doctest::Approx(mprime_resolvent(sol)).epsilon(5e-3));
    }
  }
}

TEST_CASE("matrix L") {
  SUBCASE("closed and discrete entries, L13 = 0, det < 0") {
    const SolveReport sol = solve_ground_state(Params::make(5, 3.0, 1.0, 0.01));
    const double mp = mprime_resolvent(sol);
    const MatrixL l = matrix_L(sol, mp);
    CHECK(l.max_mismatch < 1e-2);
    CHECK(std::abs(l.direct(0, 2)) < 1e-3 * l.direct.cwiseAbs().maxCoeff());
    CHECK(l.closed(0, 0) == doctest::Approx(-0.5 * mp));
    CHECK(l.closed(0, 1) == doctest::Approx(-*sol.diagnostics.mass));
    CHECK(l.det_closed < 0);
    CHECK(l.det_direct < 0);
  }
  SUBCASE("critical minor") {
    const Params p = Params::make(3, Rational(5, 1), 1.0, 1e-3);
    const SolveReport sol = solve_ground_state(p);
    const ScalarDiagnostics& d = sol.diagnostics;
    const Eigen::Matrix3d l = matrix_L_closed(d, p, mprime_resolvent(sol));
    const double minor = l(1, 1) * l(2, 2) - l(1, 2) * l(1, 2);
    const double expected = 4.0 * p.freq * *d.mass * d.dirichlet * (-2.0 * d.beta - 1.0);
    CHECK(minor == doctest::Approx(expected).epsilon(1e-5));
    CHECK(minor < 0);
    CHECK(l.determinant() < 0);
  }
  SUBCASE("mismatch is reported") {
    const SolveReport sol = solve_ground_state(Params::make(3, 3.0, 1.0, 1.0));
    CHECK_THROWS_AS(matrix_L(sol, 10.0 * mprime_resolvent(sol) + 100.0), Error);
  }
}

TEST_CASE("sign window of M'") {
  CHECK(mprime_sign_window(7, 4.0).verdict == SignWindow::GuaranteedNegative);
  CHECK(mprime_sign_window(7, 2.5).verdict == SignWindow::Inconclusive);
  for (double p : {1.5, 2.0, 7.0 / 3.0 + 0.01, 3.0, 5.0, 6.9}) {
    CAPTURE(p);
    CHECK(mprime_sign_window(5, p).verdict == SignWindow::GuaranteedNegative);
  }
  const SignWindowInfo w7 = mprime_sign_window(7, 3.0);
  REQUIRE(w7.p_minus.has_value());
  REQUIRE(w7.p_plus.has_value());
  CHECK(*w7.p_minus == doctest::Approx(1.92).epsilon(5e-3));
  CHECK(*w7.p_plus == doctest::Approx(3.22).epsilon(5e-3));
  CHECK(w7.p_star == doctest::Approx(18.0 / 7.0));
  CHECK(mprime_sign_window(7, 3.0 + 4.0 / 7.0 + 1e-9).verdict == SignWindow::GuaranteedNegative);
  CHECK(to_string(SignWindow::Inconclusive) == "Inconclusive");
}

TEST_CASE("Sturm count matches the computed spectrum") {
  const SolveReport sol = solve_ground_state(Params::make(4, 2.0, 0.5, 0.3));
  const DiscreteOperator lp = assemble(sol, OperatorKind::LPlus, 0);
  const Eigen::VectorXd low = low_spectrum(lp, 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(negative_count(lp, low(k) - 1e-9 * std::abs(low(k))) == k);
    CHECK(negative_count(lp, low(k) + 1e-9 * std::abs(low(k)) + 1e-12) == k + 1);
  }
}
