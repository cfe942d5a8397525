#include "qsg/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsg/dual_transform.hpp"

namespace qsg {

namespace {

double integrate(const Profile& prof, const Eigen::VectorXd& g, double power, double dpower = 0.0) {
  return integrate_radial(g, *prof.grid, prof.decay.dim, TailModel::of(prof.decay, power, dpower));
}

}  // namespace

double mass(const Profile& u) { return integrate(u, u.values.array().square().matrix(), 2.0); }

double dirichlet(const Profile& u) {
  return integrate(u, u.derivative_values.array().square().matrix(), 0.0, 2.0);
}

double quasi_gradient(const Profile& u) {
  const Eigen::VectorXd g = (u.values.array() * u.derivative_values.array()).square().matrix();
  return integrate(u, g, 2.0, 2.0);
}

double potential(const Profile& u, double p) {
  const Eigen::VectorXd g = u.values.array().abs().pow(p + 1.0).matrix();
  return integrate(u, g, p + 1.0);
}

double m_star(int dim) {
  const double n = dim;
  return std::numbers::pi * n * (n - 2.0) * std::pow(std::tgamma(n / 2.0) / std::tgamma(n), 2.0 / n);
}

ScalarDiagnostics compute_diagnostics(const Profile& u, const Profile& v, const Params& params) {
  ScalarDiagnostics d;
  try {
    d.mass = mass(u);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Divergent) throw;
  }
  d.dirichlet = dirichlet(u);
  d.quasi = quasi_gradient(u);
  d.potential = potential(u, params.exponent);
  d.beta = d.potential / d.dirichlet;
  d.energy = 0.5 * d.dirichlet + params.coupling * d.quasi - d.potential / (params.exponent + 1.0);
  if (params.dim >= 3) {
    try {
      d.m_omega = level_m_omega(v, params, std::numeric_limits<double>::infinity()).m_omega;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Divergent) throw;
    }
    if (classify(params).sobolev == SobolevRegime::Critical) {
      d.m_star = m_star(params.dim);
      if (d.m_omega) d.delta_omega = *d.m_omega - *d.m_star;
    }
  }
  return d;
}

namespace {

// ω M, with the convention ω M = 0 at ω = 0 even when M diverges.
double omega_mass(const ScalarDiagnostics& d, const Params& params) {
  if (params.freq == 0.0) return 0.0;
  if (!d.mass) throw Error(ErrorCode::Divergent, "mass diverges at positive frequency");
  return params.freq * *d.mass;
}

}  // namespace

double pohozaev_residual(const ScalarDiagnostics& d, const Params& params) {
  const double a = inverse_critical_sobolev(params.dim);
  const double lhs = a * d.dirichlet + 2.0 * a * params.coupling * d.quasi;
  const double rhs = d.potential / (params.exponent + 1.0) - 0.5 * omega_mass(d, params);
  return (lhs - rhs) / d.dirichlet;
}

double nehari_residual(const ScalarDiagnostics& d, const Params& params) {
  const double lhs = 0.5 * d.dirichlet + 2.0 * params.coupling * d.quasi;
  const double rhs = 0.5 * d.potential - 0.5 * omega_mass(d, params);
  return (lhs - rhs) / d.dirichlet;
}

namespace {

// The integrals entering the identities; the variational level needs v and is skipped.
ScalarDiagnostics identity_integrals(const Profile& u, const Params& params) {
  ScalarDiagnostics d;
  if (params.freq > 0) d.mass = mass(u);
  d.dirichlet = dirichlet(u);
  d.quasi = quasi_gradient(u);
  d.potential = potential(u, params.exponent);
  d.beta = d.potential / d.dirichlet;
  return d;
}

}  // namespace

double pohozaev_residual(const Profile& u, const Params& params) {
  return pohozaev_residual(identity_integrals(u, params), params);
}

double nehari_residual(const Profile& u, const Params& params) {
  return nehari_residual(identity_integrals(u, params), params);
}

double critical_key_residual(const ScalarDiagnostics& d, const Params& params) {
  const double lhs = params.coupling * d.quasi;
  const double rhs = omega_mass(d, params) / (params.dim - 2.0);
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::numeric_limits<double>::min());
}

double beta_identity_residual(const ScalarDiagnostics& d, const Params& params) {
  const double n = params.dim, p = params.exponent;
  const double lhs = ((3.0 * n + 2.0) / (n - 2.0) - p) * d.beta / (p + 1.0);
  const double rhs = 1.0 + (n + 2.0) / (n - 2.0) * omega_mass(d, params) / d.dirichlet;
  return std::abs(lhs - rhs) / std::abs(rhs);
}

double quasi_identity_residual(const ScalarDiagnostics& d, const Params& params) {
  const double n = params.dim, p = params.exponent;
  const double lhs = 2.0 * params.coupling * d.quasi;
  const double rhs = (1.0 - params.critical_sobolev() / (p + 1.0)) * d.dirichlet * d.beta +
                     2.0 / (n - 2.0) * omega_mass(d, params);
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

LevelResult level_m_omega(const Profile& v, const Params& params, double tolerance) {
  if (params.dim < 3) throw Error(ErrorCode::InvalidParams, "m_omega needs N >= 3");
  const TransformContext<double> ctx(params.coupling);
  Profile u = v;
  u.values = apply_r(v.values, ctx);
  const double p = params.exponent;
  double f_integral = potential(u, p) / (p + 1.0);
  if (params.freq > 0) f_integral -= 0.5 * params.freq * mass(u);
  LevelResult out;
  out.gradient_norm = dirichlet(v);
  out.potential_term = params.critical_sobolev() * f_integral;
  out.crosscheck = std::abs(out.gradient_norm - out.potential_term) / out.gradient_norm;
  if (!(out.potential_term > 0))
    throw Error(ErrorCode::ConstraintViolated, "2* int F(v) is not positive");
  out.m_omega = std::pow(out.potential_term, 2.0 / params.dim);
  if (out.crosscheck > tolerance)
    throw Error(ErrorCode::ConstraintViolated,
                "int |grad v|^2 and 2* int F(v) disagree by " + std::to_string(out.crosscheck));
  return out;
}

bool radial_decay_check(const Profile& u, double s) {
  if (!is_positive_nonincreasing(u, 0.0)) return false;
  const int n = u.decay.dim;
  double norm;
  try {
    norm = std::pow(potential(u, s - 1.0), 1.0 / s);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Divergent) return true;  // u ∉ L^s: the bound is vacuous
    throw;
  }
  const double c = std::pow(n / sphere_area(n), 1.0 / s) * norm;
  for (Eigen::Index i = 1; i < u.size(); ++i) {
    const double bound = c * std::pow(u.r(i), -n / s);
    if (std::abs(u.values(i)) > bound * (1.0 + 1e-12)) return false;
  }
  return true;
}

GnResult gn_constant(const Profile& u, double q, double s) {
  const double n = u.decay.dim;
  GnResult out;
  out.theta = 4.0 * n * (q - s) / (q * (4.0 * n - (n - 2.0) * s));
  const double w_q = std::pow(potential(u, q - 1.0), 2.0 / q);
  const double w_s = std::pow(potential(u, s - 1.0), 2.0 / s);
  const double grad_w = std::sqrt(4.0 * quasi_gradient(u));
  out.constant = w_q / (std::pow(grad_w, out.theta) * std::pow(w_s, 1.0 - out.theta));
  return out;
}

bool gn_check(const std::vector<Profile>& family, double q, double s, double growth) {
  if (family.empty()) return true;
  std::vector<double> c;
  for (const auto& u : family) {
    const double k = gn_constant(u, q, s).constant;
    if (!std::isfinite(k) || !(k > 0)) return false;
    c.push_back(k);
  }
  std::vector<double> sorted = c;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  return std::all_of(c.begin(), c.end(), [&](double k) { return k <= growth * median; });
}

bool moser_bound_check(const std::vector<double>& sup_norms, std::size_t skip, double slack) {
  for (double x : sup_norms)
    if (!std::isfinite(x)) return false;
  for (std::size_t i = skip + 1; i < sup_norms.size(); ++i)
    if (sup_norms[i] > sup_norms[i - 1] * (1.0 + slack)) return false;
  return true;
}

}  // namespace qsg
