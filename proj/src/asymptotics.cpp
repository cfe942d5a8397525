#include "qsg/asymptotics.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "qsg/differences.hpp"
#include "qsg/identities.hpp"
#include "qsg/quadrature.hpp"

namespace qsg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double decades(const std::vector<double>& omega) {
  const auto [lo, hi] = std::minmax_element(omega.begin(), omega.end());
  return std::log10(*hi / *lo);
}

// Indices of `branch` sorted by decreasing ω.
std::vector<std::size_t> by_decreasing_omega(const std::vector<MassCurvePoint>& branch) {
  std::vector<std::size_t> idx(branch.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return branch[a].omega > branch[b].omega; });
  return idx;
}

// True when |x| grows (strictly, up to slack) along the sequence.
bool increasing(const std::vector<double>& x, double slack = 0.0) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1] * (1.0 - slack))) return false;
  return !x.empty();
}

bool decreasing(const std::vector<double>& x, double slack = 0.0) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] < x[i - 1] * (1.0 + slack))) return false;
  return !x.empty();
}

// M' along a branch for sign and growth checks: the finite-difference values where the ladder
// provides them (they do not depend on inverting L₊ near its continuum edge), the resolvent
// values otherwise.
std::vector<double> branch_mprime(const std::vector<MassCurvePoint>& branch, const std::vector<std::size_t>& order) {
  std::vector<double> fd, res;
  for (auto i : order) {
    if (branch[i].mprime_fd) fd.push_back(*branch[i].mprime_fd);
    if (branch[i].mprime_resolvent) res.push_back(*branch[i].mprime_resolvent);
  }
  return fd.empty() ? res : fd;
}

}  // namespace

MassCurvePoint make_point(const SolveReport& sol, const SpectralReport* spec) {
  MassCurvePoint pt;
  const Params& prm = sol.params;
  const ScalarDiagnostics& d = sol.diagnostics;
  pt.omega = prm.freq;
  pt.mass = d.mass;
  pt.dirichlet = d.dirichlet;
  pt.beta = d.beta;
  pt.quasi = d.quasi;
  pt.energy = d.energy;
  pt.m_omega = d.m_omega;
  pt.regime = classify(prm).sobolev;
  pt.height = sol.shooting_height;
  pt.sup_u = sol.u.values(0);
  pt.pohozaev_residual = sol.pohozaev_residual;
  pt.nehari_residual = sol.nehari_residual;
  if (pt.regime == SobolevRegime::Critical) {
    pt.lambda = extract_lambda(sol.u, prm);
    pt.limit_distance = critical_profile_distance(sol.u, prm);
  }
  if (spec) {
    pt.negative_count = spec->negative_count_lplus;
    if (prm.freq > 0 && d.mass) {
      pt.mprime_resolvent = spec->mprime_resolvent;
      pt.mprime_dual = spec->mprime_dual;
    }
    if (spec->matrix) {
      pt.det_L = spec->matrix->det_closed;
      pt.matrix_mismatch = spec->matrix->max_mismatch;
    }
  }
  return pt;
}

std::string to_string(FitModel m) { return m == FitModel::PurePower ? "pure_power" : "power_log"; }

double aicc(double rss, int n, int k) {
  const double base = n * std::log(std::max(rss, 1e-300) / n) + 2.0 * k;
  return base + (n - k - 1 > 0 ? 2.0 * k * (k + 1) / (n - k - 1) : kInf);
}

FitResult fit_power(const std::vector<double>& omega, const std::vector<double>& y, double log_power) {
  const int n = static_cast<int>(omega.size());
  if (n < 3 || y.size() != omega.size()) throw Error(ErrorCode::InsufficientWindow, "need at least three points");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    if (!(omega[i] > 0 && y[i] > 0)) throw Error(ErrorCode::InsufficientWindow, "fit data must be positive");
    if (log_power != 0.0 && !(omega[i] < 1.0))
      throw Error(ErrorCode::InsufficientWindow, "log model needs ω < 1");
    a(i, 0) = 1.0;
    a(i, 1) = std::log(omega[i]);
    b(i) = std::log(y[i]) - (log_power != 0.0 ? log_power * std::log(-std::log(omega[i])) : 0.0);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd resid = b - a * c;

  FitResult f;
  f.model = log_power == 0.0 ? FitModel::PurePower : FitModel::PowerLog;
  f.exponent = c(1);
  f.prefactor = std::exp(c(0));
  f.log_power = log_power;
  f.rss = resid.squaredNorm();
  const double tss = (b.array() - b.mean()).square().sum();
  f.r2 = tss > 0 ? 1.0 - f.rss / tss : 1.0;
  f.omega_min = *std::min_element(omega.begin(), omega.end());
  f.omega_max = *std::max_element(omega.begin(), omega.end());
  f.points = n;
  f.aicc = aicc(f.rss, n, 2);
  return f;
}

ModelChoice select_model(const std::vector<double>& omega, const std::vector<double>& y, double log_power) {
  ModelChoice m;
  m.pure = fit_power(omega, y, 0.0);
  m.log_model = fit_power(omega, y, log_power);
  m.log_preferred = m.log_model.aicc < m.pure.aicc;
  return m;
}

double fit_stability(const std::vector<double>& omega, const std::vector<double>& y, double log_power) {
  const FitResult full = fit_power(omega, y, log_power);
  std::vector<std::size_t> idx(omega.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return omega[a] < omega[b]; });
  const std::size_t keep = std::max<std::size_t>(3, omega.size() - omega.size() / 3);
  std::vector<double> o, v;
  for (std::size_t k = 0; k < keep; ++k) {
    o.push_back(omega[idx[k]]);
    v.push_back(y[idx[k]]);
  }
  const FitResult part = fit_power(o, v, log_power);
  return std::abs(part.exponent - full.exponent) / std::abs(full.exponent);
}

AubinTalenti AubinTalenti::make(int dim) {
  if (dim < 3) throw Error(ErrorCode::RegimeMismatch, "the Aubin-Talenti profile needs N >= 3");
  return {dim, qsg::m_star(dim)};
}

double AubinTalenti::U(double r) const {
  const double n = dim;
  return std::pow(1.0 + r * r / (n * (n - 2.0)), -(n - 2.0) / 2.0);
}

double AubinTalenti::dU(double r) const {
  const double n = dim;
  return -r / n * std::pow(1.0 + r * r / (n * (n - 2.0)), -n / 2.0);
}

double AubinTalenti::W(double r) const { return U(std::sqrt(m_star) * r); }

Profile AubinTalenti::profile(std::shared_ptr<const Grid> grid) const {
  Profile out;
  out.grid = grid;
  out.values.resize(grid->size());
  out.derivative_values.resize(grid->size());
  for (Eigen::Index i = 0; i < grid->size(); ++i) {
    out.values(i) = U(grid->nodes(i));
    out.derivative_values(i) = dU(grid->nodes(i));
  }
  const double n = dim;
  out.decay = {DecayKind::Power, n - 2.0, std::pow(n * (n - 2.0), (n - 2.0) / 2.0), dim};
  return out;
}

double AubinTalenti::equation_residual(const Grid& grid) const {
  const double n = dim;
  double worst = 0.0;
  for (Eigen::Index i = 1; i < grid.size(); ++i) {
    const double r = grid.nodes(i);
    const double s = 1.0 + r * r / (n * (n - 2.0));
    const double d2 = -std::pow(s, -n / 2.0) / n + r * r / (n * (n - 2.0)) * std::pow(s, -n / 2.0 - 1.0);
    const double lap = d2 + (n - 1.0) / r * dU(r);
    const double u = U(r);
    worst = std::max(worst, std::abs(lap + std::pow(u, (n + 2.0) / (n - 2.0))));
  }
  return worst;
}

double AubinTalenti::w_critical_norm(const Grid& grid) const {
  const double n = dim, crit = 2.0 * n / (n - 2.0);
  Eigen::VectorXd g(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) g(i) = std::pow(W(grid.nodes(i)), crit);
  return integrate_radial(g, grid, dim, TailModel::power(2.0 * n));
}

double AubinTalenti::dirichlet() const { return std::pow(m_star, 0.5 * dim); }

double extract_lambda(const Profile& u, const Params& params) {
  if (params.dim < 3) throw Error(ErrorCode::RegimeMismatch, "λ_ω is defined for N >= 3");
  return std::pow(u.values(0), -2.0 / (params.dim - 2.0));
}

double critical_profile_distance(const Profile& u, const Params& params, double radius) {
  const double lambda = extract_lambda(u, params);
  const AubinTalenti at = AubinTalenti::make(params.dim);
  const double amp = std::pow(lambda, 0.5 * (params.dim - 2.0));
  double worst = 0.0;
  const int samples = 2000;
  for (int k = 0; k <= samples; ++k) {
    const double x = radius * k / samples;
    worst = std::max(worst, std::abs(amp * u(lambda * x) - at.U(x)));
  }
  return worst;
}

double subcritical_leading_exponent(int dim, double p) {
  return (4.0 - dim * (p - 1.0)) / (2.0 * (p - 1.0));
}

double subcritical_correction_exponent(int dim, double p) {
  return (8.0 - dim * (p - 1.0)) / (2.0 * (p - 1.0));
}

double subcritical_correction_coefficient(int dim, double p, double delta, double grad_q2) {
  return (2.0 * (p - 1.0) + 8.0 - dim * (p - 1.0)) / (4.0 * (p - 1.0)) * delta * grad_q2;
}

SubcriticalReport subcritical_expansion_check(const Params& params, const std::vector<double>& omegas,
                                              int resolution) {
  if (classify(params).sobolev != SobolevRegime::Subcritical)
    throw Error(ErrorCode::RegimeMismatch, "subcritical expansion needs p below the Sobolev exponent");
  const int n = params.dim;
  const double p = params.exponent, delta = params.coupling;
  ShootingConfig cfg;
  cfg.resolution = resolution;
  const SolveReport q = solve_ground_state(Params::make(n, p, 0.0, 1.0), cfg);

  SubcriticalReport rep;
  rep.q_mass = q.diagnostics.mass.value();
  rep.grad_q2 = 4.0 * q.diagnostics.quasi;
  rep.coefficient = subcritical_correction_coefficient(n, p, delta, rep.grad_q2);
  const double a = subcritical_leading_exponent(n, p);
  const double s = 2.0 / (p - 1.0);

  std::vector<double> xs, corrections;
  for (double w : omegas) {
    const double x = std::pow(w, s);
    const SolveReport r = solve_ground_state(Params::make(n, p, delta * x, 1.0), cfg);
    const double excess = r.diagnostics.mass.value() - rep.q_mass;
    rep.omegas.push_back(w);
    rep.ratios.push_back(excess / x);
    rep.profile_distance.push_back(sup_distance(r.u, q.u, r.u.grid->r_max()));
    xs.push_back(x);
    corrections.push_back(std::pow(w, a) * excess);
  }
  if (rep.omegas.size() < 2) throw Error(ErrorCode::InsufficientWindow, "need at least two frequencies");

  // Least-squares line through (x, ratio); the intercept is the ω → 0 limit.
  const Eigen::Index m = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[i];
    rhs(i) = rep.ratios[i];
  }
  rep.extrapolated = design.colPivHouseholderQr().solve(rhs)(0);
  rep.relative_error = rep.coefficient != 0.0 ? std::abs(rep.extrapolated - rep.coefficient) / std::abs(rep.coefficient)
                                              : std::abs(rep.extrapolated);

  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return rep.omegas[i] > rep.omegas[j]; });
  std::vector<double> dist;
  for (auto i : idx) dist.push_back(rep.profile_distance[i]);
  rep.profile_monotone = decreasing(dist);

  if (delta > 0 && m >= 3 && std::all_of(corrections.begin(), corrections.end(), [](double c) { return c > 0; }))
    rep.correction_fit = fit_power(rep.omegas, corrections);
  return rep;
}

double critical_mass_exponent(int dim) { return dim == 3 ? -0.75 : (dim == 4 ? -0.5 : -2.0 / dim); }
double critical_lambda_exponent(int dim) { return dim == 3 ? -0.25 : (dim == 4 ? -0.25 : -1.0 / dim); }
double critical_delta_exponent(int dim) { return dim == 3 ? 0.25 : (dim == 4 ? 0.5 : 1.0 - 2.0 / dim); }
double critical_log_power_mass() { return 0.5; }
double critical_log_power_lambda() { return -0.25; }
double critical_log_power_delta() { return 0.5; }

CriticalReport critical_scaling_report(const std::vector<MassCurvePoint>& branch, const Params& params,
                                       std::optional<double> window_max) {
  if (classify(params).sobolev != SobolevRegime::Critical)
    throw Error(ErrorCode::RegimeMismatch, "critical scaling needs p = (N+2)/(N-2)");
  std::vector<double> om, mass, lambda, dom, lam_sqrt, dist;
  std::vector<std::size_t> used;
  for (auto i : by_decreasing_omega(branch)) {
    const MassCurvePoint& pt = branch[i];
    if (!(pt.mass && pt.lambda && pt.m_omega)) continue;
    if (window_max && pt.omega > *window_max) continue;
    used.push_back(i);
    om.push_back(pt.omega);
    mass.push_back(*pt.mass);
    lambda.push_back(*pt.lambda);
    dom.push_back(*pt.m_omega - m_star(params.dim));
    lam_sqrt.push_back(*pt.lambda * std::sqrt(pt.omega));
    if (pt.limit_distance) dist.push_back(*pt.limit_distance);
  }
  if (om.size() < 3 || decades(om) < 3.0 - 1e-9)
    throw Error(ErrorCode::InsufficientWindow, "critical fits need three decades of ω");

  CriticalReport rep;
  if (params.dim == 4) {
    rep.mass_choice = select_model(om, mass, critical_log_power_mass());
    rep.lambda_choice = select_model(om, lambda, critical_log_power_lambda());
    rep.mass = rep.mass_choice->chosen();
    rep.lambda = rep.lambda_choice->chosen();
    rep.mass_stability = fit_stability(om, mass, rep.mass.log_power);
    rep.lambda_stability = fit_stability(om, lambda, rep.lambda.log_power);
  } else {
    rep.mass = fit_power(om, mass);
    rep.lambda = fit_power(om, lambda);
    rep.mass_stability = fit_stability(om, mass);
    rep.lambda_stability = fit_stability(om, lambda);
  }
  if (std::all_of(dom.begin(), dom.end(), [](double x) { return x > 0; })) {
    if (params.dim == 4) {
      rep.delta_choice = select_model(om, dom, critical_log_power_delta());
      rep.delta_omega = rep.delta_choice->chosen();
    } else {
      rep.delta_omega = fit_power(om, dom);
    }
    rep.delta_stability = fit_stability(om, dom, rep.delta_omega.log_power);
  }
  const std::vector<double> mprime = branch_mprime(branch, used);
  rep.mprime_negative =
      !mprime.empty() && std::all_of(mprime.begin(), mprime.end(), [](double x) { return x < 0; });
  std::vector<double> abs_mprime;
  for (double x : mprime) abs_mprime.push_back(std::abs(x));
  rep.mprime_growing = increasing(abs_mprime);
  rep.lambda_sqrt_omega_decreasing = decreasing(lam_sqrt);
  rep.distance_monotone = decreasing(dist);
  if (!dist.empty()) rep.smallest_distance = dist.back();
  return rep;
}

double aitken_limit(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw Error(ErrorCode::InsufficientWindow, "empty sequence");
  if (n < 3) return values.back();
  const double x0 = values[n - 3], x1 = values[n - 2], x2 = values[n - 1];
  const double d1 = x1 - x0, d2 = x2 - x1;
  const double ratio = d2 / d1;
  if (!(std::abs(d1) > 0) || !(ratio > 0 && ratio < 1)) return x2;
  return x2 + d2 * ratio / (1.0 - ratio);
}

SupercriticalReport supercritical_limit_check(const std::vector<MassCurvePoint>& branch, const SolveReport& u0,
                                              const Params& params) {
  if (classify(params).sobolev != SobolevRegime::Supercritical)
    throw Error(ErrorCode::RegimeMismatch, "supercritical limits need p above the Sobolev exponent");
  SupercriticalReport rep;
  rep.u0_mass = u0.diagnostics.mass.value_or(kInf);
  rep.window = mprime_sign_window(params.dim, params.exponent);

  std::vector<double> om, mass, omega_mass, dist;
  std::vector<std::size_t> used;
  bool any_det = false, det_negative = true;
  for (auto i : by_decreasing_omega(branch)) {
    const MassCurvePoint& pt = branch[i];
    if (!pt.mass) continue;
    used.push_back(i);
    om.push_back(pt.omega);
    mass.push_back(*pt.mass);
    omega_mass.push_back(pt.omega * *pt.mass);
    if (pt.limit_distance) dist.push_back(*pt.limit_distance);
    if (pt.det_L) {
      any_det = true;
      det_negative = det_negative && *pt.det_L < 0;
    }
  }
  if (om.size() < 3) throw Error(ErrorCode::InsufficientWindow, "need at least three branch points");

  if (std::isfinite(rep.u0_mass)) {
    rep.extrapolated_mass = aitken_limit(mass);
    rep.mass_relative_error = std::abs(*rep.extrapolated_mass - rep.u0_mass) / rep.u0_mass;
  } else {
    // M(ω_min) / M(100 ω_min), or over the whole branch if it is shorter.
    const double target = 100.0 * om.back();
    std::size_t j = 0;
    for (std::size_t k = 0; k < om.size(); ++k)
      if (std::abs(std::log(om[k] / target)) < std::abs(std::log(om[j] / target))) j = k;
    rep.growth_factor = mass.back() / mass[j];
  }
  rep.omega_mass_monotone = decreasing(omega_mass);
  rep.distance_monotone = decreasing(dist);
  const std::vector<double> mprime = branch_mprime(branch, used);
  std::vector<double> abs_mprime;
  for (double x : mprime) abs_mprime.push_back(std::abs(x));
  rep.mprime_negative = !mprime.empty() && std::all_of(mprime.begin(), mprime.end(), [](double x) { return x < 0; });
  rep.mprime_growing = increasing(abs_mprime);
  rep.det_negative = any_det && det_negative;
  return rep;
}

namespace {

template <int width>
double stencil_derivative(const std::vector<double>& t, const std::vector<double>& g, std::size_t start, double t0) {
  std::array<double, width> x;
  for (int k = 0; k < width; ++k) x[k] = t[start + k];
  const auto w = derivative_weights<width>(t0, x);
  double d = 0.0;
  for (int k = 0; k < width; ++k) d += w[k] * g[start + k];
  return d;
}

}  // namespace

double branch_derivative(const std::vector<double>& omega, const std::vector<double>& y, std::size_t i,
                         int max_width) {
  const std::size_t n = omega.size();
  if (y.size() != n || i >= n) throw Error(ErrorCode::InvalidParams, "branch index out of range");
  if (i == 0 || i + 1 == n)
    throw Error(ErrorCode::InsufficientNeighbors, "no neighbors on both sides of ω = " + std::to_string(omega[i]));
  // Centered where the branch allows it, shifted inward next to the ends.
  const std::size_t half = static_cast<std::size_t>(std::clamp(max_width, 3, 9) / 2);
  const int width = static_cast<int>(std::min(2 * half + 1, n % 2 ? n : n - 1));
  const std::size_t start = std::min(i - std::min(i, half), n - static_cast<std::size_t>(width));
  bool one_sign = true;
  for (int k = 0; k < width; ++k) one_sign = one_sign && (y[start + k] * y[i] > 0);

  std::vector<double> t(n), g(n);
  for (std::size_t k = start; k < start + width; ++k) {
    t[k] = std::log(omega[k]);
    g[k] = one_sign ? std::log(std::abs(y[k])) : y[k];
  }
  const double t0 = t[i];
  double dg = 0.0;
  switch (width) {
    case 3: dg = stencil_derivative<3>(t, g, start, t0); break;
    case 5: dg = stencil_derivative<5>(t, g, start, t0); break;
    case 7: dg = stencil_derivative<7>(t, g, start, t0); break;
    default: dg = stencil_derivative<9>(t, g, start, t0); break;
  }
  // dy/dω = (dy/d log ω) / ω, with dy/d log ω = y · d log|y| / d log ω on a one-signed stencil.
  return (one_sign ? y[i] * dg : dg) / omega[i];
}

EnergyReport energy_limit_check(const std::vector<MassCurvePoint>& branch, const Params& params,
                                std::optional<double> u0_dirichlet) {
  const Regime regime = classify(params);
  const double n = params.dim, p = params.exponent;
  EnergyReport rep;
  switch (regime.sobolev) {
    case SobolevRegime::Subcritical: rep.target = 0.0; break;
    case SobolevRegime::Critical: rep.target = AubinTalenti::make(params.dim).dirichlet() / n; break;
    case SobolevRegime::Supercritical:
      if (!u0_dirichlet) throw Error(ErrorCode::InvalidParams, "supercritical energy limit needs ‖∇u₀‖²");
      rep.target = 2.0 / ((3.0 * n + 2.0) - p * (n - 2.0)) * *u0_dirichlet;
      break;
  }

  std::vector<double> om, energy, mass;
  for (auto i : by_decreasing_omega(branch)) {
    if (!branch[i].mass) continue;
    om.push_back(branch[i].omega);
    energy.push_back(branch[i].energy);
    mass.push_back(*branch[i].mass);
  }
  if (om.empty()) throw Error(ErrorCode::InsufficientWindow, "empty branch");
  rep.extrapolated = aitken_limit(energy);
  if (rep.target != 0.0) {
    rep.relative_error = std::abs(rep.extrapolated - rep.target) / std::abs(rep.target);
  } else {
    double scale = 0.0;
    for (double e : energy) scale = std::max(scale, std::abs(e));
    rep.relative_error = scale > 0 ? std::abs(rep.extrapolated) / scale : 0.0;
  }
  rep.sign_near_zero = energy.back() > 0 ? 1 : (energy.back() < 0 ? -1 : 0);

  // Points with four ladder neighbors on each side when the branch is long enough for that.
  const std::size_t margin = om.size() >= 9 ? 4 : 1;
  for (std::size_t i = margin; i + margin < om.size(); ++i) {
    const double de = branch_derivative(om, energy, i, 9);
    const double dm = branch_derivative(om, mass, i, 9);
    rep.max_derivative_mismatch = std::max(rep.max_derivative_mismatch, std::abs(de + 0.5 * om[i] * dm) / std::abs(de));
  }
  return rep;
}

}  // namespace qsg
