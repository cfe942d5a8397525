#include "qsg/shooting.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "qsg/differences.hpp"

namespace qsg {

namespace odeint = boost::numeric::odeint;

std::string to_string(Trajectory t) {
  switch (t) {
    case Trajectory::Overshoot: return "Overshoot";
    case Trajectory::Undershoot: return "Undershoot";
    case Trajectory::Converging: return "Converging";
  }
  return "?";
}

namespace {

using State = std::array<double, 2>;

struct RadialSystem {
  const DualNonlinearity<double>* nl;
  double n_minus_1;
  void operator()(const State& x, State& dxdt, double r) const {
    dxdt[0] = x[1];
    dxdt[1] = -n_minus_1 / r * x[1] - nl->f(x[0]);
  }
};

// log K_ν(x), switching to the large-argument expansion before cyl_bessel_k underflows.
double log_bessel_k(double nu, double x) {
  if (x < 500.0) return std::log(std::cyl_bessel_k(nu, x));
  const double mu = 4.0 * nu * nu;
  const double series = 1.0 + (mu - 1.0) / (8.0 * x) + (mu - 1.0) * (mu - 9.0) / (128.0 * x * x);
  return 0.5 * std::log(M_PI / (2.0 * x)) - x + std::log(series);
}

// Energy ½v'² + F_ω(v); it is nonincreasing along trajectories.
double energy(const ShootState& s, const DualNonlinearity<double>& nl) {
  return 0.5 * s.dv * s.dv + nl.F(s.v);
}

struct Run {
  Trajectory outcome = Trajectory::Converging;
  ShootState last;
  Eigen::VectorXd v, dv;
  Eigen::Index sampled = 0;  // nodes [0, sampled) are filled
};

Trajectory classify_with_energy(const ShootState& s, const DualNonlinearity<double>& nl) {
  const Trajectory t = classify_trajectory(s);
  if (t != Trajectory::Converging) return t;
  if (nl.omega > 0 && energy(s, nl) < 0) return Trajectory::Undershoot;
  return t;
}

Run integrate(double a, const Params& params, const DualNonlinearity<double>& nl,
              const ShootingConfig& cfg, double r_max, const Grid* grid) {
  const int n = params.dim;
  Run run;
  const double curvature = std::abs(nl.f_prime(a)) + nl.omega;
  const double scale = curvature > 0 ? std::min(1.0, 1.0 / std::sqrt(curvature)) : 1.0;
  const double r0 = 1e-6 * scale;
  const auto [v0, dv0] = series_start(a, params, r0);
  State x{v0, dv0};
  RadialSystem sys{&nl, n - 1.0};
  const double atol = cfg.atol * std::max(1.0, a) * (nl.omega > 0 ? 1.0 : 1e-4);
  auto stepper = odeint::make_dense_output(atol, cfg.rtol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(x, r0, r0);

  Eigen::Index next = 0;
  if (grid) {
    run.v.resize(grid->size());
    run.dv.resize(grid->size());
    run.v(0) = a;
    run.dv(0) = 0.0;
    next = 1;
  }
  State buf;
  bool sampling = grid != nullptr;
  while (true) {
    const auto [t0, t1] = stepper.do_step(sys);
    const State& cur = stepper.current_state();
    ShootState s{t1, cur[0], cur[1]};
    if (s.v < 0.0 || s.dv > 0.0) {
      // Resolve which event came first inside the step, refining while both conditions
      // appear together.
      double lo_t = t0, hi_t = t1;
      for (int level = 0; level < 4; ++level) {
        for (int k = 1; k <= 64; ++k) {
          const double tk = lo_t + (hi_t - lo_t) * k / 64.0;
          stepper.calc_state(tk, buf);
          if (buf[0] < 0.0 || buf[1] > 0.0) {
            s = ShootState{tk, buf[0], buf[1]};
            hi_t = tk;
            lo_t = lo_t + (hi_t - lo_t) * (k - 1) / k;
            break;
          }
        }
        if (!(s.v < 0.0 && s.dv > 0.0)) break;
      }
      // Still both at the finest level: the zero crossing is the decisive event.
      if (s.v < 0.0 && s.dv > 0.0) s.dv = 0.0;
    }
    Trajectory t = classify_with_energy(s, nl);
    if (sampling) {
      while (next < grid->size() && (*grid)[next] <= std::min(t1, r_max)) {
        stepper.calc_state((*grid)[next], buf);
        if (buf[0] <= 0.0 || buf[1] > 0.0) {
          sampling = false;
          break;
        }
        run.v(next) = buf[0];
        run.dv(next) = buf[1];
        ++next;
      }
    }
    if (t != Trajectory::Converging) {
      run.outcome = t;
      run.last = s;
      break;
    }
    if (t1 >= r_max) {
      stepper.calc_state(r_max, buf);
      run.last = ShootState{r_max, buf[0], buf[1]};
      run.outcome = classify_at_boundary(run.last, params);
      break;
    }
  }
  run.sampled = grid ? next : 0;
  return run;
}

}  // namespace

std::pair<double, double> series_start(double a, const Params& params, double r0) {
  const DualNonlinearity<double> nl(params);
  const auto d = nl.at(a);
  const int n = params.dim;
  const double c2 = -d.f / (2.0 * n);
  const double c4 = d.f * d.fp / (8.0 * n * (n + 2.0));
  const double r2 = r0 * r0;
  return {a + c2 * r2 + c4 * r2 * r2, 2.0 * c2 * r0 + 4.0 * c4 * r2 * r0};
}

Trajectory classify_trajectory(const ShootState& s) {
  if (s.v < 0.0 && s.dv > 0.0)
    throw Error(ErrorCode::Ambiguous, "trajectory crossed zero and turned within one step");
  if (s.v < 0.0) return Trajectory::Overshoot;
  if (s.dv > 0.0) return Trajectory::Undershoot;
  return Trajectory::Converging;
}

Trajectory classify_at_boundary(const ShootState& s, const Params& params) {
  if (s.v < 0.0) return Trajectory::Overshoot;
  const Trajectory t = classify_trajectory(s);
  if (t != Trajectory::Converging) return t;
  const int n = params.dim;
  if (params.freq > 0) {
    // v ≈ α r^{−ν} I_ν(κr) + β r^{−ν} K_ν(κr); sign(α) = sign(v' − g_K v).
    const double kappa = std::sqrt(params.freq);
    const double nu = 0.5 * (n - 2);
    const double x = kappa * s.r;
    const double g_k = -kappa * std::exp(log_bessel_k(nu + 1.0, x) - log_bessel_k(nu, x));
    return s.dv - g_k * s.v > 0.0 ? Trajectory::Undershoot : Trajectory::Overshoot;
  }
  // v ≈ A + B r^{2−N}; A∞ = A(R) − (1/(N−2)) ∫_R^∞ r f(v) dr with f(v) ≈ v^p.
  const double p = params.exponent;
  const double k = n - 2.0;
  const double a_r = s.v + s.r * s.dv / k;
  const double b = -s.dv * std::pow(s.r, n - 1) / k;
  const double correction = b > 0 ? std::pow(b, p) * std::pow(s.r, 2.0 - p * k) / (p * k - 2.0) / k : 0.0;
  return a_r - correction > 0.0 ? Trajectory::Undershoot : Trajectory::Overshoot;
}

Trajectory shoot(double a, const Params& params, const ShootingConfig& cfg, double r_max) {
  const DualNonlinearity<double> nl(params);
  ShootingConfig local = cfg;
  for (int attempt = 0; attempt < 3; ++attempt) {
    try {
      return integrate(a, params, nl, local, r_max, nullptr).outcome;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Ambiguous) throw;
      local.rtol *= 0.1;
      local.atol *= 0.1;
    }
  }
  throw Error(ErrorCode::Ambiguous, "trajectory classification stayed ambiguous");
}

namespace {

std::pair<double, double> find_bracket(const Params& params, const ShootingConfig& cfg, double r_max) {
  const DualNonlinearity<double> nl(params);
  const double s_star = nl.zero_of_F();
  double lo, hi;
  if (params.freq > 0) {
    lo = cfg.a_lo.value_or(s_star);
    hi = cfg.a_hi.value_or(10.0 * s_star);
  } else {
    lo = cfg.a_lo.value_or(1.0);
    hi = cfg.a_hi.value_or(1.0);
  }
  for (int k = 0; shoot(lo, params, cfg, r_max) != Trajectory::Undershoot; ++k) {
    if (k > 80) throw Error(ErrorCode::BracketFailure, "no undershooting height found");
    lo = params.freq > 0 ? std::max(s_star, lo / 10.0) : lo / 2.0;
    if (params.freq > 0 && lo == s_star && k > 1)
      throw Error(ErrorCode::BracketFailure, "s* does not undershoot");
  }
  hi = std::max(hi, lo);
  for (int k = 0; shoot(hi, params, cfg, r_max) != Trajectory::Overshoot; ++k) {
    if (k > 80) throw Error(ErrorCode::BracketFailure, "no overshooting height found");
    lo = hi;
    hi *= 2.0;
  }
  return {lo, hi};
}

// Exponential tail value and slope of C r^{−ν} K_ν(κ r) anchored at (r_s, v_s).
struct TailEval {
  double v, dv;
};

TailEval bessel_tail(double v_s, double r_s, double r, double kappa, double nu) {
  const double log_ratio = -nu * std::log(r / r_s) + log_bessel_k(nu, kappa * r) - log_bessel_k(nu, kappa * r_s);
  const double v = v_s * std::exp(log_ratio);
  const double ratio = std::exp(log_bessel_k(nu + 1.0, kappa * r) - log_bessel_k(nu, kappa * r));
  return {v, -kappa * ratio * v};
}

}  // namespace

double ode_residual(const Profile& v, const Params& params) {
  const DualNonlinearity<double> nl(params);
  const auto& x = v.grid->nodes;
  const Eigen::VectorXd d2 = differentiate(x, v.derivative_values, -1, 7);
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < x.size(); ++i) {
    const double res = -d2(i) - (params.dim - 1.0) / x(i) * v.derivative_values(i) - nl.f(v.values(i));
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double quasilinear_residual(const Profile& u, const Params& params) {
  const auto& x = u.grid->nodes;
  const Eigen::VectorXd d2 = differentiate(x, u.derivative_values, -1, 7);
  const double delta = params.coupling, omega = params.freq, p = params.exponent;
  double worst = 0.0, scale = 0.0;
  for (Eigen::Index i = 1; i + 1 < x.size(); ++i) {
    const double uu = u.values(i), du = u.derivative_values(i);
    const double lap = d2(i) + (params.dim - 1.0) / x(i) * du;
    const double source = std::pow(std::abs(uu), p - 1) * uu - omega * uu;
    const double res = (1.0 + 2.0 * delta * uu * uu) * lap + 2.0 * delta * uu * du * du + source;
    worst = std::max(worst, std::abs(res));
    scale = std::max(scale, std::abs(source) + std::abs(lap));
  }
  return scale > 0 ? worst / scale : worst;
}

SolveReport solve_ground_state(const Params& params, const ShootingConfig& cfg) {
  params.validate();
  const Regime regime = classify(params);
  if (params.freq == 0.0) {
    if (params.dim < 3 || regime.sobolev != SobolevRegime::Supercritical)
      throw Error(ErrorCode::NoGroundState,
                  "omega = 0 has no nontrivial solution unless N >= 3 and p > (N+2)/(N-2)");
  }
  auto grid = std::make_shared<const Grid>(make_grid(params, cfg.resolution));
  const double r_max = grid->r_max();
  const DualNonlinearity<double> nl(params);

  auto [lo, hi] = find_bracket(params, cfg, r_max);
  int iterations = 0;
  while (hi - lo > cfg.bisection_tolerance * hi) {
    if (++iterations > cfg.max_bisections)
      throw Error(ErrorCode::NoConvergence, "bisection did not reach the requested tolerance");
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (shoot(mid, params, cfg, r_max) == Trajectory::Overshoot ? hi : lo) = mid;
  }
  const double a = 0.5 * (lo + hi);

  // Steep cores (large p) need a finer grid than the requested resolution provides.
  const double core = std::sqrt(params.dim * a / std::max(std::abs(nl.f(a)), 1e-300));
  for (int res = cfg.resolution; grid->core_step * cfg.core_cells > core && res < kMaxResolution;) {
    res *= 2;
    grid = std::make_shared<const Grid>(make_grid(params, res));
  }

  const Run run_lo = integrate(lo, params, nl, cfg, r_max, grid.get());
  const Run run_hi = integrate(hi, params, nl, cfg, r_max, grid.get());
  const Run run = integrate(a, params, nl, cfg, r_max, grid.get());

  // Last node at which both bracketing trajectories still agree with the midpoint.
  const Eigen::Index limit = std::min({run_lo.sampled, run_hi.sampled, run.sampled});
  Eigen::Index splice = 1;
  while (splice < limit &&
         std::abs(run_hi.v(splice) - run_lo.v(splice)) <= cfg.splice_gap * std::abs(run.v(splice)))
    ++splice;
  splice -= 1;
  if (splice < 8) throw Error(ErrorCode::BracketFailure, "bracketing trajectories separate immediately");

  const int n = params.dim;
  Profile v;
  v.grid = grid;
  v.values = run.v;
  v.derivative_values = run.dv;
  const double r_s = (*grid)[splice], v_s = run.v(splice);
  v.decay.dim = n;
  if (params.freq > 0) {
    const double kappa = std::sqrt(params.freq), nu = 0.5 * (n - 2);
    for (Eigen::Index i = splice + 1; i < grid->size(); ++i) {
      const auto t = bessel_tail(v_s, r_s, (*grid)[i], kappa, nu);
      v.values(i) = t.v;
      v.derivative_values(i) = t.dv;
    }
    v.decay.kind = DecayKind::Exponential;
    v.decay.rate = kappa;
    v.decay.amplitude = std::exp(std::log(v_s) + nu * std::log(r_s) - log_bessel_k(nu, kappa * r_s)) *
                        std::sqrt(M_PI / (2.0 * kappa));
  } else {
    for (Eigen::Index i = splice + 1; i < grid->size(); ++i) {
      const double rr = (*grid)[i];
      v.values(i) = v_s * std::pow(rr / r_s, 2.0 - n);
      v.derivative_values(i) = (2.0 - n) * v.values(i) / rr;
    }
    v.decay.kind = DecayKind::Power;
    v.decay.rate = n - 2.0;
    v.decay.amplitude = v_s * std::pow(r_s, n - 2.0);
  }

  Profile u = v;
  for (Eigen::Index i = 0; i < grid->size(); ++i) {
    const double rv = r(v.values(i), nl.ctx);
    u.values(i) = rv;
    u.derivative_values(i) = r_prime_from(rv, nl.ctx) * v.derivative_values(i);
  }

  SolveReport rep;
  rep.params = params;
  rep.shooting_height = a;
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  rep.splice_radius = r_s;
  rep.iterations = iterations;
  rep.v = std::move(v);
  rep.u = std::move(u);
  rep.ode_residual = ode_residual(rep.v, params);
  rep.quasilinear_residual = quasilinear_residual(rep.u, params);
  rep.diagnostics = compute_diagnostics(rep.u, rep.v, params);
  rep.pohozaev_residual = pohozaev_residual(rep.diagnostics, params);
  rep.nehari_residual = nehari_residual(rep.diagnostics, params);
  rep.m_omega = rep.diagnostics.m_omega;
  if (cfg.residual_gate &&
      (std::abs(rep.pohozaev_residual) > *cfg.residual_gate || std::abs(rep.nehari_residual) > *cfg.residual_gate))
    throw Error(ErrorCode::ConstraintViolated, "identity residuals exceed the acceptance gate");
  return rep;
}

SolveReport nls_ground_state_report(int dim, double p, int resolution) {
  Params params = Params::make(dim, p, 0.0, 1.0);
  const Regime regime = classify(params);
  if (dim >= 3 && regime.sobolev != SobolevRegime::Subcritical)
    throw Error(ErrorCode::InvalidParams, "NLS ground state needs p < (N+2)/(N-2)");
  ShootingConfig cfg;
  cfg.resolution = resolution;
  return solve_ground_state(params, cfg);
}

Profile nls_ground_state(int dim, double p, int resolution) {
  return nls_ground_state_report(dim, p, resolution).u;
}

Profile rescale_profile(const Profile& in, double amp, double scale, std::shared_ptr<const Grid> grid) {
  Profile out;
  out.grid = grid;
  out.values.resize(grid->size());
  out.derivative_values.resize(grid->size());
  for (Eigen::Index i = 0; i < grid->size(); ++i) {
    const auto [val, der] = in.eval(scale * (*grid)[i]);
    out.values(i) = amp * val;
    out.derivative_values(i) = amp * scale * der;
  }
  out.decay = in.decay;
  if (out.decay.kind == DecayKind::Exponential) out.decay.rate *= scale;
  return out;
}

double sup_distance(const Profile& a, const Profile& b, double radius) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size() && a.r(i) <= radius; ++i)
    worst = std::max(worst, std::abs(a.values(i) - b(a.r(i))));
  return worst;
}

}  // namespace qsg
