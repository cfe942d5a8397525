#pragma once

#include <optional>
#include <utility>

#include "qsg/dual_transform.hpp"
#include "qsg/grid.hpp"
#include "qsg/identities.hpp"
#include "qsg/params.hpp"

namespace qsg {

struct ShootingConfig {
  double bisection_tolerance = 1e-13;  // relative width of the final bracket on v(0)
  double rtol = 1e-11;
  double atol = 1e-13;
  std::optional<double> a_lo;  // undershooting height, default s*
  std::optional<double> a_hi;  // overshooting height, default 10 s*
  int resolution = 4096;
  /// Grid cells per core length sqrt(N v(0) / |f(v(0))|); the resolution is doubled until met.
  double core_cells = 8.0;
  /// Relative gap between the bracketing trajectories at which the fitted tail takes over.
  double splice_gap = 1e-7;
  int max_bisections = 200;
  /// Reject the solve when an identity residual exceeds this.
  std::optional<double> residual_gate;
};

enum class Trajectory { Overshoot, Undershoot, Converging };

std::string to_string(Trajectory t);

/// Integration state of the radial ODE  v'' + ((N−1)/r) v' + f_ω(v) = 0.
struct ShootState {
  double r = 0.0;
  double v = 0.0;
  double dv = 0.0;
};

/// Leading series (v, v') at r0: v = a + c2 r0² + c4 r0⁴,
/// c2 = −f(a)/(2N), c4 = f(a) f'(a) / (8N(N+2)).
std::pair<double, double> series_start(double a, const Params& params, double r0);

/// Dichotomy of a trajectory from its current state: v < 0 overshoots, v' > 0 with v > 0
/// undershoots, anything else is still converging.
Trajectory classify_trajectory(const ShootState& state);

/// Classification of a trajectory that reached `r_max` without an event, from the sign of the
/// growing component of the linearized tail (Bessel I for ω > 0, the constant mode for ω = 0).
Trajectory classify_at_boundary(const ShootState& state, const Params& params);

struct SolveReport {
  Params params;
  Profile v;
  Profile u;
  double shooting_height = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double splice_radius = 0.0;
  double ode_residual = 0.0;
  double quasilinear_residual = 0.0;  // radial form of the quasilinear equation, relative
  double pohozaev_residual = 0.0;
  double nehari_residual = 0.0;
  std::optional<double> m_omega;  // N ≥ 3
  ScalarDiagnostics diagnostics;
  int iterations = 0;
};

/// Positive radial decreasing solution of −Δv = f_ω(v); u = r(v).
SolveReport solve_ground_state(const Params& params, const ShootingConfig& cfg = {});

/// Integrates a single trajectory from height `a` and reports how it ends.
Trajectory shoot(double a, const Params& params, const ShootingConfig& cfg, double r_max);

/// δ = 0, ω = 1 ground state Q of ΔQ − Q + |Q|^{p−1}Q = 0.
Profile nls_ground_state(int dim, double p, int resolution = 4096);
SolveReport nls_ground_state_report(int dim, double p, int resolution = 4096);

/// Rescales a profile by value·amp and argument·scale: out(x) = amp · in(scale·x), sampled
/// on `grid`.
Profile rescale_profile(const Profile& in, double amp, double scale,
                        std::shared_ptr<const Grid> grid);

/// Sup-norm distance between two profiles evaluated on the nodes of `a` with r ≤ radius.
double sup_distance(const Profile& a, const Profile& b, double radius);

/// ODE residual sup_i |−v'' − ((N−1)/r)v' − f_ω(v)| on interior nodes, with v'' from
/// fourth-order differences of the stored derivative.
double ode_residual(const Profile& v, const Params& params);

/// Relative residual of the radial quasilinear equation for u.
double quasilinear_residual(const Profile& u, const Params& params);

}  // namespace qsg
