#pragma once

#include <optional>
#include <vector>

#include "qsg/grid.hpp"
#include "qsg/params.hpp"
#include "qsg/quadrature.hpp"

namespace qsg {

/// Scalar functionals of a ground state u (and its dual v = h(u)).
struct ScalarDiagnostics {
  std::optional<double> mass;  // M = ∫u², absent when the tail makes it diverge
  double dirichlet = 0.0;      // T = ∫|∇u|²
  double quasi = 0.0;          // Q_grad = ∫u²|∇u|²
  double potential = 0.0;      // P = ∫u^{p+1}
  double beta = 0.0;           // P / T
  double energy = 0.0;         // ½T + δ Q_grad − P/(p+1)
  std::optional<double> m_omega;
  std::optional<double> m_star;       // critical exponent only
  std::optional<double> delta_omega;  // m_ω − m_*
};

/// 1 / 2* = (N−2) / (2N); zero for N = 2.
inline double inverse_critical_sobolev(int dim) { return (dim - 2.0) / (2.0 * dim); }

double mass(const Profile& u);
double dirichlet(const Profile& u);
double quasi_gradient(const Profile& u);
double potential(const Profile& u, double p);

ScalarDiagnostics compute_diagnostics(const Profile& u, const Profile& v, const Params& params);

/// [(1/2*)T + (2/2*)δQ − P/(p+1) + (ω/2)M] / T.
double pohozaev_residual(const Profile& u, const Params& params);
double pohozaev_residual(const ScalarDiagnostics& d, const Params& params);
/// [½T + 2δQ − ½P + (ω/2)M] / T.
double nehari_residual(const Profile& u, const Params& params);
double nehari_residual(const ScalarDiagnostics& d, const Params& params);
/// |δ Q_grad − ωM/(N−2)| / (δ Q_grad), the closed identity at p = (N+2)/(N−2).
double critical_key_residual(const ScalarDiagnostics& d, const Params& params);
/// |β − 1 − ((N+2)/(N−2)) ωM/T| / β and the companion Q_grad identity (both relative).
double beta_identity_residual(const ScalarDiagnostics& d, const Params& params);
double quasi_identity_residual(const ScalarDiagnostics& d, const Params& params);

/// Best Sobolev constant S_N = π N (N−2) (Γ(N/2)/Γ(N))^{2/N}.
double m_star(int dim);

/// Result of the variational level computation with its Pohozaev cross-check.
struct LevelResult {
  double m_omega = 0.0;
  double gradient_norm = 0.0;  // ∫|∇v|²
  double potential_term = 0.0; // 2*·∫F_ω(v)
  double crosscheck = 0.0;     // relative mismatch of the two
};

/// m_ω = (2* ∫F_ω(v))^{2/N}; throws ConstraintViolated if ∫|∇v|² ≠ 2*∫F_ω(v) to `tolerance`.
LevelResult level_m_omega(const Profile& v, const Params& params, double tolerance = 1e-6);

/// |u(x)| ≤ (N/|S^{N−1}|)^{1/s} ‖u‖_{L^s} |x|^{−N/s} at every positive node; false if u is not
/// radially nonincreasing.
bool radial_decay_check(const Profile& u, double s);

/// Empirical constant C in ‖w‖_{L^{q/2}} ≤ C ‖∇w‖_{L²}^θ ‖w‖_{L^{s/2}}^{1−θ} for w = u²,
/// with θ fixed by dilation invariance: θ = 4N(q−s) / (q(4N − (N−2)s)).
struct GnResult {
  double theta = 0.0;
  double constant = 0.0;
};
GnResult gn_constant(const Profile& u, double q, double s);
/// True when every fitted constant is finite and at most `growth` times the family median.
bool gn_check(const std::vector<Profile>& family, double q, double s, double growth = 10.0);

/// Given ‖z_ω‖_∞ ordered by decreasing ω: finite and non-increasing after `skip` transients.
bool moser_bound_check(const std::vector<double>& sup_norms, std::size_t skip = 0,
                       double slack = 1e-9);

}  // namespace qsg
