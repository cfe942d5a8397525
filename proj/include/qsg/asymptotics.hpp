#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsg/grid.hpp"
#include "qsg/params.hpp"
#include "qsg/shooting.hpp"
#include "qsg/spectra.hpp"

namespace qsg {

/// One point of a frequency branch.
struct MassCurvePoint {
  double omega = 0.0;
  std::optional<double> mass;
  std::optional<double> mprime_fd;
  std::optional<double> mprime_resolvent;
  std::optional<double> mprime_dual;
  double dirichlet = 0.0;
  double beta = 0.0;
  double quasi = 0.0;
  double energy = 0.0;
  std::optional<double> m_omega;
  std::optional<double> lambda;  // critical regime only
  SobolevRegime regime = SobolevRegime::Subcritical;

  double height = 0.0;  // v(0)
  double sup_u = 0.0;   // u(0)
  double pohozaev_residual = 0.0;
  double nehari_residual = 0.0;
  std::optional<double> limit_distance;     // sup distance of the rescaled profile to its limit
  std::optional<double> gradient_distance;  // ‖∇(u − u₀)‖ / ‖∇u₀‖, supercritical only
  std::optional<int> negative_count;
  std::optional<double> det_L;
  std::optional<double> matrix_mismatch;
};

MassCurvePoint make_point(const SolveReport& sol, const SpectralReport* spec = nullptr);

enum class FitModel { PurePower, PowerLog };
std::string to_string(FitModel m);

/// y ≈ c ω^a (log 1/ω)^b with b fixed; a and c come from least squares in log-log.
struct FitResult {
  FitModel model = FitModel::PurePower;
  double exponent = 0.0;   // a
  double prefactor = 0.0;  // c
  double log_power = 0.0;  // b
  double r2 = 0.0;
  double omega_min = 0.0;
  double omega_max = 0.0;
  int points = 0;
  double rss = 0.0;
  double aicc = 0.0;
};

/// Throws InsufficientWindow with fewer than three points or nonpositive data.
FitResult fit_power(const std::vector<double>& omega, const std::vector<double>& y,
                    double log_power = 0.0);

/// Corrected Akaike criterion of a Gaussian least-squares fit with k parameters.
double aicc(double rss, int n, int k);

/// Model selection between ω^a and ω^a (log 1/ω)^b for one fixed b.
struct ModelChoice {
  FitResult pure;
  FitResult log_model;
  bool log_preferred = false;
  const FitResult& chosen() const { return log_preferred ? log_model : pure; }
};
ModelChoice select_model(const std::vector<double>& omega, const std::vector<double>& y, double log_power);

/// Relative change of the fitted exponent when the largest-ω third of the window is dropped.
double fit_stability(const std::vector<double>& omega, const std::vector<double>& y, double log_power = 0.0);

/// U(x) = (1 + |x|²/(N(N−2)))^{−(N−2)/2}, W(x) = U(√m_* x).
struct AubinTalenti {
  int dim = 3;
  double m_star = 0.0;

  static AubinTalenti make(int dim);
  double U(double r) const;
  double dU(double r) const;
  double W(double r) const;
  /// Sampled U with its power tail.
  Profile profile(std::shared_ptr<const Grid> grid) const;
  /// sup |ΔU + U^{(N+2)/(N−2)}| over the nodes, from the closed-form Laplacian.
  double equation_residual(const Grid& grid) const;
  /// ∫W^{2*} by quadrature with the analytic tail.
  double w_critical_norm(const Grid& grid) const;
  /// ∫|∇U|².
  double dirichlet() const;
};

/// λ_ω = u(0)^{−2/(N−2)}, so λ^{(N−2)/2} u(λx) equals 1 at the origin.
double extract_lambda(const Profile& u, const Params& params);

/// sup_{|x| ≤ radius} |λ^{(N−2)/2} u(λx) − U(x)|.
double critical_profile_distance(const Profile& u, const Params& params, double radius = 5.0);

/// Correction coefficient ((2(p−1) + 8 − N(p−1)) / (4(p−1))) δ ‖∇Q²‖² of the small-ω mass.
double subcritical_correction_coefficient(int dim, double p, double delta, double grad_q2);
/// Exponents of the leading term ω^a ‖Q‖² and of the correction ω^b.
double subcritical_leading_exponent(int dim, double p);
double subcritical_correction_exponent(int dim, double p);

struct SubcriticalReport {
  std::vector<double> omegas;
  std::vector<double> ratios;            // (M − ω^a ‖Q‖²) / ω^b
  std::vector<double> profile_distance;  // ‖ω^{−1/(p−1)} u_ω(·/√ω) − Q‖_∞
  double q_mass = 0.0;                   // ‖Q‖²
  double grad_q2 = 0.0;                  // ‖∇Q²‖²
  double coefficient = 0.0;              // predicted limit of the ratio
  double extrapolated = 0.0;             // ratio extrapolated to ω = 0
  double relative_error = 0.0;
  bool profile_monotone = false;
  FitResult correction_fit;              // (M − ω^a ‖Q‖²) against ω
};

/// Small-ω mass expansion. M(ω) = ω^a M̃(δ ω^{2/(p−1)}) where M̃(d) is the ω = 1 mass at
/// coupling d, so the ratio is evaluated by paired solves at ω = 1 on a common grid and
/// extrapolated linearly in δ ω^{2/(p−1)}. Throws RegimeMismatch outside the subcritical
/// regime.
SubcriticalReport subcritical_expansion_check(const Params& params, const std::vector<double>& omegas,
                                              int resolution = 4096);

struct CriticalReport {
  FitResult mass;
  FitResult lambda;
  FitResult delta_omega;
  std::optional<ModelChoice> mass_choice;    // N = 4
  std::optional<ModelChoice> lambda_choice;  // N = 4
  std::optional<ModelChoice> delta_choice;   // N = 4
  double mass_stability = 0.0;
  double lambda_stability = 0.0;
  double delta_stability = 0.0;
  bool mprime_negative = false;
  bool mprime_growing = false;
  bool lambda_sqrt_omega_decreasing = false;
  bool distance_monotone = false;
  std::optional<double> smallest_distance;
};

/// Fits over the points with ω ≤ window_max (all points when absent). Throws RegimeMismatch
/// outside the critical regime and InsufficientWindow when fewer than three decades remain.
CriticalReport critical_scaling_report(const std::vector<MassCurvePoint>& branch, const Params& params,
                                       std::optional<double> window_max = std::nullopt);

/// Expected exponents; for N = 4, the log power b of ω^a (log 1/ω)^b.
double critical_mass_exponent(int dim);
double critical_lambda_exponent(int dim);
double critical_delta_exponent(int dim);
double critical_log_power_mass();
double critical_log_power_lambda();
double critical_log_power_delta();

struct SupercriticalReport {
  double u0_mass = 0.0;  // ‖u₀‖², infinite for N ≤ 4
  std::optional<double> extrapolated_mass;
  std::optional<double> mass_relative_error;
  std::optional<double> growth_factor;  // M(ω_min)/M(ω_max), N ≤ 4
  bool omega_mass_monotone = false;     // ωM(ω) ↓ 0
  bool distance_monotone = false;
  bool mprime_negative = false;
  bool mprime_growing = false;
  bool det_negative = false;
  SignWindowInfo window;
};

/// Requires a supercritical branch. `u0` is the ω = 0 solution.
SupercriticalReport supercritical_limit_check(const std::vector<MassCurvePoint>& branch, const SolveReport& u0,
                                              const Params& params);

/// Aitken extrapolation of the last three values of a sequence converging geometrically;
/// falls back to the last value when the differences do not contract.
double aitken_limit(const std::vector<double>& values);

struct EnergyReport {
  double target = 0.0;
  double extrapolated = 0.0;
  double relative_error = 0.0;
  double max_derivative_mismatch = 0.0;  // max |E' + (ω/2)M'| / |E'| at interior points
  int sign_near_zero = 0;                // sign of E at the smallest ω
};

/// d/dω of a branch quantity (ordered by ω) from a stencil in log ω with `max_width` points
/// (3, 5, 7 or 9, fewer on short branches), centered where possible and shifted inward next to
/// the ends; the logarithm of the quantity is differenced when it keeps one sign on the stencil.
/// Throws InsufficientNeighbors at the ends.
double branch_derivative(const std::vector<double>& omega, const std::vector<double>& y, std::size_t i,
                         int max_width = 5);

/// E(ω) limit (0, (1/N)‖∇U‖², or (2/((3N+2)−p(N−2)))‖∇u₀‖²) and E' = −(ω/2)M' along the branch,
/// both derivatives from nine-point stencils (evaluated at points with four neighbors on each
/// side; at every interior point for branches shorter than nine).
/// `u0_dirichlet` is required in the supercritical regime.
EnergyReport energy_limit_check(const std::vector<MassCurvePoint>& branch, const Params& params,
                                std::optional<double> u0_dirichlet = std::nullopt);

}  // namespace qsg
