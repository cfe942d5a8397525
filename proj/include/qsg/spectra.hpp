#pragma once

#include <Eigen/Core>
#include <array>
#include <memory>
#include <optional>

#include "qsg/grid.hpp"
#include "qsg/shooting.hpp"

namespace qsg {

enum class OperatorKind {
  LPlus,   // −∇·((1+2δu²)∇) − δ(4uΔu + 2|∇u|²) − p u^{p−1} + ω
  LMinus,  // −Δ − δ(2uΔu + 2|∇u|²) − u^{p−1} + ω
  Dual,    // −Δ − f_ω'(v)
};

std::string to_string(OperatorKind kind);

/// Finite-volume discretization K w = λ B w of a radial operator in angular sector ℓ.
/// Unknowns live on nodes [first, M) of the grid: first = 0 (Neumann at the origin) for ℓ = 0,
/// first = 1 (Dirichlet) for ℓ ≥ 1; Dirichlet at R_max. K is symmetric tridiagonal, B diagonal
/// (control-volume measure ∫ r^{N−1} dr).
struct DiscreteOperator {
  std::shared_ptr<const Grid> grid;
  OperatorKind kind = OperatorKind::LPlus;
  int sector = 0;
  int dim = 3;
  Eigen::Index first = 0;
  Eigen::VectorXd diag;       // K_ii
  Eigen::VectorXd off;        // K_{i,i+1}
  Eigen::VectorXd volume;     // B_ii
  Eigen::VectorXd potential;  // zeroth-order coefficient at the unknown nodes
  double boundary = 0.0;      // coupling of the last unknown to the node at R_max

  Eigen::Index size() const { return diag.size(); }
  /// Restriction of node values to the unknowns.
  Eigen::VectorXd restrict(const Eigen::VectorXd& nodal) const { return nodal.segment(first, size()); }
  /// K x.
  Eigen::VectorXd apply_form(const Eigen::VectorXd& x) const;
  /// B^{-1} K x, the pointwise operator action.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// B^{-1} K applied to node values, with the value at R_max entering as boundary data
  /// instead of being truncated to zero.
  Eigen::VectorXd apply_nodal(const Eigen::VectorXd& nodal) const;
  /// ⟨x, y⟩ = Σ B_i x_i y_i (the r^{N−1} inner product without the sphere factor).
  double dot(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  /// Solves (K − σ B_w) x = B rhs, where B_w = B · weight (weight defaults to 1).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double shift = 0.0) const;
  /// Optional generalized-eigenproblem weight (r'(v)² for the dual operator); empty = 1.
  Eigen::VectorXd weight;
};

/// Assembles L₊, L₋ or the dual operator around a solved ground state.
DiscreteOperator assemble(const SolveReport& sol, OperatorKind kind, int sector);

/// Number of eigenvalues of K w = λ B w below `shift` (Sturm count of the LDLᵀ pivots).
int negative_count(const DiscreteOperator& op, double shift = 0.0);

/// The k smallest eigenvalues, by Sturm bisection.
Eigen::VectorXd low_spectrum(const DiscreteOperator& op, int k);

/// Eigenvector (B-normalized, on the unknowns) for an eigenvalue by shifted inverse iteration.
/// Throws SingularShift if the shifted matrix has a zero pivot after jittering.
Eigen::VectorXd eigenvector(const DiscreteOperator& op, double lambda);

/// |cos| of the angle between x and y in the B inner product.
double cosine(const DiscreteOperator& op, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// M'(ω) = 2⟨u, w⟩ with L₊ w = −u in the radial sector (the sphere factor included).
double mprime_resolvent(const SolveReport& sol);
/// M'(ω) = 2⟨η, ψ⟩ with (−Δ − f_ω'(v)) ψ = −η, η = r(v) r'(v).
double mprime_dual(const SolveReport& sol);
/// ∂_ω u from the resolvent solve, on all grid nodes (zero at R_max).
Eigen::VectorXd omega_derivative(const SolveReport& sol);

struct MatrixL {
  Eigen::Matrix3d closed;  // closed-form entries from the scalar diagnostics
  Eigen::Matrix3d direct;  // discrete quadratic forms ⟨x_i, L₊ x_j⟩
  double det_closed = 0.0;
  double det_direct = 0.0;
  double max_mismatch = 0.0;  // max |closed − direct| / max|closed| over the entries
};

/// 3×3 matrix of L₊ on span{∂_ω u, u, x·∇u + (N/2)u}. Throws EntryMismatch when the closed
/// forms and the discrete forms differ by more than `tolerance` (relative to the largest entry).
MatrixL matrix_L(const SolveReport& sol, double mprime, double tolerance = 1e-2);

/// Closed-form entries only.
Eigen::Matrix3d matrix_L_closed(const ScalarDiagnostics& d, const Params& params, double mprime);

enum class SignWindow { GuaranteedNegative, Inconclusive };
std::string to_string(SignWindow w);

struct SignWindowInfo {
  SignWindow verdict = SignWindow::GuaranteedNegative;
  double c_at_p_star = 0.0;
  double p_star = 0.0;
  std::optional<double> p_minus, p_plus;
};

/// Whether the determinant argument forces M' < 0 as ω → 0 in the supercritical regime.
SignWindowInfo mprime_sign_window(int dim, double p);

struct SectorSpectrum {
  Eigen::VectorXd lplus;
  Eigen::VectorXd lminus;
};

struct SpectralReport {
  std::array<SectorSpectrum, 2> sectors;  // ℓ = 0, 1
  int negative_count_lplus = 0;           // over ℓ ∈ {0, 1}, zero modes excluded
  double kernel_tolerance = 0.0;
  double lminus_kernel_residual = 0.0;  // ‖L₋u‖/‖u‖
  double lplus_kernel_residual = 0.0;   // ‖L₊u'‖/‖u'‖ in ℓ = 1
  double lminus_kernel_cosine = 0.0;
  double lplus_kernel_cosine = 0.0;
  double potential_sup = 0.0;  // ‖p u^{p−1} + δ(...)‖_∞ scale for kernel tolerances
  double mprime_resolvent = 0.0;
  double mprime_dual = 0.0;
  std::optional<MatrixL> matrix;
};

/// Spectral analysis of a solved ground state. The kernel eigenvalues of L₋ (ℓ = 0) and L₊
/// (ℓ = 1) are excluded from the negative count when |λ| ≤ kernel_tolerance.
SpectralReport spectral_report(const SolveReport& sol, int count = 6, bool with_matrix = true);

}  // namespace qsg
