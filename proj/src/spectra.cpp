#include "qsg/spectra.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

#include "qsg/dual_transform.hpp"
#include "qsg/quadrature.hpp"

namespace qsg {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::LPlus: return "L+";
    case OperatorKind::LMinus: return "L-";
    case OperatorKind::Dual: return "dual";
  }
  return "?";
}

std::string to_string(SignWindow w) {
  return w == SignWindow::GuaranteedNegative ? "GuaranteedNegative" : "Inconclusive";
}

namespace {

double weight_at(const DiscreteOperator& op, Eigen::Index i) {
  return op.weight.size() ? op.volume(i) * op.weight(i) : op.volume(i);
}

}  // namespace

Eigen::VectorXd DiscreteOperator::apply_form(const Eigen::VectorXd& x) const {
  const Eigen::Index n = size();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = diag(i) * x(i);
    if (i > 0) s += off(i - 1) * x(i - 1);
    if (i + 1 < n) s += off(i) * x(i + 1);
    y(i) = s;
  }
  return y;
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& x) const {
  return apply_form(x).cwiseQuotient(volume);
}

Eigen::VectorXd DiscreteOperator::apply_nodal(const Eigen::VectorXd& nodal) const {
  Eigen::VectorXd y = apply_form(restrict(nodal));
  if (size() > 0) y(size() - 1) += boundary * nodal(first + size());
  return y.cwiseQuotient(volume);
}

double DiscreteOperator::dot(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return (volume.array() * x.array() * y.array()).sum();
}

Eigen::VectorXd DiscreteOperator::solve(const Eigen::VectorXd& rhs, double shift) const {
  // Thomas algorithm on the symmetric tridiagonal K − σ B_w.
  const Eigen::Index n = size();
  Eigen::VectorXd c(n), d(n), x(n);
  // Pivots are compared with the row they came from: volumes span many orders of magnitude
  // on the geometric tail, so a global scale would flag small rows near the origin.
  auto check = [&](double p, double local) {
    if (std::abs(p) <= 1e-14 * local)
      throw Error(ErrorCode::NearSingular, "zero pivot in banded solve; operator is (near) singular");
  };
  double pivot = diag(0) - shift * weight_at(*this, 0);
  check(pivot, std::abs(diag(0)) + std::abs(shift * weight_at(*this, 0)));
  c(0) = n > 1 ? off(0) / pivot : 0.0;
  d(0) = volume(0) * rhs(0) / pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double coupling = off(i - 1) * c(i - 1);
    pivot = diag(i) - shift * weight_at(*this, i) - coupling;
    check(pivot, std::abs(diag(i)) + std::abs(shift * weight_at(*this, i)) + std::abs(coupling));
    c(i) = i + 1 < n ? off(i) / pivot : 0.0;
    d(i) = (volume(i) * rhs(i) - off(i - 1) * d(i - 1)) / pivot;
  }
  x(n - 1) = d(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
  return x;
}

DiscreteOperator assemble(const SolveReport& sol, OperatorKind kind, int sector) {
  const Params& prm = sol.params;
  const int n = prm.dim;
  const auto& grid = *sol.u.grid;
  const auto& x = grid.nodes;
  const Eigen::Index m = grid.intervals();
  const double delta = prm.coupling, omega = prm.freq, p = prm.exponent;
  const DualNonlinearity<double> nl(prm);

  DiscreteOperator op;
  op.grid = sol.u.grid;
  op.kind = kind;
  op.sector = sector;
  op.dim = n;
  op.first = sector == 0 ? 0 : 1;
  const Eigen::Index size = m - op.first;
  op.diag.resize(size);
  op.off = Eigen::VectorXd::Zero(std::max<Eigen::Index>(size - 1, 0));
  op.volume.resize(size);
  op.potential.resize(size);

  auto face = [&](Eigen::Index i) { return 0.5 * (x(i) + x(i + 1)); };  // r_{i+1/2}
  auto coefficient = [&](double r) {
    if (kind != OperatorKind::LPlus) return 1.0;
    const double uu = sol.u(r);
    return 1.0 + 2.0 * delta * uu * uu;
  };
  auto flux = [&](Eigen::Index i) {  // c_{i+1/2}
    const double rf = face(i);
    return std::pow(rf, n - 1) * coefficient(rf) / (x(i + 1) - x(i));
  };
  const double angular = sector * (sector + n - 2.0);

  for (Eigen::Index k = 0; k < size; ++k) {
    const Eigen::Index i = k + op.first;
    const double left = i == 0 ? 0.0 : face(i - 1);
    const double right = face(i);
    const double vol = (std::pow(right, n) - std::pow(left, n)) / n;
    const double uu = sol.u.values(i), du = sol.u.derivative_values(i);
    const double a = 1.0 + 2.0 * delta * uu * uu;
    const double lap = (omega * uu - std::pow(uu, p) - 2.0 * delta * uu * du * du) / a;
    double pot = 0.0, a_node = 1.0;
    switch (kind) {
      case OperatorKind::LPlus:
        pot = -delta * (4.0 * uu * lap + 2.0 * du * du) - p * std::pow(uu, p - 1.0) + omega;
        a_node = a;
        break;
      case OperatorKind::LMinus:
        pot = -delta * (2.0 * uu * lap + 2.0 * du * du) - std::pow(uu, p - 1.0) + omega;
        break;
      case OperatorKind::Dual:
        pot = -nl.f_prime(sol.v.values(i));
        break;
    }
    op.potential(k) = pot;
    op.volume(k) = vol;
    double dk = vol * pot + flux(i);
    if (angular > 0) {
      // ∫ r^{N−3} (r/r_i)^ℓ dr over the cell: exact for the r^ℓ behaviour at the origin, so
      // the centrifugal term stays second order there.
      const double e = n - 2.0 + sector;
      const double moment = (std::pow(right, e) - std::pow(left, e)) / (e * std::pow(x(i), sector));
      dk += a_node * angular * moment;
    }
    if (i > 0) dk += flux(i - 1);
    op.diag(k) = dk;
    if (k + 1 < size) op.off(k) = -flux(i);
  }
  if (size > 0) op.boundary = -flux(m - 1);
  if (kind == OperatorKind::Dual) {
    // Generalized weight r'(v)² relating the dual spectrum to that of L₊.
    op.weight.resize(size);
    for (Eigen::Index k = 0; k < size; ++k) {
      const double rp = r_prime_from(sol.u.values(k + op.first), nl.ctx);
      op.weight(k) = rp * rp;
    }
  }
  return op;
}

int negative_count(const DiscreteOperator& op, double shift) {
  int count = 0;
  double pivot = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (Eigen::Index i = 0; i < op.size(); ++i) {
    const double coupling = i > 0 ? op.off(i - 1) * op.off(i - 1) / pivot : 0.0;
    pivot = op.diag(i) - shift * weight_at(op, i) - coupling;
    if (pivot == 0.0) pivot = -tiny;
    if (pivot < 0.0) ++count;
  }
  return count;
}

Eigen::VectorXd low_spectrum(const DiscreteOperator& op, int k) {
  // Gershgorin bounds for B_w^{-1/2} K B_w^{-1/2}.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < op.size(); ++i) {
    const double wi = weight_at(op, i);
    double radius = 0.0;
    if (i > 0) radius += std::abs(op.off(i - 1)) / std::sqrt(wi * weight_at(op, i - 1));
    if (i + 1 < op.size()) radius += std::abs(op.off(i)) / std::sqrt(wi * weight_at(op, i + 1));
    lo = std::min(lo, op.diag(i) / wi - radius);
    hi = std::max(hi, op.diag(i) / wi + radius);
  }
  k = std::min<int>(k, static_cast<int>(op.size()));
  Eigen::VectorXd out(k);
  for (int j = 0; j < k; ++j) {
    double a = j > 0 ? out(j - 1) : lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      (negative_count(op, mid) > j ? b : a) = mid;
    }
    out(j) = 0.5 * (a + b);
  }
  return out;
}

Eigen::VectorXd eigenvector(const DiscreteOperator& op, double lambda) {
  const double scale = std::abs(lambda) + 1.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double shift = lambda + scale * 1e-10 * (1 + attempt) * (attempt % 2 ? -1 : 1);
    try {
      Eigen::VectorXd x = Eigen::VectorXd::Ones(op.size());
      for (int it = 0; it < 4; ++it) {
        Eigen::VectorXd rhs = x;
        if (op.weight.size()) rhs = rhs.cwiseProduct(op.weight);
        x = op.solve(rhs, shift);
        const double norm = std::sqrt(op.dot(x, op.weight.size() ? Eigen::VectorXd(x.cwiseProduct(op.weight)) : x));
        x /= norm;
      }
      if (x(0) < 0) x = -x;
      return x;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NearSingular) throw;
    }
  }
  throw Error(ErrorCode::SingularShift, "inverse iteration hit a singular shift repeatedly");
}

double cosine(const DiscreteOperator& op, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return std::abs(op.dot(x, y)) / std::sqrt(op.dot(x, x) * op.dot(y, y));
}

Eigen::VectorXd omega_derivative(const SolveReport& sol) {
  const DiscreteOperator op = assemble(sol, OperatorKind::LPlus, 0);
  const Eigen::VectorXd w = op.solve(-op.restrict(sol.u.values));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sol.u.size());
  out.head(w.size()) = w;
  return out;
}

double mprime_resolvent(const SolveReport& sol) {
  const DiscreteOperator op = assemble(sol, OperatorKind::LPlus, 0);
  const Eigen::VectorXd u = op.restrict(sol.u.values);
  const Eigen::VectorXd w = op.solve(-u);
  return 2.0 * sphere_area(op.dim) * op.dot(u, w);
}

double mprime_dual(const SolveReport& sol) {
  const DiscreteOperator op = assemble(sol, OperatorKind::Dual, 0);
  const TransformContext<double> ctx(sol.params.coupling);
  Eigen::VectorXd eta(op.size());
  for (Eigen::Index k = 0; k < op.size(); ++k) {
    const double uu = sol.u.values(k + op.first);
    eta(k) = uu * r_prime_from(uu, ctx);
  }
  const Eigen::VectorXd psi = op.solve(-eta);
  return 2.0 * sphere_area(op.dim) * op.dot(eta, psi);
}

Eigen::Matrix3d matrix_L_closed(const ScalarDiagnostics& d, const Params& params, double mprime) {
  const double n = params.dim, p = params.exponent, delta = params.coupling;
  if (!d.mass) throw Error(ErrorCode::Divergent, "matrix L needs a finite mass");
  const double m = *d.mass, q = d.quasi, pp = d.potential, w = params.freq;
  Eigen::Matrix3d l;
  l(0, 0) = -0.5 * mprime;
  l(0, 1) = -m;
  l(0, 2) = 0.0;
  l(1, 1) = 8.0 * delta * q - (p - 1.0) * pp;
  l(1, 2) = 4.0 * delta * n * q + (2.0 + 0.5 * n * (1.0 - p)) * pp - 2.0 * w * m;
  l(2, 2) = 2.0 * delta * n * (1.0 + 0.5 * n) * q +
            0.5 * n * (p - 1.0) / (p + 1.0) * (2.0 + 0.5 * n * (1.0 - p)) * pp;
  l(1, 0) = l(0, 1);
  l(2, 0) = l(0, 2);
  l(2, 1) = l(1, 2);
  return l;
}

MatrixL matrix_L(const SolveReport& sol, double mprime, double tolerance) {
  MatrixL out;
  out.closed = matrix_L_closed(sol.diagnostics, sol.params, mprime);
  const DiscreteOperator op = assemble(sol, OperatorKind::LPlus, 0);
  const auto& x = sol.u.grid->nodes;
  const double n = sol.params.dim;
  std::array<Eigen::VectorXd, 3> basis;
  basis[1] = op.restrict(sol.u.values);
  basis[0] = op.solve(-basis[1]);
  basis[2] = op.restrict((x.array() * sol.u.derivative_values.array() + 0.5 * n * sol.u.values.array()).matrix());
  const double area = sphere_area(sol.params.dim);
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd li = op.apply_form(basis[i]);
    for (int j = 0; j < 3; ++j) out.direct(j, i) = area * basis[j].dot(li);
  }
  out.direct = 0.5 * (out.direct + out.direct.transpose()).eval();
  out.det_closed = out.closed.determinant();
  out.det_direct = out.direct.determinant();
  out.max_mismatch = (out.closed - out.direct).cwiseAbs().maxCoeff() / out.closed.cwiseAbs().maxCoeff();
  if (out.max_mismatch > tolerance)
    throw Error(ErrorCode::EntryMismatch,
                "closed-form and discrete matrix entries differ by " + std::to_string(out.max_mismatch));
  return out;
}

SignWindowInfo mprime_sign_window(int dim, double p) {
  SignWindowInfo info;
  const double n = dim;
  info.p_star = 2.0 * (n + 2.0) / n;
  auto c = [&](double q) {
    return (q - 1.0) * (n + 2.0 - 0.5 * n * (q - 1.0)) - 2.0 * ((3.0 * n + 2.0) / (n - 2.0) - q);
  };
  info.c_at_p_star = c(info.p_star);
  if (info.c_at_p_star > 0) {
    const double half = std::sqrt(2.0 / n * info.c_at_p_star);
    info.p_minus = info.p_star - half;
    info.p_plus = info.p_star + half;
  }
  const bool inside = info.p_minus && p >= *info.p_minus && p <= *info.p_plus;
  const bool stable_side = p >= 3.0 + 4.0 / n;
  info.verdict = (dim <= 5 || !inside || stable_side) ? SignWindow::GuaranteedNegative : SignWindow::Inconclusive;
  return info;
}

SpectralReport spectral_report(const SolveReport& sol, int count, bool with_matrix) {
  SpectralReport rep;
  const Params& prm = sol.params;
  std::array<DiscreteOperator, 2> lp{assemble(sol, OperatorKind::LPlus, 0), assemble(sol, OperatorKind::LPlus, 1)};
  std::array<DiscreteOperator, 2> lm{assemble(sol, OperatorKind::LMinus, 0), assemble(sol, OperatorKind::LMinus, 1)};
  for (int l = 0; l < 2; ++l) {
    rep.sectors[l].lplus = low_spectrum(lp[l], count);
    rep.sectors[l].lminus = low_spectrum(lm[l], count);
  }
  // Scale of the potentials; kernel eigenvalues are O(h²) relative to it.
  rep.potential_sup = std::max(lp[0].potential.cwiseAbs().maxCoeff() - prm.freq, prm.freq);
  const double h = sol.u.grid->core_step;
  rep.kernel_tolerance = std::max(1e-6, 10.0 * h * h) * rep.potential_sup;

  // Residuals of the sampled functions themselves, so exp(−√ω R_max) tails are not truncated.
  const Eigen::VectorXd u0 = lm[0].restrict(sol.u.values);
  const Eigen::VectorXd lm_u = lm[0].apply_nodal(sol.u.values);
  rep.lminus_kernel_residual = std::sqrt(lm[0].dot(lm_u, lm_u) / lm[0].dot(u0, u0));
  const Eigen::VectorXd du = lp[1].restrict(sol.u.derivative_values);
  const Eigen::VectorXd lp_du = lp[1].apply_nodal(sol.u.derivative_values);
  rep.lplus_kernel_residual = std::sqrt(lp[1].dot(lp_du, lp_du) / lp[1].dot(du, du));
  rep.lminus_kernel_cosine = cosine(lm[0], eigenvector(lm[0], rep.sectors[0].lminus(0)), u0);
  rep.lplus_kernel_cosine = cosine(lp[1], eigenvector(lp[1], rep.sectors[1].lplus(0)), du);

  rep.negative_count_lplus =
      negative_count(lp[0], -rep.kernel_tolerance) + negative_count(lp[1], -rep.kernel_tolerance);

  if (prm.freq > 0 && sol.diagnostics.mass) {
    rep.mprime_resolvent = mprime_resolvent(sol);
    rep.mprime_dual = mprime_dual(sol);
    if (with_matrix) rep.matrix = matrix_L(sol, rep.mprime_resolvent, std::numeric_limits<double>::infinity());
  }
  return rep;
}

}  // namespace qsg
