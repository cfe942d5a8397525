#include "qsg/verify.hpp"

#include <algorithm>
#include <cmath>

#include "qsg/error.hpp"

namespace qsg {

namespace {

Gate at_most(std::string name, double value, double bound) {
  return {std::move(name), value, bound, std::isfinite(value) && value <= bound};
}

Gate at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, std::isfinite(value) && value >= bound};
}

Gate holds(std::string name, bool ok) { return {std::move(name), ok ? 1.0 : 0.0, 1.0, ok}; }

Gate exponent_gate(std::string name, double fitted, double expected, double tol) {
  return {std::move(name), fitted, expected, std::abs(fitted - expected) <= tol};
}

// Expected sign of M' at small ω: increasing up to the mass-critical exponent.
int expected_mprime_sign(const Params& params) {
  const Regime reg = classify(params);
  const bool at_or_below =
      params.exponent_exact ? *params.exponent_exact <= reg.mass_threshold
                            : params.exponent <= reg.mass_threshold.value() + kExponentTolerance;
  return at_or_below ? 1 : -1;
}

std::vector<MassCurvePoint> sweep(const VerifyConfig& cfg, BranchStore& store, const std::optional<Profile>& ref) {
  SweepPlan plan;
  plan.base = cfg.params;
  plan.omegas = cfg.omegas;
  plan.resolution = cfg.resolution;
  plan.spectra = true;
  plan.reference = ref;
  plan.jobs = cfg.jobs;
  store = run_sweep(plan);
  return store.branch();
}

json branch_summary(const BranchStore& store) {
  json failures = json::array();
  for (const auto& rec : store.records())
    if (!rec.ok || !rec.error.empty()) failures.push_back({{"omega", rec.params.freq}, {"error", rec.error}});
  return {{"points", store.size()}, {"failures", failures}};
}

void add_common_gates(VerifyResult& out, const BranchStore& store, const std::vector<MassCurvePoint>& branch) {
  const auto recs = store.records();
  const bool all_ok = std::all_of(recs.begin(), recs.end(), [](const BranchRecord& r) { return r.ok; });
  out.gates.push_back(holds("all ladder points solved", all_ok && !recs.empty()));
  double worst = 0.0;
  for (const auto& pt : branch) worst = std::max({worst, std::abs(pt.pohozaev_residual), std::abs(pt.nehari_residual)});
  out.gates.push_back(at_most("identity residual", worst, 1e-6));
}

void verify_subcritical(const VerifyConfig& cfg, VerifyResult& out) {
  const SubcriticalReport sub = subcritical_expansion_check(cfg.params, cfg.omegas, cfg.resolution);
  const auto branch = sweep(cfg, out.store, std::nullopt);
  add_common_gates(out, out.store, branch);
  out.gates.push_back(at_most("mass correction limit relative error", sub.relative_error, 0.05));
  out.gates.push_back(at_most("M' finite difference vs resolvent", mprime_cross_mismatch(branch), 0.01));

  const int sign = expected_mprime_sign(cfg.params);
  bool sign_ok = false;
  for (const auto& pt : branch)
    if (pt.mprime_fd) sign_ok = (*pt.mprime_fd > 0 ? 1 : -1) == sign;  // smallest ω with a value wins
  out.gates.push_back(holds(sign > 0 ? "M' > 0 near zero" : "M' < 0 near zero", sign_ok));

  const EnergyReport energy = energy_limit_check(branch, cfg.params);
  out.gates.push_back(at_most("E' + (omega/2) M' relative", energy.max_derivative_mismatch, 0.01));
  out.details = {{"subcritical", sub}, {"energy", energy}};
}

void verify_critical(const VerifyConfig& cfg, VerifyResult& out) {
  const int n = cfg.params.dim;
  const auto branch = sweep(cfg, out.store, std::nullopt);
  add_common_gates(out, out.store, branch);
  const CriticalReport crit = critical_scaling_report(branch, cfg.params, cfg.fit_window_max);
  if (n == 4) {
    out.gates.push_back(holds("mass: log-corrected model preferred", crit.mass_choice && crit.mass_choice->log_preferred));
    out.gates.push_back(
        holds("lambda: log-corrected model preferred", crit.lambda_choice && crit.lambda_choice->log_preferred));
  } else {
    out.gates.push_back(exponent_gate("mass exponent", crit.mass.exponent, critical_mass_exponent(n), n == 3 ? 0.04 : 0.02));
    out.gates.push_back(exponent_gate("lambda exponent", crit.lambda.exponent, critical_lambda_exponent(n), 0.02));
    out.gates.push_back(exponent_gate("delta_omega exponent", crit.delta_omega.exponent, critical_delta_exponent(n), 0.05));
  }
  out.gates.push_back(at_most("profile distance to U at smallest omega", crit.smallest_distance.value_or(NAN), 1e-2));
  const EnergyReport energy = energy_limit_check(branch, cfg.params);
  if (n == 3) {
    // The resolvent loses accuracy near the continuum edge for N >= 4 at tiny ω.
    out.gates.push_back(at_most("M' finite difference vs resolvent", mprime_cross_mismatch(branch), 0.01));
    out.gates.push_back(at_most("E' + (omega/2) M' relative", energy.max_derivative_mismatch, 0.01));
  }
  out.details = {{"critical", crit}, {"energy", energy}};
}

void verify_supercritical(const VerifyConfig& cfg, VerifyResult& out) {
  ShootingConfig scfg;
  scfg.resolution = cfg.resolution;
  const SolveReport u0 = solve_ground_state(cfg.params.with_freq(0.0), scfg);
  const auto branch = sweep(cfg, out.store, u0.u);
  add_common_gates(out, out.store, branch);
  const SupercriticalReport sup = supercritical_limit_check(branch, u0, cfg.params);
  if (sup.mass_relative_error)
    out.gates.push_back(at_most("mass limit relative error", *sup.mass_relative_error, 0.02));
  if (sup.growth_factor) out.gates.push_back(at_least("mass growth over two decades", *sup.growth_factor, 3.0));
  out.gates.push_back(holds("omega M decreasing", sup.omega_mass_monotone));
  out.gates.push_back(holds("det L < 0 at every point", sup.det_negative));
  const EnergyReport energy = energy_limit_check(branch, cfg.params, u0.diagnostics.dirichlet);
  if (sup.mass_relative_error) {
    out.gates.push_back(at_most("M' finite difference vs resolvent", mprime_cross_mismatch(branch), 0.01));
    out.gates.push_back(at_most("E' + (omega/2) M' relative", energy.max_derivative_mismatch, 0.01));
    out.gates.push_back(at_most("energy limit relative error", energy.relative_error, 0.03));
  }
  out.details = {{"u0", u0}, {"supercritical", sup}, {"energy", energy}};
}

}  // namespace

void to_json(json& j, const Gate& g) {
  j = json{{"name", g.name}, {"value", g.value}, {"bound", g.bound}, {"pass", g.pass}};
}

bool VerifyResult::passed() const {
  return !gates.empty() && std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

VerifyConfig default_verify_config(const Params& params) {
  VerifyConfig cfg;
  cfg.params = params;
  switch (classify(params).sobolev) {
    case SobolevRegime::Subcritical: cfg.omegas = geometric_ladder(0x1p-6, 0x1p-14, 0.5); break;
    case SobolevRegime::Critical:
      cfg.omegas = geometric_ladder(0x1p-4, 0x1p-40, 0.5);
      cfg.fit_window_max = 0x1p-28;
      break;
    case SobolevRegime::Supercritical: cfg.omegas = geometric_ladder(0x1p-5, 0x1p-28, 0.5); break;
  }
  return cfg;
}

double mprime_cross_mismatch(const std::vector<MassCurvePoint>& branch) {
  double worst = 0.0;
  for (const auto& pt : branch)
    if (pt.mprime_fd && pt.mprime_resolvent)
      worst = std::max(worst, std::abs(*pt.mprime_fd - *pt.mprime_resolvent) / std::abs(*pt.mprime_resolvent));
  return worst;
}

VerifyResult verify_branch(const VerifyConfig& cfg) {
  cfg.params.validate();
  if (cfg.omegas.size() < 3) throw Error(ErrorCode::InvalidParams, "verification needs at least three frequencies");
  for (std::size_t i = 0; i < cfg.omegas.size(); ++i)
    if (!(cfg.omegas[i] > 0) || (i > 0 && !(cfg.omegas[i] < cfg.omegas[i - 1])))
      throw Error(ErrorCode::InvalidParams, "ladder must be positive and strictly decreasing");
  VerifyResult out;
  out.regime = classify(cfg.params).sobolev;
  switch (out.regime) {
    case SobolevRegime::Subcritical: verify_subcritical(cfg, out); break;
    case SobolevRegime::Critical: verify_critical(cfg, out); break;
    case SobolevRegime::Supercritical: verify_supercritical(cfg, out); break;
  }
  out.details["branch"] = branch_summary(out.store);
  out.details["ladder"] = {{"omega_max", cfg.omegas.front()}, {"omega_min", cfg.omegas.back()}, {"points", cfg.omegas.size()}};
  if (cfg.fit_window_max) out.details["ladder"]["fit_window_max"] = *cfg.fit_window_max;
  return out;
}

}  // namespace qsg
