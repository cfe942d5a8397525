#include "qsg/io.hpp"

#include <fstream>

namespace qsg {

namespace {

template <typename T>
json opt(const std::optional<T>& x) {
  return x ? json(*x) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

SobolevRegime parse_sobolev(const std::string& s) {
  for (auto r : {SobolevRegime::Subcritical, SobolevRegime::Critical, SobolevRegime::Supercritical})
    if (to_string(r) == s) return r;
  throw Error(ErrorCode::Io, "unknown regime tag " + s);
}

}  // namespace

void to_json(json& j, const Params& p) {
  j = json{{"dim", p.dim}, {"p", p.exponent}, {"delta", p.coupling}, {"omega", p.freq}};
  j["p_exact"] = p.exponent_exact ? json(to_string(*p.exponent_exact)) : json(nullptr);
}

void from_json(const json& j, Params& p) {
  const int dim = j.at("dim").get<int>();
  const double delta = j.at("delta").get<double>(), omega = j.at("omega").get<double>();
  if (auto exact = get_opt<std::string>(j, "p_exact")) {
    if (auto q = parse_rational(*exact)) {
      p = Params::make(dim, *q, delta, omega);
      return;
    }
  }
  p = Params::make(dim, j.at("p").get<double>(), delta, omega);
}

void to_json(json& j, const ScalarDiagnostics& d) {
  j = json{{"mass", opt(d.mass)},           {"dirichlet", d.dirichlet}, {"quasi_gradient", d.quasi},
           {"potential", d.potential},      {"beta", d.beta},           {"energy", d.energy},
           {"m_omega", opt(d.m_omega)},     {"m_star", opt(d.m_star)},  {"delta_omega", opt(d.delta_omega)}};
}

void to_json(json& j, const SolveReport& r) {
  const Regime reg = classify(r.params);
  j = json{{"params", r.params},
           {"regime", {{"sobolev", to_string(reg.sobolev)}, {"mass", to_string(reg.mass)}}},
           {"resolution", r.v.grid->intervals()},
           {"r_max", r.v.grid->r_max()},
           {"shooting_height", r.shooting_height},
           {"bracket", {r.bracket_lo, r.bracket_hi}},
           {"bisections", r.iterations},
           {"splice_radius", r.splice_radius},
           {"u0", r.u.values(0)},
           {"residuals",
            {{"ode", r.ode_residual},
             {"quasilinear", r.quasilinear_residual},
             {"pohozaev", r.pohozaev_residual},
             {"nehari", r.nehari_residual}}},
           {"diagnostics", r.diagnostics}};
}

void to_json(json& j, const SpectralReport& r) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j = json{{"sectors",
            json::array({{{"l", 0}, {"lplus", vec(r.sectors[0].lplus)}, {"lminus", vec(r.sectors[0].lminus)}},
                         {{"l", 1}, {"lplus", vec(r.sectors[1].lplus)}, {"lminus", vec(r.sectors[1].lminus)}}})},
           {"negative_count_lplus", r.negative_count_lplus},
           {"kernel_tolerance", r.kernel_tolerance},
           {"lminus_kernel_residual", r.lminus_kernel_residual},
           {"lplus_kernel_residual", r.lplus_kernel_residual},
           {"lminus_kernel_cosine", r.lminus_kernel_cosine},
           {"lplus_kernel_cosine", r.lplus_kernel_cosine},
           {"potential_sup", r.potential_sup},
           {"mprime_resolvent", r.mprime_resolvent},
           {"mprime_dual", r.mprime_dual}};
  if (r.matrix) {
    auto mat = [](const Eigen::Matrix3d& m) {
      json rows = json::array();
      for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
      return rows;
    };
    j["matrix_L"] = json{{"closed", mat(r.matrix->closed)},
                         {"direct", mat(r.matrix->direct)},
                         {"det_closed", r.matrix->det_closed},
                         {"det_direct", r.matrix->det_direct},
                         {"max_mismatch", r.matrix->max_mismatch}};
  } else {
    j["matrix_L"] = nullptr;
  }
}

void to_json(json& j, const MassCurvePoint& pt) {
  j = json{{"omega", pt.omega},
           {"M", opt(pt.mass)},
           {"Mprime_fd", opt(pt.mprime_fd)},
           {"Mprime_res", opt(pt.mprime_resolvent)},
           {"Mprime_dual", opt(pt.mprime_dual)},
           {"T", pt.dirichlet},
           {"beta", pt.beta},
           {"Qgrad", pt.quasi},
           {"E", pt.energy},
           {"m_omega", opt(pt.m_omega)},
           {"lambda", opt(pt.lambda)},
           {"regime", to_string(pt.regime)},
           {"height", pt.height},
           {"u0", pt.sup_u},
           {"pohozaev_residual", pt.pohozaev_residual},
           {"nehari_residual", pt.nehari_residual},
           {"limit_distance", opt(pt.limit_distance)},
           {"gradient_distance", opt(pt.gradient_distance)},
           {"negative_count", opt(pt.negative_count)},
           {"det_L", opt(pt.det_L)},
           {"matrix_mismatch", opt(pt.matrix_mismatch)}};
}

void from_json(const json& j, MassCurvePoint& pt) {
  pt.omega = j.at("omega").get<double>();
  pt.mass = get_opt<double>(j, "M");
  pt.mprime_fd = get_opt<double>(j, "Mprime_fd");
  pt.mprime_resolvent = get_opt<double>(j, "Mprime_res");
  pt.mprime_dual = get_opt<double>(j, "Mprime_dual");
  pt.dirichlet = j.at("T").get<double>();
  pt.beta = j.at("beta").get<double>();
  pt.quasi = j.at("Qgrad").get<double>();
  pt.energy = j.at("E").get<double>();
  pt.m_omega = get_opt<double>(j, "m_omega");
  pt.lambda = get_opt<double>(j, "lambda");
  pt.regime = parse_sobolev(j.at("regime").get<std::string>());
  pt.height = j.at("height").get<double>();
  pt.sup_u = j.at("u0").get<double>();
  pt.pohozaev_residual = j.at("pohozaev_residual").get<double>();
  pt.nehari_residual = j.at("nehari_residual").get<double>();
  pt.limit_distance = get_opt<double>(j, "limit_distance");
  pt.gradient_distance = get_opt<double>(j, "gradient_distance");
  pt.negative_count = get_opt<int>(j, "negative_count");
  pt.det_L = get_opt<double>(j, "det_L");
  pt.matrix_mismatch = get_opt<double>(j, "matrix_mismatch");
}

void to_json(json& j, const FitResult& f) {
  j = json{{"model", to_string(f.model)}, {"exponent", f.exponent},   {"prefactor", f.prefactor},
           {"log_power", f.log_power},    {"r2", f.r2},               {"omega_window", {f.omega_min, f.omega_max}},
           {"points", f.points},          {"rss", f.rss},             {"aicc", f.aicc}};
}

void to_json(json& j, const ModelChoice& m) {
  j = json{{"pure", m.pure}, {"log", m.log_model}, {"log_preferred", m.log_preferred}};
}

void to_json(json& j, const SubcriticalReport& r) {
  j = json{{"omegas", r.omegas},
           {"ratios", r.ratios},
           {"profile_distance", r.profile_distance},
           {"q_mass", r.q_mass},
           {"grad_q2", r.grad_q2},
           {"coefficient", r.coefficient},
           {"extrapolated", r.extrapolated},
           {"relative_error", r.relative_error},
           {"profile_monotone", r.profile_monotone},
           {"correction_fit", r.correction_fit}};
}

void to_json(json& j, const CriticalReport& r) {
  j = json{{"mass", r.mass},
           {"lambda", r.lambda},
           {"delta_omega", r.delta_omega},
           {"mass_choice", opt(r.mass_choice)},
           {"lambda_choice", opt(r.lambda_choice)},
           {"delta_choice", opt(r.delta_choice)},
           {"stability", {{"mass", r.mass_stability}, {"lambda", r.lambda_stability}, {"delta_omega", r.delta_stability}}},
           {"mprime_negative", r.mprime_negative},
           {"mprime_growing", r.mprime_growing},
           {"lambda_sqrt_omega_decreasing", r.lambda_sqrt_omega_decreasing},
           {"distance_monotone", r.distance_monotone},
           {"smallest_distance", opt(r.smallest_distance)}};
}

void to_json(json& j, const SignWindowInfo& w) {
  j = json{{"verdict", to_string(w.verdict)},
           {"p_star", w.p_star},
           {"c_at_p_star", w.c_at_p_star},
           {"p_minus", opt(w.p_minus)},
           {"p_plus", opt(w.p_plus)}};
}

void to_json(json& j, const SupercriticalReport& r) {
  j = json{{"u0_mass", std::isfinite(r.u0_mass) ? json(r.u0_mass) : json(nullptr)},
           {"extrapolated_mass", opt(r.extrapolated_mass)},
           {"mass_relative_error", opt(r.mass_relative_error)},
           {"growth_factor", opt(r.growth_factor)},
           {"omega_mass_monotone", r.omega_mass_monotone},
           {"distance_monotone", r.distance_monotone},
           {"mprime_negative", r.mprime_negative},
           {"mprime_growing", r.mprime_growing},
           {"det_negative", r.det_negative},
           {"sign_window", r.window}};
}

void to_json(json& j, const EnergyReport& r) {
  j = json{{"target", r.target},
           {"extrapolated", r.extrapolated},
           {"relative_error", r.relative_error},
           {"max_derivative_mismatch", r.max_derivative_mismatch},
           {"sign_near_zero", r.sign_near_zero}};
}

void to_json(json& j, const SolveDigest& d) {
  j = json{{"shooting_height", d.shooting_height},
           {"bracket", {d.bracket_lo, d.bracket_hi}},
           {"splice_radius", d.splice_radius},
           {"ode_residual", d.ode_residual},
           {"quasilinear_residual", d.quasilinear_residual},
           {"pohozaev_residual", d.pohozaev_residual},
           {"nehari_residual", d.nehari_residual},
           {"bisections", d.iterations},
           {"warm_start", d.warm}};
}

void from_json(const json& j, SolveDigest& d) {
  d.shooting_height = j.at("shooting_height").get<double>();
  d.bracket_lo = j.at("bracket").at(0).get<double>();
  d.bracket_hi = j.at("bracket").at(1).get<double>();
  d.splice_radius = j.at("splice_radius").get<double>();
  d.ode_residual = j.at("ode_residual").get<double>();
  d.quasilinear_residual = j.at("quasilinear_residual").get<double>();
  d.pohozaev_residual = j.at("pohozaev_residual").get<double>();
  d.nehari_residual = j.at("nehari_residual").get<double>();
  d.iterations = j.at("bisections").get<int>();
  d.warm = j.at("warm_start").get<bool>();
}

void to_json(json& j, const SpectralDigest& d) {
  j = json{{"negative_count", d.negative_count},
           {"lminus_kernel_residual", d.lminus_kernel_residual},
           {"lplus_kernel_residual", d.lplus_kernel_residual},
           {"mprime_resolvent", d.mprime_resolvent},
           {"mprime_dual", d.mprime_dual},
           {"det_closed", opt(d.det_closed)},
           {"det_direct", opt(d.det_direct)},
           {"matrix_mismatch", opt(d.matrix_mismatch)}};
}

void from_json(const json& j, SpectralDigest& d) {
  d.negative_count = j.at("negative_count").get<int>();
  d.lminus_kernel_residual = j.at("lminus_kernel_residual").get<double>();
  d.lplus_kernel_residual = j.at("lplus_kernel_residual").get<double>();
  d.mprime_resolvent = j.at("mprime_resolvent").get<double>();
  d.mprime_dual = j.at("mprime_dual").get<double>();
  d.det_closed = get_opt<double>(j, "det_closed");
  d.det_direct = get_opt<double>(j, "det_direct");
  d.matrix_mismatch = get_opt<double>(j, "matrix_mismatch");
}

void to_json(json& j, const BranchRecord& r) {
  j = json{{"params", r.params}, {"resolution", r.resolution}, {"ok", r.ok}, {"error", r.error}};
  j["solve"] = r.ok ? json(r.solve) : json(nullptr);
  j["point"] = r.ok ? json(r.point) : json(nullptr);
  j["spectral"] = opt(r.spectral);
}

void from_json(const json& j, BranchRecord& r) {
  r.params = j.at("params").get<Params>();
  r.resolution = j.at("resolution").get<int>();
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  if (r.ok) {
    r.solve = j.at("solve").get<SolveDigest>();
    r.point = j.at("point").get<MassCurvePoint>();
  }
  r.spectral = get_opt<SpectralDigest>(j, "spectral");
}

json document(const std::string& kind, const json& body) {
  json doc = {{"schema", kSchemaVersion}, {"kind", kind}};
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  return doc;
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  os << doc.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, path + ": " + e.what());
  }
}

}  // namespace qsg
