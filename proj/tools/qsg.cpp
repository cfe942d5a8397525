#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qsg/branch.hpp"
#include "qsg/error.hpp"
#include "qsg/io.hpp"
#include "qsg/spectra.hpp"
#include "qsg/verify.hpp"

namespace fs = std::filesystem;
using namespace qsg;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct Flags {
  int dim = 3;
  std::string p;
  double delta = 1.0;
  double omega = 1.0;
  int resolution = 4096;
  std::string out;
  std::string tag;
  int jobs = 1;
  bool json = false;
  std::string ladder;
  bool spectra = false;
  std::string regime;
  double fit_max = 0.0;
};

struct Given {
  CLI::Option* dim = nullptr;
  CLI::Option* p = nullptr;
  CLI::Option* delta = nullptr;
  CLI::Option* omega = nullptr;
  CLI::Option* ladder = nullptr;
  CLI::Option* fit_max = nullptr;
};

// Usage errors detected after parsing map to exit 2 like CLI11 errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Params make_params(const Flags& f, double omega) {
  if (auto q = parse_rational(f.p)) return Params::make(f.dim, *q, f.delta, omega);
  double p = 0.0;
  try {
    std::size_t pos = 0;
    p = std::stod(f.p, &pos);
    if (pos != f.p.size()) throw std::invalid_argument(f.p);
  } catch (const std::exception&) {
    throw UsageError("--p: cannot parse '" + f.p + "'");
  }
  return Params::make(f.dim, p, f.delta, omega);
}

std::string run_dir(const Flags& f, const std::string& fallback_tag) {
  if (!f.out.empty()) return f.out;
  return (fs::path(default_output_root()) / (f.tag.empty() ? fallback_tag : f.tag)).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
}

void emit(const Flags& f, const json& doc, const std::string& summary) {
  if (f.json)
    std::cout << doc.dump(2) << '\n';
  else
    std::cout << summary;
}

int cmd_solve(const Flags& f) {
  const Params params = make_params(f, f.omega);
  ShootingConfig cfg;
  cfg.resolution = f.resolution;
  const SolveReport rep = solve_ground_state(params, cfg);
  const std::string dir = run_dir(f, "solve");
  ensure_dir(dir);
  write_profile_csv((fs::path(dir) / "profile_u.csv").string(), rep.u);
  write_profile_csv((fs::path(dir) / "profile_v.csv").string(), rep.v);
  const json doc = document("solve_report", json(rep));
  write_json((fs::path(dir) / "solve.json").string(), doc);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "u(0) = %.12g  v(0) = %.12g  M = %.12g  E = %.12g\n"
                "pohozaev %.2e  nehari %.2e  ode %.2e\nwrote %s\n",
                rep.u.values(0), rep.shooting_height, rep.diagnostics.mass.value_or(NAN), rep.diagnostics.energy,
                rep.pohozaev_residual, rep.nehari_residual, rep.ode_residual, dir.c_str());
  emit(f, doc, buf);
  return 0;
}

int cmd_sweep(const Flags& f) {
  SweepPlan plan;
  plan.base = make_params(f, 1.0);
  plan.omegas = parse_ladder(f.ladder);
  plan.resolution = f.resolution;
  plan.spectra = f.spectra;
  plan.jobs = f.jobs;
  plan.tag = f.tag.empty() ? "branch" : f.tag;
  plan.validate();
  if (classify(plan.base).sobolev == SobolevRegime::Supercritical) {
    ShootingConfig cfg;
    cfg.resolution = f.resolution;
    plan.reference = solve_ground_state(plan.base.with_freq(0.0), cfg).u;
  }
  BranchStore store = run_sweep(plan);
  const std::string dir = run_dir(f, plan.tag);
  store.save(dir);
  json points = json::array();
  std::size_t failed = 0;
  for (const auto& rec : store.records()) {
    points.push_back(rec);
    if (!rec.ok) ++failed;
  }
  const json doc = document("branch", {{"params", plan.base}, {"points", points}});
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu points, %zu failed\nwrote %s\n", store.size(), failed, dir.c_str());
  emit(f, doc, buf);
  return failed == 0 ? 0 : kExitFailed;
}

int cmd_spectrum(const Flags& f) {
  const Params params = make_params(f, f.omega);
  ShootingConfig cfg;
  cfg.resolution = f.resolution;
  const SolveReport sol = solve_ground_state(params, cfg);
  const SpectralReport spec = spectral_report(sol);
  const json doc = document("spectral_report", {{"params", params}, {"spectrum", spec}});
  const std::string dir = run_dir(f, "spectrum");
  ensure_dir(dir);
  write_json((fs::path(dir) / "spectrum.json").string(), doc);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "negative count L+ = %d\n|L- u|/|u| = %.3e  |L+ u'|/|u'| = %.3e\n"
                "M' resolvent = %.10g  dual = %.10g\nwrote %s\n",
                spec.negative_count_lplus, spec.lminus_kernel_residual, spec.lplus_kernel_residual,
                spec.mprime_resolvent, spec.mprime_dual, dir.c_str());
  emit(f, doc, buf);
  return 0;
}

Params verify_params(const Flags& f, const Given& given) {
  Flags g = f;
  if (f.regime == "sub") {
    if (!given.p->count()) g.p = "2";
  } else if (f.regime == "crit") {
    if (!given.p->count()) {
      if (g.dim < 3) throw UsageError("the critical regime needs --dim >= 3");
      g.p = std::to_string(g.dim + 2) + "/" + std::to_string(g.dim - 2);
    }
  } else {
    if (!given.dim->count()) g.dim = 5;
    if (!given.p->count()) g.p = "3";
  }
  const Params params = make_params(g, 1.0);
  const SobolevRegime want = f.regime == "sub"    ? SobolevRegime::Subcritical
                             : f.regime == "crit" ? SobolevRegime::Critical
                                                  : SobolevRegime::Supercritical;
  if (classify(params).sobolev != want)
    throw UsageError("p = " + g.p + " is " + to_string(classify(params).sobolev) + " for N = " +
                     std::to_string(params.dim) + ", not the requested regime");
  return params;
}

int cmd_verify(const Flags& f, const Given& given) {
  const Params params = verify_params(f, given);
  VerifyConfig cfg = default_verify_config(params);
  if (given.ladder->count()) cfg.omegas = parse_ladder(f.ladder);
  if (given.fit_max->count()) cfg.fit_window_max = f.fit_max;
  cfg.resolution = f.resolution;
  cfg.jobs = f.jobs;
  const VerifyResult res = verify_branch(cfg);

  const std::string dir = run_dir(f, "verify-" + f.regime);
  res.store.save(dir);
  json body = {{"params", params}, {"passed", res.passed()}, {"gates", res.gates}};
  for (auto it = res.details.begin(); it != res.details.end(); ++it) body[it.key()] = it.value();
  const json doc = document("verify", body);
  write_json((fs::path(dir) / "verify.json").string(), doc);

  std::string summary;
  char buf[256];
  for (const auto& g : res.gates) {
    std::snprintf(buf, sizeof buf, "%s  %-42s %.6g (bound %.6g)\n", g.pass ? "PASS" : "FAIL", g.name.c_str(),
                  g.value, g.bound);
    summary += buf;
  }
  summary += (res.passed() ? "verification passed\n" : "verification FAILED\n");
  summary += "wrote " + dir + "\n";
  emit(f, doc, summary);
  return res.passed() ? 0 : kExitFailed;
}

int cmd_fit(const Flags& f, const Given& given) {
  const std::string dir = run_dir(f, "branch");
  const BranchStore store = BranchStore::load(dir);
  const auto branch = store.branch();
  if (branch.empty()) throw Error(ErrorCode::InsufficientWindow, "no solved points in " + dir);
  const Params params = store.records().front().params;
  const std::optional<double> window = given.fit_max->count() ? std::optional<double>(f.fit_max) : std::nullopt;

  std::vector<double> om, mass;
  for (const auto& pt : branch)
    if (pt.mass && (!window || pt.omega <= *window)) {
      om.push_back(pt.omega);
      mass.push_back(*pt.mass);
    }
  json body = {{"params", params}, {"points", branch.size()}};
  if (window) body["fit_window_max"] = *window;
  try {
    body["mass"] = fit_power(om, mass);
  } catch (const Error& e) {
    body["mass"] = {{"error", e.what()}};
  }
  if (classify(params).sobolev == SobolevRegime::Critical) {
    try {
      body["critical"] = critical_scaling_report(branch, params, window);
    } catch (const Error& e) {
      body["critical"] = {{"error", e.what()}};
    }
  }
  const json doc = document("fits", body);
  write_json((fs::path(dir) / "fits.json").string(), doc);
  std::string summary = "wrote " + (fs::path(dir) / "fits.json").string() + "\n";
  if (body["mass"].contains("exponent"))
    summary = "mass exponent " + std::to_string(body["mass"]["exponent"].get<double>()) + "\n" + summary;
  emit(f, doc, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasilinear Schroedinger ground states: solve, sweep, spectra and asymptotic checks"};
  app.require_subcommand(1);
  Flags f;
  Given given;

  auto params_flags = [&](CLI::App* sub, bool with_omega) {
    given.dim = sub->add_option("--dim", f.dim, "space dimension N")->check(CLI::Range(2, 64));
    given.p = sub->add_option("--p", f.p, "exponent p, integer, fraction (7/3) or decimal");
    given.delta = sub->add_option("--delta", f.delta, "quasilinear coupling delta >= 0");
    if (with_omega) given.omega = sub->add_option("--omega", f.omega, "frequency omega >= 0");
    sub->add_option("--resolution", f.resolution, "grid intervals")->check(CLI::Range(64, 1 << 22));
    sub->add_option("--out", f.out, "output directory (default $QG_OUT_DIR/<tag>)");
    sub->add_option("--tag", f.tag, "run name below the output root");
    sub->add_flag("--json", f.json, "print the JSON document instead of a summary");
  };

  auto* solve = app.add_subcommand("solve", "solve one ground state, write its profiles and report");
  params_flags(solve, true);
  given.p->required();
  auto* sweep = app.add_subcommand("sweep", "solve a frequency ladder into a branch store");
  params_flags(sweep, false);
  given.p->required();
  sweep->add_option("--omega-ladder", f.ladder, "a:b:ratio, omega from a down to b")->required();
  sweep->add_option("--jobs", f.jobs, "worker threads")->check(CLI::Range(1, 256));
  sweep->add_flag("--spectra", f.spectra, "also compute spectra and resolvent M'");
  auto* spectrum = app.add_subcommand("spectrum", "spectral report of one ground state");
  params_flags(spectrum, true);
  given.p->required();
  auto* verify = app.add_subcommand("verify", "run the asymptotic checks of one regime");
  params_flags(verify, false);
  Given verify_given = given;
  verify->add_option("--regime", f.regime, "sub, crit or super")
      ->required()
      ->check(CLI::IsMember({"sub", "crit", "super"}));
  verify_given.ladder = verify->add_option("--omega-ladder", f.ladder, "override the default ladder a:b:ratio");
  verify_given.fit_max = verify->add_option("--fit-max", f.fit_max, "largest omega used in the fits");
  verify->add_option("--jobs", f.jobs, "worker threads")->check(CLI::Range(1, 256));
  auto* fit = app.add_subcommand("fit", "re-fit a stored branch and write fits.json");
  fit->add_option("--out", f.out, "branch directory (default $QG_OUT_DIR/<tag>)");
  fit->add_option("--tag", f.tag, "run name below the output root");
  fit->add_flag("--json", f.json, "print the JSON document instead of a summary");
  Given fit_given;
  fit_given.fit_max = fit->add_option("--fit-max", f.fit_max, "largest omega used in the fits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(f);
    if (*sweep) return cmd_sweep(f);
    if (*spectrum) return cmd_spectrum(f);
    if (*verify) return cmd_verify(f, verify_given);
    return cmd_fit(f, fit_given);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::InvalidParams || e.code() == ErrorCode::RegimeMismatch;
    return usage ? kExitUsage : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}
