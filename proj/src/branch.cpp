#include "qsg/branch.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "qsg/dual_transform.hpp"
#include "qsg/io.hpp"
#include "qsg/quadrature.hpp"

namespace qsg {

namespace fs = std::filesystem;

std::vector<double> geometric_ladder(double a, double b, double ratio) {
  if (!(a > 0 && b > 0 && ratio > 0 && ratio < 1))
    throw Error(ErrorCode::InvalidParams, "ladder needs a, b > 0 and 0 < ratio < 1");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double w = a * std::pow(ratio, k);
    if (w < b * (1.0 - 1e-9)) break;
    out.push_back(w);
  }
  return out;
}

std::vector<double> parse_ladder(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    const auto q = parse_rational(item);
    char* end = nullptr;
    const double x = q ? q->value() : std::strtod(item.c_str(), &end);
    if (!q && (end == item.c_str() || *end != '\0'))
      throw Error(ErrorCode::InvalidParams, "malformed ladder entry '" + item + "'");
    parts.push_back(x);
  }
  if (parts.size() != 3) throw Error(ErrorCode::InvalidParams, "ladder must be a:b:ratio");
  return geometric_ladder(parts[0], parts[1], parts[2]);
}

void SweepPlan::validate() const {
  if (resolution < kMinResolution) throw Error(ErrorCode::InvalidParams, "resolution must be at least 64");
  if (jobs < 1) throw Error(ErrorCode::InvalidParams, "jobs must be positive");
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    base.with_freq(omegas[i]).validate();
    if (i > 0 && !(omegas[i] < omegas[i - 1]))
      throw Error(ErrorCode::InvalidParams, "ω list must be strictly decreasing");
  }
}

double BranchRecord::quality() const {
  if (!ok) return std::numeric_limits<double>::infinity();
  return std::max(std::abs(solve.pohozaev_residual), std::abs(solve.nehari_residual));
}

bool BranchStore::insert(const BranchRecord& rec) {
  const Key key{rec.params.dim, rec.params.exponent, rec.params.coupling, rec.params.freq, rec.resolution};
  auto it = records_.find(key);
  if (it != records_.end() && !(rec.quality() < it->second.quality())) return false;
  records_[key] = rec;
  return true;
}

std::vector<BranchRecord> BranchStore::records() const {
  std::vector<BranchRecord> out;
  for (const auto& [key, rec] : records_) out.push_back(rec);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.params.freq > b.params.freq; });
  return out;
}

std::vector<MassCurvePoint> BranchStore::branch() const {
  std::vector<MassCurvePoint> out;
  for (const auto& rec : records())
    if (rec.ok) out.push_back(rec.point);
  return out;
}

const BranchRecord* BranchStore::find(const Key& key) const {
  auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

void BranchStore::finalize_derivatives() {
  std::vector<BranchRecord*> pts;
  for (auto& [key, rec] : records_)
    if (rec.ok && rec.point.mass) pts.push_back(&rec);
  std::stable_sort(pts.begin(), pts.end(), [](auto a, auto b) { return a->params.freq > b->params.freq; });
  std::vector<double> om, mass;
  for (auto* r : pts) {
    om.push_back(r->params.freq);
    mass.push_back(*r->point.mass);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    try {
      pts[i]->point.mprime_fd = mprime_fd(om, mass, i);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientNeighbors) throw;
      pts[i]->point.mprime_fd.reset();
    }
  }
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

}  // namespace

std::string point_file_name(double omega) { return fmt(omega) + ".json"; }

void BranchStore::save(const std::string& dir) const {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "points", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  std::ofstream csv(fs::path(dir) / "branch.csv");
  if (!csv) throw Error(ErrorCode::Io, "cannot write " + dir + "/branch.csv");
  csv << "omega,M,Mprime_fd,Mprime_res,T,beta,Qgrad,E,m_omega,lambda\n";
  for (const auto& rec : records()) {
    if (rec.ok) {
      const MassCurvePoint& p = rec.point;
      csv << fmt(p.omega) << ',' << fmt(p.mass) << ',' << fmt(p.mprime_fd) << ',' << fmt(p.mprime_resolvent) << ','
          << fmt(p.dirichlet) << ',' << fmt(p.beta) << ',' << fmt(p.quasi) << ',' << fmt(p.energy) << ','
          << fmt(p.m_omega) << ',' << fmt(p.lambda) << '\n';
    }
    write_json((fs::path(dir) / "points" / point_file_name(rec.params.freq)).string(),
               document("branch_point", json(rec)));
  }
}

BranchStore BranchStore::load(const std::string& dir) {
  const fs::path points = fs::path(dir) / "points";
  if (!fs::is_directory(points)) throw Error(ErrorCode::Io, "no points directory in " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(points))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  BranchStore store;
  for (const auto& f : files) {
    const json doc = read_json(f.string());
    if (doc.value("schema", 0) != kSchemaVersion) throw Error(ErrorCode::Io, f.string() + ": unsupported schema");
    store.insert(doc.get<BranchRecord>());
  }
  return store;
}

double mprime_fd(const std::vector<double>& omega, const std::vector<double>& mass, std::size_t i) {
  return branch_derivative(omega, mass, i);
}

double mprime_fd(const BranchStore& store, double omega) {
  std::vector<double> om, mass;
  std::optional<std::size_t> at;
  for (const auto& pt : store.branch()) {
    if (!pt.mass) continue;
    if (std::abs(pt.omega - omega) <= 1e-12 * omega) at = om.size();
    om.push_back(pt.omega);
    mass.push_back(*pt.mass);
  }
  if (!at) throw Error(ErrorCode::InsufficientNeighbors, "ω = " + fmt(omega) + " is not in the store");
  return mprime_fd(om, mass, *at);
}

std::string default_output_root() {
  const char* env = std::getenv("QG_OUT_DIR");
  return env && *env ? std::string(env) : std::string("runs");
}

namespace {

// Valid shooting bracket around `guess`, widened tenfold per side until it brackets.
std::optional<std::pair<double, double>> warm_bracket(double guess, const Params& params, const ShootingConfig& cfg) {
  const double r_max = default_r_max(params.freq);
  double eps_lo = 1e-12, eps_hi = 1e-12;
  double lo = guess / (1.0 + eps_lo), hi = guess * (1.0 + eps_hi);
  bool lo_ok = false, hi_ok = false;
  for (int k = 0; k < 16 && !(lo_ok && hi_ok); ++k) {
    if (!lo_ok) {
      const Trajectory t = shoot(lo, params, cfg, r_max);
      lo_ok = t == Trajectory::Undershoot;
      if (!lo_ok) lo = guess / (1.0 + (eps_lo *= 10.0));
    }
    if (!hi_ok) {
      const Trajectory t = shoot(hi, params, cfg, r_max);
      hi_ok = t == Trajectory::Overshoot;
      if (!hi_ok) hi = guess * (1.0 + (eps_hi *= 10.0));
    }
  }
  if (!(lo_ok && hi_ok)) return std::nullopt;
  return std::make_pair(lo, hi);
}

struct Seed {
  double omega;
  double u0;
};

BranchRecord solve_point(const SweepPlan& plan, std::size_t i, const std::optional<Seed>& seed) {
  BranchRecord rec;
  rec.params = plan.base.with_freq(plan.omegas[i]);
  rec.resolution = plan.resolution;
  try {
    ShootingConfig cfg;
    cfg.resolution = plan.resolution;
    std::optional<SolveReport> sol;
    if (seed && plan.warm_start) {
      const TransformContext<double> ctx(rec.params.coupling);
      const double scaled = seed->u0 * std::pow(rec.params.freq / seed->omega, 1.0 / (rec.params.exponent - 1.0));
      try {
        if (auto br = warm_bracket(h(scaled, ctx), rec.params, cfg)) {
          ShootingConfig warm = cfg;
          warm.a_lo = br->first;
          warm.a_hi = br->second;
          sol = solve_ground_state(rec.params, warm);
          rec.solve.warm = true;
        }
      } catch (const Error&) {
        sol.reset();
      }
    }
    if (!sol) sol = solve_ground_state(rec.params, cfg);

    rec.solve.shooting_height = sol->shooting_height;
    rec.solve.bracket_lo = sol->bracket_lo;
    rec.solve.bracket_hi = sol->bracket_hi;
    rec.solve.splice_radius = sol->splice_radius;
    rec.solve.ode_residual = sol->ode_residual;
    rec.solve.quasilinear_residual = sol->quasilinear_residual;
    rec.solve.pohozaev_residual = sol->pohozaev_residual;
    rec.solve.nehari_residual = sol->nehari_residual;
    rec.solve.iterations = sol->iterations;

    std::optional<SpectralReport> spec;
    if (plan.spectra) {
      try {
        spec = spectral_report(*sol);
      } catch (const Error& e) {
        rec.error = std::string("spectra: ") + e.what();
      }
    }
    if (spec) {
      SpectralDigest d;
      d.negative_count = spec->negative_count_lplus;
      d.lminus_kernel_residual = spec->lminus_kernel_residual;
      d.lplus_kernel_residual = spec->lplus_kernel_residual;
      d.mprime_resolvent = spec->mprime_resolvent;
      d.mprime_dual = spec->mprime_dual;
      if (spec->matrix) {
        d.det_closed = spec->matrix->det_closed;
        d.det_direct = spec->matrix->det_direct;
        d.matrix_mismatch = spec->matrix->max_mismatch;
      }
      rec.spectral = d;
    }
    rec.point = make_point(*sol, spec ? &*spec : nullptr);

    if (plan.reference) {
      const Profile& ref = *plan.reference;
      rec.point.limit_distance = sup_distance(ref, sol->u, ref.grid->r_max());
      Eigen::VectorXd diff(ref.size()), base(ref.size());
      for (Eigen::Index k = 0; k < ref.size(); ++k) {
        const double du = sol->u.eval(ref.r(k)).second;
        diff(k) = std::pow(du - ref.derivative_values(k), 2);
        base(k) = std::pow(ref.derivative_values(k), 2);
      }
      const Eigen::VectorXd w = radial_weights(*ref.grid, ref.decay.dim);
      rec.point.gradient_distance = std::sqrt(w.dot(diff) / w.dot(base));
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

BranchStore run_sweep(const SweepPlan& plan) {
  plan.validate();
  BranchStore store;
  const std::size_t n = plan.omegas.size();
  if (n == 0) return store;

  std::vector<BranchRecord> results(n);
  results[0] = solve_point(plan, 0, std::nullopt);
  std::optional<Seed> seed;
  if (results[0].ok) seed = Seed{plan.omegas[0], results[0].point.sup_u};

  std::atomic<std::size_t> next{1};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = solve_point(plan, i, seed);
  };
  const int threads = std::min<int>(plan.jobs, static_cast<int>(n) - 1);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& rec : results) store.insert(rec);
  store.finalize_derivatives();
  if (plan.out_dir) store.save((fs::path(*plan.out_dir) / plan.tag).string());
  return store;
}

}  // namespace qsg
