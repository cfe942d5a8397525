#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qsg/asymptotics.hpp"
#include "qsg/params.hpp"
#include "qsg/shooting.hpp"

namespace qsg {

/// ω_k = a · ratio^k for k = 0, 1, ... while ω ≥ b (with a relative slack of 1e-9).
std::vector<double> geometric_ladder(double a, double b, double ratio);

/// "a:b:ratio" → geometric_ladder(a, b, ratio). Throws InvalidParams on malformed input.
std::vector<double> parse_ladder(const std::string& spec);

struct SweepPlan {
  Params base;                 // everything but ω
  std::vector<double> omegas;  // strictly decreasing
  int resolution = 4096;
  bool spectra = false;
  /// ω = 0 profile; when present, every point records its distance to it.
  std::optional<Profile> reference;
  std::string tag = "branch";
  std::optional<std::string> out_dir;  // runs/<tag> is created below it when set
  int jobs = 1;
  bool warm_start = true;

  /// Throws InvalidParams unless ω is strictly decreasing and every point is admissible.
  void validate() const;
};

/// Short digest of a SolveReport kept in the store.
struct SolveDigest {
  double shooting_height = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double splice_radius = 0.0;
  double ode_residual = 0.0;
  double quasilinear_residual = 0.0;
  double pohozaev_residual = 0.0;
  double nehari_residual = 0.0;
  int iterations = 0;
  bool warm = false;
};

struct SpectralDigest {
  int negative_count = 0;
  double lminus_kernel_residual = 0.0;
  double lplus_kernel_residual = 0.0;
  double mprime_resolvent = 0.0;
  double mprime_dual = 0.0;
  std::optional<double> det_closed;
  std::optional<double> det_direct;
  std::optional<double> matrix_mismatch;
};

struct BranchRecord {
  Params params;
  int resolution = 0;
  bool ok = false;
  std::string error;  // failure message; for successful solves, a failed optional stage
  SolveDigest solve;
  MassCurvePoint point;
  std::optional<SpectralDigest> spectral;

  /// max(|Pohozaev|, |Nehari|) residual; infinite for failures.
  double quality() const;
};

/// Records keyed by (N, p, δ, ω, resolution). Inserting an existing key replaces the record only
/// when its residuals improve.
class BranchStore {
 public:
  using Key = std::tuple<int, double, double, double, int>;

  /// Returns true if the record was stored.
  bool insert(const BranchRecord& rec);
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  /// Records ordered by decreasing ω.
  std::vector<BranchRecord> records() const;
  /// Successful points ordered by decreasing ω.
  std::vector<MassCurvePoint> branch() const;
  const BranchRecord* find(const Key& key) const;

  /// Fills Mprime_fd on every point that has neighbors on both sides.
  void finalize_derivatives();

  /// Writes branch.csv and points/<omega>.json below `dir`.
  void save(const std::string& dir) const;
  /// Reads a store written by save().
  static BranchStore load(const std::string& dir);

 private:
  std::map<Key, BranchRecord> records_;
};

/// Solves every point of the plan. Point 0 is solved from the default bracket; the others start
/// from v(0) of point 0 transported by the δ = 0 scaling through h and widened until it
/// brackets. Failures are recorded, never thrown.
BranchStore run_sweep(const SweepPlan& plan);

/// M'(ω) from the stored masses by a five-point stencil in log ω (shifted inward next to the ends).
/// Throws InsufficientNeighbors at the ends or when ω is not in the store.
double mprime_fd(const BranchStore& store, double omega);
/// Same on raw arrays ordered by decreasing ω.
double mprime_fd(const std::vector<double>& omega, const std::vector<double>& mass, std::size_t i);

/// Root for run outputs: $QG_OUT_DIR, else "runs".
std::string default_output_root();

/// File name used for a point: ω printed with 17 significant digits.
std::string point_file_name(double omega);

}  // namespace qsg
