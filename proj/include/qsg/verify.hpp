#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsg/branch.hpp"
#include "qsg/io.hpp"

namespace qsg {

/// One pass/fail check: `value` compared against `bound` (booleans use 1/0 against 1).
struct Gate {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

void to_json(json& j, const Gate& g);

struct VerifyConfig {
  Params params;               // ω is ignored
  std::vector<double> omegas;  // strictly decreasing ladder
  std::optional<double> fit_window_max;
  int resolution = 4096;
  int jobs = 1;
};

/// Default ladder and fit window of the regime's reference branch.
VerifyConfig default_verify_config(const Params& params);

struct VerifyResult {
  SobolevRegime regime = SobolevRegime::Subcritical;
  std::vector<Gate> gates;
  BranchStore store;
  json details;

  bool passed() const;
};

/// Maximum relative gap between the finite-difference and resolvent M' over the points
/// carrying both; zero when none do.
double mprime_cross_mismatch(const std::vector<MassCurvePoint>& branch);

/// Runs the branch of the configuration's regime with spectra and evaluates its gates.
/// Throws InvalidParams for an invalid configuration.
VerifyResult verify_branch(const VerifyConfig& cfg);

}  // namespace qsg
