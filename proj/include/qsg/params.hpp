#pragma once

#include <optional>
#include <string>

#include "qsg/rational.hpp"

namespace qsg {

/// Model parameters of  Δu − ωu + |u|^{p−1}u + δΔ(|u|²)u = 0  on R^N.
struct Params {
  int dim = 3;
  double exponent = 3.0;
  double coupling = 1.0;
  double freq = 1.0;
  /// Set when p was supplied as an exact fraction; drives regime detection.
  std::optional<Rational> exponent_exact;

  static Params make(int dim, double p, double delta, double omega);
  static Params make(int dim, Rational p, double delta, double omega);

  /// Throws InvalidParams unless every invariant holds.
  void validate() const;

  Params with_freq(double omega) const {
    Params q = *this;
    q.freq = omega;
    return q;
  }
  Params with_coupling(double delta) const {
    Params q = *this;
    q.coupling = delta;
    return q;
  }

  double critical_sobolev() const { return 2.0 * dim / (dim - 2.0); }  // 2*
};

enum class SobolevRegime { Subcritical, Critical, Supercritical };
enum class MassRegime { MassSubcritical, MassCriticalPlus };

/// Regime classification together with the thresholds it was taken against.
struct Regime {
  SobolevRegime sobolev = SobolevRegime::Subcritical;
  MassRegime mass = MassRegime::MassSubcritical;
  std::optional<Rational> sobolev_threshold;  // (N+2)/(N−2), absent for N = 2
  Rational mass_threshold;                    // 1 + 4/N
  Rational stability_threshold;               // 3 + 4/N
  std::optional<Rational> existence_bound;    // (3N+2)/(N−2), absent for N = 2
};

Regime classify(const Params& params);

std::string to_string(SobolevRegime r);
std::string to_string(MassRegime r);

/// Tolerance used to classify decimal exponents against rational thresholds.
inline constexpr double kExponentTolerance = 1e-12;

}  // namespace qsg
