#include "qsg/params.hpp"

#include <cmath>
#include <sstream>

#include "qsg/error.hpp"

namespace qsg {

std::optional<Rational> parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  auto parse_int = [](const std::string& s) -> std::optional<std::int64_t> {
    if (s.empty()) return std::nullopt;
    std::size_t pos = 0;
    try {
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) return std::nullopt;
      return v;
    } catch (...) {
      return std::nullopt;
    }
  };
  if (slash == std::string::npos) {
    auto n = parse_int(text);
    if (!n) return std::nullopt;
    return Rational(*n, 1);
  }
  auto n = parse_int(text.substr(0, slash));
  auto d = parse_int(text.substr(slash + 1));
  if (!n || !d || *d == 0) return std::nullopt;
  return Rational(*n, *d);
}

std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << q.num;
  if (q.den != 1) os << '/' << q.den;
  return os.str();
}

Params Params::make(int dim, double p, double delta, double omega) {
  Params out;
  out.dim = dim;
  out.exponent = p;
  out.coupling = delta;
  out.freq = omega;
  out.validate();
  return out;
}

Params Params::make(int dim, Rational p, double delta, double omega) {
  Params out;
  out.dim = dim;
  out.exponent = p.value();
  out.exponent_exact = p;
  out.coupling = delta;
  out.freq = omega;
  out.validate();
  return out;
}

namespace {

// -1, 0, +1 for p below, at, above the threshold.
int compare_exponent(const Params& params, const Rational& threshold) {
  if (params.exponent_exact) {
    const auto c = *params.exponent_exact <=> threshold;
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  const double diff = params.exponent - threshold.value();
  if (std::abs(diff) < kExponentTolerance) return 0;
  return diff < 0 ? -1 : 1;
}

}  // namespace

void Params::validate() const {
  if (dim < 2) throw Error(ErrorCode::InvalidParams, "dimension must be at least 2");
  if (!(exponent > 1.0) || !std::isfinite(exponent))
    throw Error(ErrorCode::InvalidParams, "exponent p must satisfy p > 1");
  if (!(coupling >= 0.0) || !std::isfinite(coupling))
    throw Error(ErrorCode::InvalidParams, "coupling delta must be >= 0");
  if (!(freq >= 0.0) || !std::isfinite(freq))
    throw Error(ErrorCode::InvalidParams, "frequency omega must be >= 0");
  if (dim >= 3) {
    const Rational bound(3 * dim + 2, dim - 2);
    if (compare_exponent(*this, bound) >= 0) {
      std::ostringstream os;
      os << "p = " << exponent << " violates the existence bound p < (3N+2)/(N-2) = "
         << to_string(bound) << " for N = " << dim;
      throw Error(ErrorCode::InvalidParams, os.str());
    }
  }
}

Regime classify(const Params& params) {
  params.validate();
  const int n = params.dim;
  Regime out;
  out.mass_threshold = Rational(n + 4, n);
  out.stability_threshold = Rational(3 * n + 4, n);
  if (n >= 3) {
    out.sobolev_threshold = Rational(n + 2, n - 2);
    out.existence_bound = Rational(3 * n + 2, n - 2);
    const int c = compare_exponent(params, *out.sobolev_threshold);
    out.sobolev = c < 0 ? SobolevRegime::Subcritical
                        : (c == 0 ? SobolevRegime::Critical : SobolevRegime::Supercritical);
  }
  out.mass = compare_exponent(params, out.mass_threshold) < 0 ? MassRegime::MassSubcritical
                                                              : MassRegime::MassCriticalPlus;
  return out;
}

std::string to_string(SobolevRegime r) {
  switch (r) {
    case SobolevRegime::Subcritical: return "Subcritical";
    case SobolevRegime::Critical: return "Critical";
    case SobolevRegime::Supercritical: return "Supercritical";
  }
  return "?";
}

std::string to_string(MassRegime r) {
  return r == MassRegime::MassSubcritical ? "MassSubcritical" : "MassCriticalPlus";
}

}  // namespace qsg
